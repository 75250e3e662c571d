#include "blindmix/kernels.hpp"

namespace blindmix {

namespace {

void check_dims(const cvec& M, int rows, int cols, size_t in, size_t out, bool adjoint) {
    if (M.size() != static_cast<size_t>(rows) * cols)
        throw DimensionError("cmatvec: matrix storage does not match rows*cols");
    const size_t want_in = adjoint ? static_cast<size_t>(rows) : static_cast<size_t>(cols);
    const size_t want_out = adjoint ? static_cast<size_t>(cols) : static_cast<size_t>(rows);
    if (in != want_in || out != want_out) throw DimensionError("cmatvec: vector length mismatch");
}

inline cplx row_dot(const cplx* row, std::span<const cplx> x, int cols) {
    cplx acc{0.0, 0.0};
    for (int n = 0; n < cols; ++n) acc += row[n] * x[n];
    return acc;
}

inline cplx col_dot_adj(const cvec& M, int rows, int cols, int n, std::span<const cplx> w) {
    cplx acc{0.0, 0.0};
    for (int l = 0; l < rows; ++l) acc += std::conj(M[static_cast<size_t>(l) * cols + n]) * w[l];
    return acc;
}

}  // namespace

namespace serial {

void cmatvec(const cvec& M, int rows, int cols, std::span<const cplx> x, std::span<cplx> out) {
    check_dims(M, rows, cols, x.size(), out.size(), false);
    for (int l = 0; l < rows; ++l) out[l] = row_dot(M.data() + static_cast<size_t>(l) * cols, x, cols);
}

void cmatvec_adj(const cvec& M, int rows, int cols, std::span<const cplx> w, std::span<cplx> out) {
    check_dims(M, rows, cols, w.size(), out.size(), true);
    for (int n = 0; n < cols; ++n) out[n] = col_dot_adj(M, rows, cols, n, w);
}

}  // namespace serial

void cmatvec(const cvec& M, int rows, int cols, std::span<const cplx> x, std::span<cplx> out) {
    check_dims(M, rows, cols, x.size(), out.size(), false);
#pragma omp parallel for schedule(static) if (static_cast<long>(rows) * cols > 16384)
    for (int l = 0; l < rows; ++l) out[l] = row_dot(M.data() + static_cast<size_t>(l) * cols, x, cols);
}

void cmatvec_adj(const cvec& M, int rows, int cols, std::span<const cplx> w, std::span<cplx> out) {
    check_dims(M, rows, cols, w.size(), out.size(), true);
#pragma omp parallel for schedule(static) if (static_cast<long>(rows) * cols > 16384)
    for (int n = 0; n < cols; ++n) out[n] = col_dot_adj(M, rows, cols, n, w);
}

}  // namespace blindmix
