#include "blindmix/types.hpp"

#include <cmath>

namespace blindmix {

double LiftedBlockDiag::frob_norm() const {
    double acc = 0.0;
    for (const cvec& b : blocks) acc += norm2(b);
    return std::sqrt(acc);
}

LiftedBlockDiag lift(const BlockPair& z) {
    LiftedBlockDiag X(z.s, z.K, z.N);
    for (int i = 0; i < z.s; ++i) {
        auto h = z.h_block(i);
        auto x = z.x_block(i);
        cvec& blk = X.blocks[i];
        for (int k = 0; k < z.K; ++k)
            for (int n = 0; n < z.N; ++n)
                blk[static_cast<size_t>(k) * z.N + n] = h[k] * std::conj(x[n]);
    }
    return X;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    cplx acc{0.0, 0.0};
    for (size_t j = 0; j < a.size(); ++j) acc += std::conj(a[j]) * b[j];
    return acc;
}

double norm2(std::span<const cplx> a) {
    double acc = 0.0;
    for (const cplx& v : a) acc += std::norm(v);
    return acc;
}

double norm(std::span<const cplx> a) { return std::sqrt(norm2(a)); }

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    for (size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

}  // namespace blindmix
