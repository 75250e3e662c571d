#include "blindmix/operators.hpp"

#include <cmath>
#include <sstream>

#include "blindmix/fft.hpp"
#include "blindmix/kernels.hpp"
#include "blindmix/rng.hpp"

namespace blindmix {

namespace {

void check_source(const MeasurementEnsemble& ens, int i) {
    if (i < 0 || i >= ens.s) throw DimensionError("source index out of range");
}

// H x for the Hadamard-type ensemble: zero-pad to L, Walsh-Hadamard.
cvec hadamard_pad(std::span<const cplx> x, int L) {
    cvec buf(static_cast<size_t>(L));
    std::copy(x.begin(), x.end(), buf.begin());
    fft::walsh_hadamard(buf);
    return buf;
}

}  // namespace

cvec MeasurementEnsemble::apply_A(int i, std::span<const cplx> x) const {
    check_source(*this, i);
    if (static_cast<int>(x.size()) != N) throw DimensionError("apply_A: x must have length N");
    cvec out(static_cast<size_t>(L));
    if (kind == EnsembleKind::Gaussian) {
        cmatvec(A[i], L, N, x, out);
    } else {
        // A_i x = F D_i (H x)
        out = hadamard_pad(x, L);
        for (int l = 0; l < L; ++l) out[l] *= signs[i][l];
        fft::unitary_forward(out);
    }
    return out;
}

cvec MeasurementEnsemble::apply_A_adjoint(int i, std::span<const cplx> w) const {
    check_source(*this, i);
    if (static_cast<int>(w.size()) != L) throw DimensionError("apply_A_adjoint: w must have length L");
    if (kind == EnsembleKind::Gaussian) {
        cvec out(static_cast<size_t>(N));
        cmatvec_adj(A[i], L, N, w, out);
        return out;
    }
    // A_i^H w = H^T D_i F^H w; H is real so H^T is the Walsh transform again.
    cvec buf(w.begin(), w.end());
    fft::unitary_inverse(buf);
    for (int l = 0; l < L; ++l) buf[l] *= signs[i][l];
    fft::walsh_hadamard(buf);
    return cvec(buf.begin(), buf.begin() + N);
}

cvec MeasurementEnsemble::A_column(int i, int n) const {
    check_source(*this, i);
    if (n < 0 || n >= N) throw DimensionError("A_column: column index out of range");
    if (kind == EnsembleKind::Gaussian) {
        cvec col(static_cast<size_t>(L));
        for (int l = 0; l < L; ++l) col[l] = A[i][static_cast<size_t>(l) * N + n];
        return col;
    }
    cvec e(static_cast<size_t>(N), cplx{0.0, 0.0});
    e[n] = 1.0;
    return apply_A(i, e);
}

MeasurementEnsemble make_ensemble(int L, int K, int N, int s, EnsembleKind kind, uint64_t seed) {
    if (L < 1 || K < 1 || N < 1 || s < 1) throw DimensionError("make_ensemble: dims must be positive");
    if (K > L) throw DimensionError("make_ensemble: K must not exceed L");
    if (kind == EnsembleKind::HadamardType) {
        if (!fft::is_pow2(L) || !fft::is_pow2(N) || N > L)
            throw DimensionError("make_ensemble: Hadamard-type needs L, N powers of two with N <= L");
    }
    MeasurementEnsemble ens;
    ens.L = L;
    ens.K = K;
    ens.N = N;
    ens.s = s;
    ens.kind = kind;
    ens.seed = seed;
    if (kind == EnsembleKind::Gaussian) {
        ens.A.resize(s);
        for (int i = 0; i < s; ++i) {
            ens.A[i].resize(static_cast<size_t>(L) * N);
            rng::Stream st(rng::derive(seed, 0xA11, static_cast<uint64_t>(i)));
            st.fill_cgaussian(ens.A[i]);
        }
    } else {
        ens.signs.resize(s);
        for (int i = 0; i < s; ++i) {
            ens.signs[i].resize(static_cast<size_t>(L));
            rng::Stream st(rng::derive(seed, 0xD1A6, static_cast<uint64_t>(i)));
            for (double& v : ens.signs[i]) v = static_cast<double>(st.next_sign());
        }
    }
    return ens;
}

cvec apply_B(std::span<const cplx> h, int L) {
    if (static_cast<int>(h.size()) > L) throw DimensionError("apply_B: K must not exceed L");
    cvec buf(static_cast<size_t>(L), cplx{0.0, 0.0});
    std::copy(h.begin(), h.end(), buf.begin());
    fft::unitary_forward(buf);
    return buf;
}

cvec apply_B_adjoint(std::span<const cplx> z, int K) {
    if (K > static_cast<int>(z.size())) throw DimensionError("apply_B_adjoint: K must not exceed L");
    cvec buf(z.begin(), z.end());
    fft::unitary_inverse(buf);
    buf.resize(static_cast<size_t>(K));
    return buf;
}

cvec lift_forward_i(const MeasurementEnsemble& ens, const cvec& Z, int i) {
    check_source(ens, i);
    if (Z.size() != static_cast<size_t>(ens.K) * ens.N)
        throw DimensionError("lift_forward_i: Z must be K x N");
    // Column-by-column: out = sum_n (B Z[:,n]) .* conj(A_i[:,n]).
    cvec out(static_cast<size_t>(ens.L), cplx{0.0, 0.0});
    cvec zcol(static_cast<size_t>(ens.K));
    for (int n = 0; n < ens.N; ++n) {
        for (int k = 0; k < ens.K; ++k) zcol[k] = Z[static_cast<size_t>(k) * ens.N + n];
        const cvec bz = apply_B(zcol, ens.L);
        const cvec acol = ens.A_column(i, n);
        for (int l = 0; l < ens.L; ++l) out[l] += bz[l] * std::conj(acol[l]);
    }
    return out;
}

cvec lift_forward_rank1(const MeasurementEnsemble& ens, std::span<const cplx> h,
                        std::span<const cplx> x, int i) {
    check_source(ens, i);
    if (static_cast<int>(h.size()) != ens.K || static_cast<int>(x.size()) != ens.N)
        throw DimensionError("lift_forward_rank1: block length mismatch");
    cvec bh = apply_B(h, ens.L);
    const cvec ax = ens.apply_A(i, x);
    for (int l = 0; l < ens.L; ++l) bh[l] *= std::conj(ax[l]);
    return bh;
}

cvec lift_adjoint_i(const MeasurementEnsemble& ens, std::span<const cplx> z, int i) {
    check_source(ens, i);
    if (static_cast<int>(z.size()) != ens.L) throw DimensionError("lift_adjoint_i: z must have length L");
    // B^H diag(z) A_i, one inverse transform per column.
    cvec M(static_cast<size_t>(ens.K) * ens.N);
    cvec t(static_cast<size_t>(ens.L));
    for (int n = 0; n < ens.N; ++n) {
        const cvec acol = ens.A_column(i, n);
        for (int l = 0; l < ens.L; ++l) t[l] = z[l] * acol[l];
        const cvec col = apply_B_adjoint(t, ens.K);
        for (int k = 0; k < ens.K; ++k) M[static_cast<size_t>(k) * ens.N + n] = col[k];
    }
    return M;
}

cvec lift_adjoint_apply_right(const MeasurementEnsemble& ens, std::span<const cplx> z,
                              std::span<const cplx> x, int i) {
    check_source(ens, i);
    if (static_cast<int>(z.size()) != ens.L || static_cast<int>(x.size()) != ens.N)
        throw DimensionError("lift_adjoint_apply_right: length mismatch");
    cvec t = ens.apply_A(i, x);
    for (int l = 0; l < ens.L; ++l) t[l] *= z[l];
    return apply_B_adjoint(t, ens.K);
}

cvec lift_adjoint_apply_left(const MeasurementEnsemble& ens, std::span<const cplx> z,
                             std::span<const cplx> h, int i) {
    check_source(ens, i);
    if (static_cast<int>(z.size()) != ens.L || static_cast<int>(h.size()) != ens.K)
        throw DimensionError("lift_adjoint_apply_left: length mismatch");
    cvec t = apply_B(h, ens.L);
    for (int l = 0; l < ens.L; ++l) t[l] *= std::conj(z[l]);
    return ens.apply_A_adjoint(i, t);
}

namespace {

template <typename PerSource>
cvec sum_over_sources(const MeasurementEnsemble& ens, int s, PerSource per_source, bool parallel) {
    // Per-source contributions land in their own buffers and are accumulated
    // in source order, so the result is identical with and without threads.
    std::vector<cvec> parts(static_cast<size_t>(s));
    if (parallel) {
#pragma omp parallel for schedule(static) if (s > 1)
        for (int i = 0; i < s; ++i) parts[i] = per_source(i);
    } else {
        for (int i = 0; i < s; ++i) parts[i] = per_source(i);
    }
    cvec out(static_cast<size_t>(ens.L), cplx{0.0, 0.0});
    for (int i = 0; i < s; ++i)
        for (int l = 0; l < ens.L; ++l) out[l] += parts[i][l];
    return out;
}

void check_pair(const MeasurementEnsemble& ens, const BlockPair& z) {
    if (z.s != ens.s || z.K != ens.K || z.N != ens.N)
        throw DimensionError("block pair does not match ensemble dims");
}

void check_blockdiag(const MeasurementEnsemble& ens, const LiftedBlockDiag& X) {
    if (X.s != ens.s || X.K != ens.K || X.N != ens.N)
        throw DimensionError("block diagonal does not match ensemble dims");
}

}  // namespace

cvec forward(const MeasurementEnsemble& ens, const LiftedBlockDiag& X) {
    check_blockdiag(ens, X);
    return sum_over_sources(ens, ens.s, [&](int i) { return lift_forward_i(ens, X.blocks[i], i); }, true);
}

LiftedBlockDiag adjoint(const MeasurementEnsemble& ens, std::span<const cplx> z) {
    if (static_cast<int>(z.size()) != ens.L) throw DimensionError("adjoint: z must have length L");
    LiftedBlockDiag X(ens.s, ens.K, ens.N);
#pragma omp parallel for schedule(static) if (ens.s > 1)
    for (int i = 0; i < ens.s; ++i) X.blocks[i] = lift_adjoint_i(ens, z, i);
    return X;
}

cvec forward_pair(const MeasurementEnsemble& ens, const BlockPair& z) {
    check_pair(ens, z);
    return sum_over_sources(
        ens, ens.s, [&](int i) { return lift_forward_rank1(ens, z.h_block(i), z.x_block(i), i); },
        true);
}

namespace serial {

cvec forward(const MeasurementEnsemble& ens, const LiftedBlockDiag& X) {
    check_blockdiag(ens, X);
    return sum_over_sources(ens, ens.s, [&](int i) { return lift_forward_i(ens, X.blocks[i], i); }, false);
}

cvec forward_pair(const MeasurementEnsemble& ens, const BlockPair& z) {
    check_pair(ens, z);
    return sum_over_sources(
        ens, ens.s, [&](int i) { return lift_forward_rank1(ens, z.h_block(i), z.x_block(i), i); },
        false);
}

}  // namespace serial

double operator_norm_estimate(const MeasurementEnsemble& ens, double tol, int max_iter) {
    if (tol <= 0.0) throw DimensionError("operator_norm_estimate: tol must be positive");
    LiftedBlockDiag X(ens.s, ens.K, ens.N);
    for (cvec& b : X.blocks) std::fill(b.begin(), b.end(), cplx{1.0, 0.0});
    double fn = X.frob_norm();
    for (cvec& b : X.blocks)
        for (cplx& v : b) v /= fn;

    double lambda_prev = -1.0;
    for (int it = 0; it < max_iter; ++it) {
        const cvec v = forward(ens, X);
        const double lambda = norm2(v);  // Rayleigh quotient of A^*A at unit X
        if (it > 0 && std::abs(lambda - lambda_prev) < tol * std::max(lambda, 1e-300))
            return std::sqrt(lambda);
        lambda_prev = lambda;
        X = adjoint(ens, v);
        fn = X.frob_norm();
        if (fn == 0.0) return 0.0;
        for (cvec& b : X.blocks)
            for (cplx& v2 : b) v2 /= fn;
    }
    std::ostringstream msg;
    msg << "operator_norm_estimate: no convergence after " << max_iter
        << " iterations, last estimate " << std::sqrt(lambda_prev);
    throw ConvergenceError(msg.str(), std::sqrt(lambda_prev));
}

}  // namespace blindmix
