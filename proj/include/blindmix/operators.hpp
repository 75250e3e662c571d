#pragma once

#include <cstdint>

#include "blindmix/types.hpp"

namespace blindmix {

enum class EnsembleKind { Gaussian, HadamardType };

// Measurement structure for one problem: the partial unitary DFT B (first K
// columns of the L x L unitary DFT, realized by FFTs, never stored) plus s
// encoding matrices A_i. Gaussian A_i are stored densely (L x N row-major);
// Hadamard-type A_i = F D_i H are kept as sign diagonals and applied with a
// Walsh-Hadamard transform followed by an FFT. Immutable after construction;
// all applications are pure and safe to share across threads.
struct MeasurementEnsemble {
    int L = 0, K = 0, N = 0, s = 0;
    EnsembleKind kind = EnsembleKind::Gaussian;
    std::vector<cvec> A;                     // Gaussian: s matrices, L*N row-major
    std::vector<std::vector<double>> signs;  // HadamardType: s sign diagonals, length L
    uint64_t seed = 0;

    // A_i x and A_i^H w.
    cvec apply_A(int i, std::span<const cplx> x) const;
    cvec apply_A_adjoint(int i, std::span<const cplx> w) const;
    // Column n of A_i, materialized (used by the general lift path).
    cvec A_column(int i, int n) const;
};

MeasurementEnsemble make_ensemble(int L, int K, int N, int s, EnsembleKind kind, uint64_t seed);

// B h: zero-pad h to length L and take the unitary DFT.
cvec apply_B(std::span<const cplx> h, int L);
// B^H z: unitary inverse DFT truncated to the first K entries.
cvec apply_B_adjoint(std::span<const cplx> z, int K);

// Lifted measurement map. With b_l^* the l-th row of B and a_il the
// conjugated l-th row of A_i, entry l of the i-th forward map is
// b_l^* Z a_il; the adjoint of the i-th map is z -> B^H diag(z) A_i.
cvec lift_forward_i(const MeasurementEnsemble& ens, const cvec& Z, int i);
cvec lift_forward_rank1(const MeasurementEnsemble& ens, std::span<const cplx> h,
                        std::span<const cplx> x, int i);
cvec lift_adjoint_i(const MeasurementEnsemble& ens, std::span<const cplx> z, int i);

// Fast composites used by the gradients, avoiding the K x N intermediate:
// right: lift_adjoint_i(z) * x = B^H (z .* (A_i x))
// left:  lift_adjoint_i(z)^H * h = A_i^H (conj(z) .* (B h))
cvec lift_adjoint_apply_right(const MeasurementEnsemble& ens, std::span<const cplx> z,
                              std::span<const cplx> x, int i);
cvec lift_adjoint_apply_left(const MeasurementEnsemble& ens, std::span<const cplx> z,
                             std::span<const cplx> h, int i);

// Full map over the block diagonal and its adjoint.
cvec forward(const MeasurementEnsemble& ens, const LiftedBlockDiag& X);
LiftedBlockDiag adjoint(const MeasurementEnsemble& ens, std::span<const cplx> z);

// Forward map on the rank-1 lift of z, sum_i (B h_i) .* conj(A_i x_i),
// without materializing the blocks.
cvec forward_pair(const MeasurementEnsemble& ens, const BlockPair& z);

namespace serial {
cvec forward(const MeasurementEnsemble& ens, const LiftedBlockDiag& X);
cvec forward_pair(const MeasurementEnsemble& ens, const BlockPair& z);
}  // namespace serial

// Power iteration for ||A||: iterates X <- A^*(A(X)) over the block diagonal
// from a deterministic all-ones start until successive Rayleigh quotients
// agree to tol (relative). Throws ConvergenceError past max_iter with the
// last estimate attached.
double operator_norm_estimate(const MeasurementEnsemble& ens, double tol, int max_iter = 10000);

}  // namespace blindmix
