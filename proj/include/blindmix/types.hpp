#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace blindmix {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

// Thrown on shape disagreements between vectors, blocks and ensembles.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an iterative routine hits its iteration cap. Carries the last
// estimate so callers can inspect how far the iteration got.
struct ConvergenceError : std::runtime_error {
    double last_estimate = 0.0;
    cvec last_iterate;
    ConvergenceError(const std::string& what, double estimate)
        : std::runtime_error(what), last_estimate(estimate) {}
    ConvergenceError(const std::string& what, cvec iterate)
        : std::runtime_error(what), last_iterate(std::move(iterate)) {}
};

// Thrown on non-finite objectives or stalled line searches.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stacked unknowns: s channel blocks of length K and s signal blocks of
// length N, stored contiguously so descent steps are flat axpy ops.
struct BlockPair {
    int s = 0, K = 0, N = 0;
    cvec h;  // s*K entries, block i at [i*K, (i+1)*K)
    cvec x;  // s*N entries, block i at [i*N, (i+1)*N)

    BlockPair() = default;
    BlockPair(int s_, int K_, int N_)
        : s(s_), K(K_), N(N_), h(static_cast<size_t>(s_) * K_),
          x(static_cast<size_t>(s_) * N_) {}

    std::span<cplx> h_block(int i) { return {h.data() + static_cast<size_t>(i) * K, static_cast<size_t>(K)}; }
    std::span<const cplx> h_block(int i) const { return {h.data() + static_cast<size_t>(i) * K, static_cast<size_t>(K)}; }
    std::span<cplx> x_block(int i) { return {x.data() + static_cast<size_t>(i) * N, static_cast<size_t>(N)}; }
    std::span<const cplx> x_block(int i) const { return {x.data() + static_cast<size_t>(i) * N, static_cast<size_t>(N)}; }
};

// Block-diagonal lifted matrix: s dense K x N blocks, row-major.
struct LiftedBlockDiag {
    int s = 0, K = 0, N = 0;
    std::vector<cvec> blocks;

    LiftedBlockDiag() = default;
    LiftedBlockDiag(int s_, int K_, int N_)
        : s(s_), K(K_), N(N_),
          blocks(s_, cvec(static_cast<size_t>(K_) * N_)) {}

    double frob_norm() const;
};

// Builds the rank-1 lift: block i = h_i x_i^*.
LiftedBlockDiag lift(const BlockPair& z);

// Small dense/vector helpers shared across modules. All complex inner
// products are conjugate-linear in the first argument: dot(a,b) = a^H b.
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);   // squared Euclidean norm
double norm(std::span<const cplx> a);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);  // y += alpha*x

}  // namespace blindmix
