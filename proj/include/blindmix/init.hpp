#pragma once

#include "blindmix/model.hpp"

namespace blindmix {

struct SingularTriple {
    double sigma = 0.0;
    cvec left;   // unit, length K
    cvec right;  // unit, length N
};

struct InitOutput {
    BlockPair z0;            // (u^(0), v^(0))
    std::vector<double> d;   // per-source scale estimates
    double d_total = 0.0;    // sqrt(sum d_i^2)
};

// Leading singular triple of a dense K x N matrix (row-major) by power
// iteration on M M^H from the normalized all-ones start. Stops when
// successive Rayleigh quotients agree to tol (relative); the phase is fixed
// so the largest-modulus entry of the left vector is real nonnegative.
// Throws DimensionError on M = 0 and ConvergenceError past max_iter.
SingularTriple leading_singular_triple(const cvec& M, int K, int N, double tol = 1e-10,
                                       int max_iter = 10000);

// Euclidean projection of z0 onto {z in C^K : sqrt(L) ||B z||_inf <= c}.
// Works on w = B z: Dykstra's alternating projections between range(B)
// (w -> B B^H w) and the box {|w_l| <= c / sqrt(L)} (phase-preserving radial
// clip). Stops when successive iterates move less than tol.
cvec project_mu_ball(std::span<const cplx> z0, int L, double c, double tol = 1e-9,
                     int max_iter = 10000);

// Spectral initialization: per source, the leading triple of A_i^*(y) gives
// the scale d_i and directions; the channel estimate is projected onto the
// incoherence ball with bound 2 sqrt(d_i) mu, the signal estimate is scaled
// to norm sqrt(d_i).
InitOutput spectral_init(const ProblemInstance& inst, double mu, double tol = 1e-10);

}  // namespace blindmix
