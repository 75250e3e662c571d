#pragma once

#include <cstdint>
#include <string>

#include "blindmix/solver.hpp"

namespace blindmix {

// Parameters of the basin the analysis works in: per-block relative error at
// most epsilon (epsilon <= 1/15), channel spectra controlled by mu.
struct NeighborhoodSpec {
    double epsilon = 1.0 / 15.0;
    double mu = 0.0;  // must be >= the instance's mu_h

    void validate(const ProblemInstance& inst) const;
};

struct Membership {
    bool in_d = false;    // ||h_i||, ||x_i|| <= 2 sqrt(d_i0)
    bool in_mu = false;   // sqrt(L) ||B h_i||_inf <= 4 sqrt(d_i0) mu
    bool in_eps = false;  // delta_i <= epsilon for every block
};

Membership in_neighborhoods(const BlockPair& z, const ProblemInstance& inst,
                            const NeighborhoodSpec& spec);

// Random points of the basin: truth plus a Gaussian direction, radius set by
// bisection so max_i delta_i lands in [0.2 eps, eps]; redrawn until the norm
// and incoherence constraints also hold.
std::vector<BlockPair> sample_neighborhood(const ProblemInstance& inst, const NeighborhoodSpec& spec,
                                           int n_samples, uint64_t seed);

// One record per sample plus a summary; the CSV mirror and the text report
// are produced by the harness.
struct ProbeSample {
    int index = 0;
    double value = 0.0;  // probe-specific statistic
    double lhs = 0.0, rhs = 0.0;
    bool pass = false;
};

struct ProbeReport {
    std::string name;
    std::vector<ProbeSample> samples;
    double min_value = 0.0, max_value = 0.0, mean_value = 0.0;
    int violations = 0;
    bool pass = false;
    std::string detail;
};

// Restricted-isometry band on lifted differences: for sampled z, the ratio
// ||A(X - X_0)||^2 / ||X - X_0||_F^2 must lie in [2/3, 3/2].
ProbeReport probe_local_rip(const ProblemInstance& inst, const NeighborhoodSpec& spec, int n_samples,
                            uint64_t seed);

// Gradient lower bound ||grad(F+G)||^2 >= omega * [F+G - c]_+ with
// omega = d_0 / 7000 and c = ||e||^2 + 2000 s ||A^*(e)||^2.
ProbeReport probe_regularity(const ProblemInstance& inst, const NeighborhoodSpec& spec, int n_samples,
                             uint64_t seed);

// Noise leakage through the adjoint: max_i ||A_i^*(e)|| against
// eps d_0 / (10 sqrt(2) s kappa).
ProbeReport probe_robustness(const ProblemInstance& inst, const NeighborhoodSpec& spec);

// Power-iteration estimate of ||A|| against sqrt(s (N log(N L / 2) + 2 log L)).
ProbeReport probe_operator_norm(const ProblemInstance& inst, double tol = 1e-6);

}  // namespace blindmix
