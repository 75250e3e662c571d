#pragma once

#include <cstdint>
#include <string>

#include "blindmix/operators.hpp"

namespace blindmix {

// One synthetic recovery problem: ground truth, scales, noise and the
// observation. Immutable after generation; safe for shared reads.
struct ProblemInstance {
    MeasurementEnsemble ens;
    BlockPair truth;
    std::vector<double> d0;  // d_i0 = ||h_i0|| * ||x_i0||
    double d0_total = 0.0;   // sqrt(sum d_i0^2)
    double kappa = 1.0;      // max d_i0 / min d_i0
    double sigma = 0.0;
    cvec e;
    cvec y;
    double mu_h = 0.0;  // incoherence of the true channels
    uint64_t seed = 0;
    std::vector<double> scale_profile;
};

// Draws balanced complex-Gaussian truth (||h_i0|| = ||x_i0|| = sqrt(profile_i)),
// noise e ~ CN(0, sigma^2 d_0^2 / L I), and forms y. Deterministic given seed.
ProblemInstance generate_instance(MeasurementEnsemble ens, const std::vector<double>& scale_profile,
                                  double sigma, uint64_t seed);

// y = sum_i (B h_i) .* conj(A_i x_i) + e.
cvec measure(const MeasurementEnsemble& ens, const BlockPair& z, std::span<const cplx> e);

// Global relative error delta = ||H(h,x) - H(h0,x0)||_F / d_0 via the Gram
// expansion (no K x N rank-1 differences are formed), and its per-block
// counterpart delta_i = ||h_i x_i^* - h_i0 x_i0^*||_F / d_i0.
double relative_error(const BlockPair& z, const ProblemInstance& inst);
double per_block_error(const BlockPair& z, const ProblemInstance& inst, int i);

// 20 log10(||y|| / ||e||); +infinity when e = 0.
double snr_db(const ProblemInstance& inst);

// mu_h^2 = max_i L ||B h_i0||_inf^2 / ||h_i0||^2. The free-function form
// evaluates any stacked channel against the ensemble's B.
double incoherence_mu_h(const MeasurementEnsemble& ens, const BlockPair& z);
double incoherence_mu_h(const ProblemInstance& inst);

// Parameter-level serialization: everything needed to regenerate the
// instance bit for bit (dims, kind, seeds, sigma, scale profile).
void save_instance_spec(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

}  // namespace blindmix
