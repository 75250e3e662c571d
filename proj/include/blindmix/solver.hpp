#pragma once

#include "blindmix/init.hpp"

namespace blindmix {

struct SolverConfig {
    double mu = 0.0;         // incoherence bound; 0 means 6 sqrt(log L)
    double rho = 0.0;        // penalty weight; 0 means d^2 (1 + 2 sigma^2)
    std::vector<double> d;   // per-source scale estimates (from init)
    double d_total = 0.0;
    double step_init = 0.0;  // 0 means 1 / (K + N)
    bool backtracking = true;
    double shrink = 0.5;     // stepsize factor while the objective increases
    int max_iters = 500;
    double stop_tol = 1e-6;  // on ||A(H(z_new) - H(z))|| / ||y||
    bool record_rel_error = true;

    void validate() const;
};

// Fills mu/rho/step_init defaults and copies the scale estimates.
SolverConfig default_config(const ProblemInstance& inst, const InitOutput& init);

struct TraceRow {
    int iter = 0;
    double objective = 0.0;  // F + G
    double loss_f = 0.0;
    double loss_g = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    double rel_error = 0.0;
    double elapsed_ms = 0.0;
};

struct SolverTrace {
    std::vector<TraceRow> rows;
    bool converged = false;  // stopping rule hit before the iteration cap
    int iters = 0;

    // Writes `iter,objective,loss_f,loss_g,grad_norm,step,rel_error,elapsed_ms`.
    // Timing is canonicalized to 0 unless with_timings is set (measured clocks
    // are not reproducible byte for byte).
    void write_csv(const std::string& path, bool with_timings, const std::string& provenance) const;
};

// Penalty pieces: G0(z) = max(z-1, 0)^2.
double g0(double z);
double g0_prime(double z);

// F(h,x) = ||A(H(h,x)) - y||^2 and the penalty
// G = rho sum_i [G0(||h_i||^2/2d_i) + G0(||x_i||^2/2d_i)
//                + sum_l G0(L |b_l^* h_i|^2 / (8 d_i mu^2))].
double loss_F(const BlockPair& z, const ProblemInstance& inst);
double loss_G(const BlockPair& z, const SolverConfig& cfg, int L);

// Wirtinger gradient of F + G, same block layout as z. The spectral penalty
// term is one FFT, a masked multiply and one inverse FFT per source.
BlockPair gradient(const BlockPair& z, const ProblemInstance& inst, const SolverConfig& cfg);

// Gradient descent from the init point: z <- z - eta * grad, with eta reset
// to step_init each iteration and halved while the objective increases.
// Stops when ||A(H(z_new) - H(z))|| < stop_tol ||y|| or at max_iters.
std::pair<BlockPair, SolverTrace> descend(const InitOutput& start, const ProblemInstance& inst,
                                          const SolverConfig& cfg);

}  // namespace blindmix
