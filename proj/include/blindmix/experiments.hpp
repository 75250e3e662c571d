#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "blindmix/probes.hpp"

namespace blindmix {

inline constexpr const char* kVersion = "0.1.0";

struct SolverOverrides {
    double mu = 0.0;        // 0 keeps the 6 sqrt(log L) default
    double rho = 0.0;       // 0 keeps the d^2 (1 + 2 sigma^2) default
    double step_init = 0.0; // 0 keeps 1/(K+N)
    int max_iters = 500;
    double stop_tol = 1e-6;
    bool backtracking = true;
};

struct ExperimentSpec {
    std::string experiment;  // phase-transition | noise-sweep | kappa-study | probes | solve
    EnsembleKind kind = EnsembleKind::Gaussian;
    int K = 10, N = 10;
    std::vector<int> L;          // empty: phase-transition default grid round(c s (K+N))
    std::vector<int> s = {2};
    int trials = 25;
    double sigma = 0.0;          // single-sigma experiments
    std::vector<double> sigmas;  // noise sweep
    std::vector<double> kappas = {1.0, 2.0, 5.0};
    double success_threshold = 1e-3;
    uint64_t seed = 1;
    std::string out;
    bool timings = false;        // measured wall-clock breaks byte reproducibility
    SolverOverrides solver;
    int n_samples = 100;         // probes
    double epsilon = 1.0 / 15.0;
    std::vector<std::string> probes = {"local_rip", "regularity", "robustness", "operator_norm"};

    void validate() const;
    std::string canonical() const;  // stable serialization, hashed into output headers
};

ExperimentSpec load_spec(const std::string& config_path);
ExperimentSpec spec_from_json_text(const std::string& text);

struct TrialResult {
    bool success = false;
    bool solver_error = false;
    double rel_error = 0.0;
    int iters = 0;
    double ms = 0.0;
    double snr = 0.0;
    int iters_to_threshold = 0;         // sentinel max_iters + 1 when never reached
    std::vector<double> delta_by_iter;  // kept only when requested
};

TrialResult run_trial(const ExperimentSpec& spec, int L, int s, const std::vector<double>& profile,
                      double sigma, uint64_t trial_seed, bool keep_trace);

struct CellResult {
    int L = 0, s = 0, K = 0, N = 0;
    int trials = 0, successes = 0;
    double median_rel_error = 0.0, median_iters = 0.0, median_ms = 0.0;
};

struct NoiseTrialRow {
    double sigma = 0.0, snr = 0.0;
    int trial = 0;  // -1 marks the per-sigma median row
    double rel_error = 0.0;
    double iters = 0.0;
};

struct KappaResult {
    double kappa = 0.0;
    std::vector<double> median_delta_by_iter;
    double median_iters_to_threshold = 0.0;
};

// Each runner is deterministic given (spec, seed); trials inside a cell run
// in parallel with per-trial derived seeds, cells run in order.
std::vector<CellResult> run_phase_transition(const ExperimentSpec& spec);
std::vector<NoiseTrialRow> run_noise_sweep(const ExperimentSpec& spec);
std::vector<KappaResult> run_kappa_study(const ExperimentSpec& spec);
std::vector<ProbeReport> run_probes(const ExperimentSpec& spec);

void write_phase_csv(const std::string& path, const ExperimentSpec& spec,
                     const std::vector<CellResult>& cells);
void write_noise_csv(const std::string& path, const ExperimentSpec& spec,
                     const std::vector<NoiseTrialRow>& rows);
void write_kappa_csv(const std::string& path, const ExperimentSpec& spec,
                     const std::vector<KappaResult>& results);
// CSV mirror at `path` plus the human-readable report at `path` + ".txt".
void write_probe_outputs(const std::string& path, const ExperimentSpec& spec,
                         const std::vector<ProbeReport>& reports);

// `# blindmix <version>` / `# spec_hash=... seed=... timings=...` comment block.
std::string provenance_header(const ExperimentSpec& spec);
uint64_t fnv1a64(const std::string& text);

}  // namespace blindmix
