#include "blindmix/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blindmix/rng.hpp"

namespace blindmix {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

uint64_t dbits(double v) {
    uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

}  // namespace

void ExperimentSpec::validate() const {
    if (K < 1 || N < 1) throw DimensionError("spec: K and N must be positive");
    if (trials < 1) throw DimensionError("spec: trials must be at least 1");
    if (s.empty()) throw DimensionError("spec: source grid is empty");
    for (int v : s)
        if (v < 1) throw DimensionError("spec: source counts must be positive");
    for (int v : L)
        if (v < 1) throw DimensionError("spec: L values must be positive");
    if (sigma < 0.0) throw DimensionError("spec: sigma must be nonnegative");
    for (double v : sigmas)
        if (v < 0.0) throw DimensionError("spec: sigma values must be nonnegative");
    for (double v : kappas)
        if (v < 1.0) throw DimensionError("spec: kappa values must be at least 1");
    if (!(success_threshold > 0.0)) throw DimensionError("spec: success threshold must be positive");
    if (n_samples < 1) throw DimensionError("spec: n_samples must be at least 1");
    if (!(epsilon > 0.0 && epsilon <= 1.0 / 15.0))
        throw DimensionError("spec: epsilon must lie in (0, 1/15]");
    if (solver.max_iters < 1) throw DimensionError("spec: max_iters must be at least 1");
    if (!(solver.stop_tol > 0.0)) throw DimensionError("spec: stop_tol must be positive");
}

std::string ExperimentSpec::canonical() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["ensemble"] = kind == EnsembleKind::Gaussian ? "gaussian" : "hadamard";
    j["K"] = K;
    j["N"] = N;
    j["L"] = L;
    j["s"] = s;
    j["trials"] = trials;
    j["sigma"] = sigma;
    j["sigmas"] = sigmas;
    j["kappas"] = kappas;
    j["success_threshold"] = success_threshold;
    j["seed"] = seed;
    j["timings"] = timings;
    j["n_samples"] = n_samples;
    j["epsilon"] = epsilon;
    j["probes"] = probes;
    j["solver"] = {{"mu", solver.mu},           {"rho", solver.rho},
                   {"step_init", solver.step_init}, {"max_iters", solver.max_iters},
                   {"stop_tol", solver.stop_tol},   {"backtracking", solver.backtracking}};
    return j.dump();
}

ExperimentSpec spec_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DimensionError(std::string("config: ") + e.what());
    }
    ExperimentSpec spec;
    try {
        if (j.contains("experiment")) spec.experiment = j["experiment"].get<std::string>();
        if (j.contains("ensemble")) {
            const std::string k = j["ensemble"].get<std::string>();
            if (k == "gaussian")
                spec.kind = EnsembleKind::Gaussian;
            else if (k == "hadamard")
                spec.kind = EnsembleKind::HadamardType;
            else
                throw DimensionError("config: ensemble must be gaussian or hadamard");
        }
        if (j.contains("K")) spec.K = j["K"].get<int>();
        if (j.contains("N")) spec.N = j["N"].get<int>();
        if (j.contains("L")) {
            if (j["L"].is_array())
                spec.L = j["L"].get<std::vector<int>>();
            else
                spec.L = {j["L"].get<int>()};
        }
        if (j.contains("s")) {
            if (j["s"].is_array())
                spec.s = j["s"].get<std::vector<int>>();
            else
                spec.s = {j["s"].get<int>()};
        }
        if (j.contains("trials")) spec.trials = j["trials"].get<int>();
        if (j.contains("sigma")) spec.sigma = j["sigma"].get<double>();
        if (j.contains("sigmas")) spec.sigmas = j["sigmas"].get<std::vector<double>>();
        if (j.contains("kappas")) spec.kappas = j["kappas"].get<std::vector<double>>();
        if (j.contains("success_threshold")) spec.success_threshold = j["success_threshold"].get<double>();
        if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
        if (j.contains("out")) spec.out = j["out"].get<std::string>();
        if (j.contains("timings")) spec.timings = j["timings"].get<bool>();
        if (j.contains("n_samples")) spec.n_samples = j["n_samples"].get<int>();
        if (j.contains("epsilon")) spec.epsilon = j["epsilon"].get<double>();
        if (j.contains("probes")) spec.probes = j["probes"].get<std::vector<std::string>>();
        if (j.contains("solver")) {
            const auto& sj = j["solver"];
            if (sj.contains("mu")) spec.solver.mu = sj["mu"].get<double>();
            if (sj.contains("rho")) spec.solver.rho = sj["rho"].get<double>();
            if (sj.contains("step_init")) spec.solver.step_init = sj["step_init"].get<double>();
            if (sj.contains("max_iters")) spec.solver.max_iters = sj["max_iters"].get<int>();
            if (sj.contains("stop_tol")) spec.solver.stop_tol = sj["stop_tol"].get<double>();
            if (sj.contains("backtracking")) spec.solver.backtracking = sj["backtracking"].get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DimensionError(std::string("config: ") + e.what());
    }
    return spec;
}

ExperimentSpec load_spec(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return spec_from_json_text(ss.str());
}

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string provenance_header(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "# blindmix " << kVersion << "\n";
    out << "# spec_hash=" << std::hex << fnv1a64(spec.canonical()) << std::dec << " seed=" << spec.seed
        << " timings=" << (spec.timings ? "measured" : "suppressed") << "\n";
    return out.str();
}

TrialResult run_trial(const ExperimentSpec& spec, int L, int s, const std::vector<double>& profile,
                      double sigma, uint64_t trial_seed, bool keep_trace) {
    TrialResult res;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        MeasurementEnsemble ens =
            make_ensemble(L, spec.K, spec.N, s, spec.kind, rng::derive(trial_seed, 10));
        ProblemInstance inst =
            generate_instance(std::move(ens), profile, sigma, rng::derive(trial_seed, 11));

        const double mu = spec.solver.mu > 0.0
                              ? spec.solver.mu
                              : 6.0 * std::sqrt(std::log(static_cast<double>(L)));
        const InitOutput init = spectral_init(inst, mu);
        SolverConfig cfg = default_config(inst, init);
        cfg.mu = mu;
        if (spec.solver.rho > 0.0) cfg.rho = spec.solver.rho;
        // Experiment trials line-search down from 1 unless overridden. The
        // library default 1/(K+N) is a safe constant stepsize, but within the
        // 500-iteration budget it cannot reach the 1e-3 success threshold at
        // moderate oversampling; backtracking from 1 settles near the largest
        // stable step and converges in tens of iterations instead.
        cfg.step_init = spec.solver.step_init > 0.0 ? spec.solver.step_init : 1.0;
        cfg.max_iters = spec.solver.max_iters;
        cfg.stop_tol = spec.solver.stop_tol;
        cfg.backtracking = spec.solver.backtracking;

        auto [zfinal, trace] = descend(init, inst, cfg);
        res.rel_error = relative_error(zfinal, inst);
        res.iters = trace.iters;
        res.success = res.rel_error <= spec.success_threshold;
        res.snr = snr_db(inst);
        res.iters_to_threshold = cfg.max_iters + 1;
        for (const TraceRow& row : trace.rows) {
            if (row.rel_error <= spec.success_threshold) {
                res.iters_to_threshold = row.iter;
                break;
            }
        }
        if (keep_trace) {
            res.delta_by_iter.reserve(trace.rows.size());
            for (const TraceRow& row : trace.rows) res.delta_by_iter.push_back(row.rel_error);
        }
    } catch (const std::exception& e) {
        res.solver_error = true;
        res.success = false;
        res.rel_error = std::numeric_limits<double>::infinity();
        res.iters = spec.solver.max_iters;
        res.iters_to_threshold = spec.solver.max_iters + 1;
#pragma omp critical(blindmix_trial_log)
        std::cerr << "trial failed (L=" << L << ", s=" << s << ", sigma=" << sigma << "): " << e.what()
                  << "\n";
    }
    res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

std::vector<int> default_L_grid(int s, int K, int N) {
    std::vector<int> grid;
    for (double c = 0.5; c <= 4.0 + 1e-9; c += 0.25)
        grid.push_back(static_cast<int>(std::lround(c * s * (K + N))));
    return grid;
}

std::vector<TrialResult> run_cell(const ExperimentSpec& spec, int L, int s,
                                  const std::vector<double>& profile, double sigma, uint64_t cell_key,
                                  bool keep_trace) {
    std::vector<TrialResult> trials(static_cast<size_t>(spec.trials));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < spec.trials; ++t)
        trials[t] = run_trial(spec, L, s, profile, sigma,
                              rng::derive(spec.seed, cell_key, static_cast<uint64_t>(t)), keep_trace);
    return trials;
}

}  // namespace

std::vector<CellResult> run_phase_transition(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<CellResult> cells;
    for (int s : spec.s) {
        const std::vector<int> Ls = spec.L.empty() ? default_L_grid(s, spec.K, spec.N) : spec.L;
        const std::vector<double> profile(static_cast<size_t>(s), 1.0);
        for (int L : Ls) {
            const uint64_t cell_key = rng::derive(0x9e1ce, static_cast<uint64_t>(L), static_cast<uint64_t>(s));
            const auto trials = run_cell(spec, L, s, profile, 0.0, cell_key, false);
            CellResult cell;
            cell.L = L;
            cell.s = s;
            cell.K = spec.K;
            cell.N = spec.N;
            cell.trials = spec.trials;
            std::vector<double> errs, iters, ms;
            for (const TrialResult& tr : trials) {
                cell.successes += tr.success ? 1 : 0;
                errs.push_back(tr.rel_error);
                iters.push_back(static_cast<double>(tr.iters));
                ms.push_back(tr.ms);
            }
            cell.median_rel_error = median(errs);
            cell.median_iters = median(iters);
            cell.median_ms = median(ms);
            cells.push_back(cell);
        }
    }
    return cells;
}

std::vector<NoiseTrialRow> run_noise_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.sigmas.empty()) throw DimensionError("noise sweep: sigma list is empty");
    if (spec.L.empty()) throw DimensionError("noise sweep: L is required");
    const int L = spec.L.front();
    const int s = spec.s.front();
    const std::vector<double> profile(static_cast<size_t>(s), 1.0);

    std::vector<NoiseTrialRow> rows;
    for (double sigma : spec.sigmas) {
        const uint64_t cell_key = rng::derive(0x5196a, dbits(sigma));
        const auto trials = run_cell(spec, L, s, profile, sigma, cell_key, false);
        std::vector<double> errs, iters, snrs;
        for (int t = 0; t < spec.trials; ++t) {
            const TrialResult& tr = trials[t];
            rows.push_back({sigma, tr.snr, t, tr.rel_error, static_cast<double>(tr.iters)});
            errs.push_back(tr.rel_error);
            iters.push_back(static_cast<double>(tr.iters));
            snrs.push_back(tr.snr);
        }
        rows.push_back({sigma, median(snrs), -1, median(errs), median(iters)});
    }
    return rows;
}

std::vector<KappaResult> run_kappa_study(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.L.empty()) throw DimensionError("kappa study: L is required");
    const int L = spec.L.front();
    // Two sources with scales (1, kappa); stepsize 1 unless overridden.
    ExperimentSpec local = spec;
    if (local.solver.step_init <= 0.0) local.solver.step_init = 1.0;

    std::vector<KappaResult> results;
    for (double kappa : spec.kappas) {
        const std::vector<double> profile = {1.0, kappa};
        const uint64_t cell_key = rng::derive(0xca44a, dbits(kappa));
        const auto trials = run_cell(local, L, 2, profile, 0.0, cell_key, true);

        KappaResult kr;
        kr.kappa = kappa;
        size_t longest = 0;
        std::vector<double> reach;
        for (const TrialResult& tr : trials) {
            longest = std::max(longest, tr.delta_by_iter.size());
            reach.push_back(static_cast<double>(tr.iters_to_threshold));
        }
        kr.median_iters_to_threshold = median(reach);
        kr.median_delta_by_iter.resize(longest);
        for (size_t it = 0; it < longest; ++it) {
            std::vector<double> vals;
            vals.reserve(trials.size());
            for (const TrialResult& tr : trials) {
                if (tr.delta_by_iter.empty()) continue;
                // Shorter traces hold their final value.
                vals.push_back(it < tr.delta_by_iter.size() ? tr.delta_by_iter[it]
                                                            : tr.delta_by_iter.back());
            }
            kr.median_delta_by_iter[it] = median(vals);
        }
        results.push_back(std::move(kr));
    }
    return results;
}

std::vector<ProbeReport> run_probes(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.L.empty()) throw DimensionError("probes: L is required");
    const int L = spec.L.front();
    const int s = spec.s.front();
    const std::vector<double> profile(static_cast<size_t>(s), 1.0);

    MeasurementEnsemble ens = make_ensemble(L, spec.K, spec.N, s, spec.kind, rng::derive(spec.seed, 10));
    ProblemInstance inst = generate_instance(std::move(ens), profile, spec.sigma, rng::derive(spec.seed, 11));
    NeighborhoodSpec nspec;
    nspec.epsilon = spec.epsilon;
    nspec.mu = spec.solver.mu > 0.0
                   ? spec.solver.mu
                   : std::max(inst.mu_h, 6.0 * std::sqrt(std::log(static_cast<double>(L))));

    std::vector<ProbeReport> reports;
    for (const std::string& name : spec.probes) {
        if (name == "local_rip")
            reports.push_back(probe_local_rip(inst, nspec, spec.n_samples, rng::derive(spec.seed, 21)));
        else if (name == "regularity")
            reports.push_back(probe_regularity(inst, nspec, spec.n_samples, rng::derive(spec.seed, 22)));
        else if (name == "robustness")
            reports.push_back(probe_robustness(inst, nspec));
        else if (name == "operator_norm")
            reports.push_back(probe_operator_norm(inst));
        else
            throw DimensionError("probes: unknown probe " + name);
    }
    return reports;
}

void write_phase_csv(const std::string& path, const ExperimentSpec& spec,
                     const std::vector<CellResult>& cells) {
    auto out = open_out(path);
    out << provenance_header(spec);
    out << "L,s,K,N,trials,successes,median_rel_error,median_iters,median_ms\n";
    for (const CellResult& c : cells)
        out << fmt("%d,%d,%d,%d,%d,%d,%.12g,%.12g,%.3f\n", c.L, c.s, c.K, c.N, c.trials, c.successes,
                   c.median_rel_error, c.median_iters, spec.timings ? c.median_ms : 0.0);
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_noise_csv(const std::string& path, const ExperimentSpec& spec,
                     const std::vector<NoiseTrialRow>& rows) {
    auto out = open_out(path);
    out << provenance_header(spec);
    out << "sigma,snr_db,trial,rel_error,iters\n";
    for (const NoiseTrialRow& r : rows)
        out << fmt("%.12g,%.12g,%d,%.12g,%.12g\n", r.sigma, r.snr, r.trial, r.rel_error, r.iters);
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_kappa_csv(const std::string& path, const ExperimentSpec& spec,
                     const std::vector<KappaResult>& results) {
    auto out = open_out(path);
    out << provenance_header(spec);
    out << "kappa,iter,median_rel_error\n";
    for (const KappaResult& kr : results)
        for (size_t it = 0; it < kr.median_delta_by_iter.size(); ++it)
            out << fmt("%.12g,%zu,%.12g\n", kr.kappa, it, kr.median_delta_by_iter[it]);
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_probe_outputs(const std::string& path, const ExperimentSpec& spec,
                         const std::vector<ProbeReport>& reports) {
    auto csv = open_out(path);
    csv << provenance_header(spec);
    csv << "probe,sample,value,lhs,rhs,pass\n";
    for (const ProbeReport& rep : reports)
        for (const ProbeSample& s : rep.samples)
            csv << fmt("%s,%d,%.12g,%.12g,%.12g,%d\n", rep.name.c_str(), s.index, s.value, s.lhs,
                       s.rhs, s.pass ? 1 : 0);
    if (!csv) throw std::runtime_error("write failed for " + path);

    auto txt = open_out(path + ".txt");
    txt << provenance_header(spec);
    for (const ProbeReport& rep : reports) {
        for (const ProbeSample& s : rep.samples)
            txt << fmt("%s sample %d: value=%.12g lhs=%.12g rhs=%.12g %s\n", rep.name.c_str(), s.index,
                       s.value, s.lhs, s.rhs, s.pass ? "pass" : "FAIL");
        txt << fmt("%s summary: samples=%zu violations=%d min=%.12g max=%.12g mean=%.12g %s\n",
                   rep.name.c_str(), rep.samples.size(), rep.violations, rep.min_value, rep.max_value,
                   rep.mean_value, rep.pass ? "pass" : "FAIL");
        txt << "  " << rep.detail << "\n";
    }
    if (!txt) throw std::runtime_error("write failed for " + path + ".txt");
}

}  // namespace blindmix
