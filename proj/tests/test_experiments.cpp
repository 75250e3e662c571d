#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blindmix/experiments.hpp"

using namespace blindmix;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSpec tiny_phase_spec() {
    ExperimentSpec spec;
    spec.experiment = "phase-transition";
    spec.K = 4;
    spec.N = 4;
    spec.s = {1};
    spec.L = {40};
    spec.trials = 5;
    spec.seed = 71;
    return spec;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("json config parsing: full document, scalars as singletons, errors") {
    const std::string text = R"({
        "experiment": "noise-sweep",
        "ensemble": "hadamard",
        "K": 6, "N": 8,
        "L": 128, "s": 2,
        "trials": 7,
        "sigmas": [0.01, 0.1],
        "seed": 42,
        "out": "x.csv",
        "solver": {"step_init": 0.5, "max_iters": 123, "backtracking": false}
    })";
    const auto spec = spec_from_json_text(text);
    CHECK(spec.experiment == "noise-sweep");
    CHECK(spec.kind == EnsembleKind::HadamardType);
    CHECK(spec.K == 6);
    CHECK(spec.N == 8);
    CHECK(spec.L == std::vector<int>{128});
    CHECK(spec.s == std::vector<int>{2});
    CHECK(spec.trials == 7);
    CHECK(spec.sigmas == std::vector<double>{0.01, 0.1});
    CHECK(spec.seed == 42);
    CHECK(spec.out == "x.csv");
    CHECK(spec.solver.step_init == 0.5);
    CHECK(spec.solver.max_iters == 123);
    CHECK_FALSE(spec.solver.backtracking);

    CHECK_THROWS_AS((void)spec_from_json_text("{not json"), DimensionError);
    CHECK_THROWS_AS((void)spec_from_json_text(R"({"K": "ten"})"), DimensionError);
    CHECK_THROWS_AS((void)spec_from_json_text(R"({"ensemble": "fourier"})"), DimensionError);
    CHECK_THROWS((void)load_spec("missing_config_file.json"));

    ExperimentSpec bad = tiny_phase_spec();
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    bad = tiny_phase_spec();
    bad.s = {};
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    bad = tiny_phase_spec();
    bad.epsilon = 0.5;
    CHECK_THROWS_AS(bad.validate(), DimensionError);
}

TEST_CASE("provenance header carries version, spec hash and seed") {
    const ExperimentSpec spec = tiny_phase_spec();
    const std::string head = provenance_header(spec);
    CHECK(head.rfind("# blindmix 0.1.0\n", 0) == 0);
    CHECK(head.find("seed=71") != std::string::npos);
    CHECK(head.find("timings=suppressed") != std::string::npos);

    ExperimentSpec other = spec;
    other.seed = 72;
    CHECK(provenance_header(other) != head);
    CHECK(fnv1a64(spec.canonical()) != fnv1a64(other.canonical()));
}

TEST_CASE("phase transition: recovery above the boundary, none below the count limit") {
    // A cell with fewer observations than degrees of freedom cannot recover.
    ExperimentSpec under = tiny_phase_spec();
    under.L = {4};  // s(K+N)/2
    const auto cells_u = run_phase_transition(under);
    REQUIRE(cells_u.size() == 1);
    CHECK(cells_u[0].successes == 0);

    // Generous oversampling succeeds essentially always.
    ExperimentSpec over = tiny_phase_spec();
    over.L = {40};  // 5 s(K+N)
    const auto cells_o = run_phase_transition(over);
    CHECK(cells_o[0].successes >= 4);
    CHECK(cells_o[0].median_rel_error <= 1e-3);
    CHECK(cells_o[0].trials == 5);
}

TEST_CASE("phase transition success is essentially monotone in L") {
    ExperimentSpec spec = tiny_phase_spec();
    spec.L = {8, 16, 24, 32, 40};
    spec.trials = 6;
    const auto cells = run_phase_transition(spec);
    REQUIRE(cells.size() == 5);
    int inversions = 0;
    for (size_t j = 1; j < cells.size(); ++j)
        if (cells[j].successes < cells[j - 1].successes) ++inversions;
    CHECK(inversions <= 1);
    CHECK(cells.back().successes >= 5);
}

TEST_CASE("default L grid brackets the transition region") {
    ExperimentSpec spec = tiny_phase_spec();
    spec.L.clear();
    spec.trials = 1;
    const auto cells = run_phase_transition(spec);
    REQUIRE(cells.size() == 15);  // c in 0.5..4 step 0.25
    CHECK(cells.front().L == 4);
    CHECK(cells.back().L == 32);
}

TEST_CASE("noise sweep rows: per trial plus a median marker row") {
    ExperimentSpec spec;
    spec.experiment = "noise-sweep";
    spec.K = 4;
    spec.N = 4;
    spec.s = {1};
    spec.L = {48};
    spec.trials = 5;
    spec.sigmas = {0.1, 0.01};
    spec.seed = 11;
    const auto rows = run_noise_sweep(spec);
    REQUIRE(rows.size() == 12);  // (5 trials + 1 median) per sigma

    for (int block = 0; block < 2; ++block) {
        std::vector<double> errs;
        for (int t = 0; t < 5; ++t) {
            const auto& r = rows[block * 6 + t];
            CHECK(r.trial == t);
            CHECK(r.sigma == spec.sigmas[block]);
            CHECK(r.rel_error > 0.0);
            errs.push_back(r.rel_error);
        }
        const auto& med = rows[block * 6 + 5];
        CHECK(med.trial == -1);
        std::sort(errs.begin(), errs.end());
        CHECK(med.rel_error == errs[2]);
    }
    // Less noise, smaller median error.
    CHECK(rows[11].rel_error < rows[5].rel_error);

    ExperimentSpec missing = spec;
    missing.sigmas.clear();
    CHECK_THROWS_AS((void)run_noise_sweep(missing), DimensionError);
}

TEST_CASE("kappa study: traces padded to full length, horizon grows with kappa") {
    ExperimentSpec spec;
    spec.experiment = "kappa-study";
    spec.K = 4;
    spec.N = 4;
    spec.L = {96};
    spec.trials = 5;
    spec.kappas = {1.0, 5.0};
    spec.seed = 21;
    const auto results = run_kappa_study(spec);
    REQUIRE(results.size() == 2);
    for (const auto& kr : results) {
        REQUIRE(!kr.median_delta_by_iter.empty());
        // Padded medians: the trace starts near init error and ends below it.
        CHECK(kr.median_delta_by_iter.back() < kr.median_delta_by_iter.front());
        CHECK(kr.median_delta_by_iter.back() <= 1e-3);
    }
    CHECK(results[1].median_iters_to_threshold > results[0].median_iters_to_threshold);
}

TEST_CASE("runner outputs are byte-stable across repeated runs") {
    ExperimentSpec spec = tiny_phase_spec();
    spec.trials = 3;
    const std::string p1 = "det_a.csv", p2 = "det_b.csv";
    write_phase_csv(p1, spec, run_phase_transition(spec));
    write_phase_csv(p2, spec, run_phase_transition(spec));
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("csv schemas match their documented headers") {
    ExperimentSpec spec = tiny_phase_spec();
    spec.trials = 2;
    spec.L = {24};
    const std::string path = "schema_check.csv";

    write_phase_csv(path, spec, run_phase_transition(spec));
    {
        std::istringstream in(slurp(path));
        std::string line;
        std::getline(in, line);
        CHECK(line == "# blindmix 0.1.0");
        std::getline(in, line);
        CHECK(line.rfind("# spec_hash=", 0) == 0);
        std::getline(in, line);
        CHECK(line == "L,s,K,N,trials,successes,median_rel_error,median_iters,median_ms");
        std::getline(in, line);
        CHECK(line.rfind("24,1,4,4,2,", 0) == 0);
        // Canonical timing keeps the file reproducible.
        CHECK(line.substr(line.rfind(',') + 1) == "0.000");
    }

    ExperimentSpec nspec = spec;
    nspec.experiment = "noise-sweep";
    nspec.L = {32};
    nspec.sigmas = {0.05};
    write_noise_csv(path, nspec, run_noise_sweep(nspec));
    {
        std::istringstream in(slurp(path));
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        std::getline(in, line);
        CHECK(line == "sigma,snr_db,trial,rel_error,iters");
    }

    ExperimentSpec kspec = spec;
    kspec.experiment = "kappa-study";
    kspec.L = {64};
    kspec.kappas = {1.0};
    write_kappa_csv(path, kspec, run_kappa_study(kspec));
    {
        std::istringstream in(slurp(path));
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        std::getline(in, line);
        CHECK(line == "kappa,iter,median_rel_error");
        std::getline(in, line);
        CHECK(line.rfind("1,0,", 0) == 0);
    }

    ExperimentSpec pspec = spec;
    pspec.experiment = "probes";
    pspec.L = {64};
    pspec.n_samples = 3;
    pspec.probes = {"local_rip", "robustness"};
    write_probe_outputs(path, pspec, run_probes(pspec));
    {
        std::istringstream in(slurp(path));
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        std::getline(in, line);
        CHECK(line == "probe,sample,value,lhs,rhs,pass");
        std::getline(in, line);
        CHECK(line.rfind("local_rip,0,", 0) == 0);
        const std::string text = slurp(path + ".txt");
        CHECK(text.find("local_rip summary:") != std::string::npos);
        CHECK(text.find("robustness summary:") != std::string::npos);
        std::remove((path + ".txt").c_str());
    }
    std::remove(path.c_str());
}

TEST_CASE("solver faults inside a grid are counted as failures, not aborts") {
    ExperimentSpec spec = tiny_phase_spec();
    spec.trials = 3;
    spec.L = {16};
    spec.solver.backtracking = false;
    spec.solver.step_init = 1e12;  // guaranteed blow-up, every trial
    const auto cells = run_phase_transition(spec);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].successes == 0);
    CHECK(std::isinf(cells[0].median_rel_error));
}

}  // TEST_SUITE
