// Microbenchmarks for the OpenMP kernels against their serial references.
// Build with -DCMAKE_BUILD_TYPE=Release; run ./bench_kernels. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "blindmix/kernels.hpp"
#include "blindmix/model.hpp"
#include "blindmix/rng.hpp"
#include "blindmix/solver.hpp"

using namespace blindmix;

namespace {

cvec random_vec(size_t n, uint64_t key) {
    rng::Stream st(key);
    cvec v(n);
    st.fill_cgaussian(v);
    return v;
}

void bm_cmatvec_serial(benchmark::State& state) {
    const int rows = static_cast<int>(state.range(0)), cols = rows / 2;
    const cvec M = random_vec(static_cast<size_t>(rows) * cols, 1);
    const cvec x = random_vec(static_cast<size_t>(cols), 2);
    cvec out(static_cast<size_t>(rows));
    for (auto _ : state) {
        serial::cmatvec(M, rows, cols, x, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_cmatvec_parallel(benchmark::State& state) {
    const int rows = static_cast<int>(state.range(0)), cols = rows / 2;
    const cvec M = random_vec(static_cast<size_t>(rows) * cols, 1);
    const cvec x = random_vec(static_cast<size_t>(cols), 2);
    cvec out(static_cast<size_t>(rows));
    for (auto _ : state) {
        cmatvec(M, rows, cols, x, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_cmatvec_adj_serial(benchmark::State& state) {
    const int rows = static_cast<int>(state.range(0)), cols = rows / 2;
    const cvec M = random_vec(static_cast<size_t>(rows) * cols, 1);
    const cvec w = random_vec(static_cast<size_t>(rows), 3);
    cvec out(static_cast<size_t>(cols));
    for (auto _ : state) {
        serial::cmatvec_adj(M, rows, cols, w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_cmatvec_adj_parallel(benchmark::State& state) {
    const int rows = static_cast<int>(state.range(0)), cols = rows / 2;
    const cvec M = random_vec(static_cast<size_t>(rows) * cols, 1);
    const cvec w = random_vec(static_cast<size_t>(rows), 3);
    cvec out(static_cast<size_t>(cols));
    for (auto _ : state) {
        cmatvec_adj(M, rows, cols, w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

ProblemInstance bench_instance(int L) {
    auto ens = make_ensemble(L, 10, 10, 4, EnsembleKind::Gaussian, 11);
    return generate_instance(std::move(ens), {1.0, 1.0, 1.0, 1.0}, 0.0, 12);
}

void bm_forward_pair_serial(benchmark::State& state) {
    const auto inst = bench_instance(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        cvec y = serial::forward_pair(inst.ens, inst.truth);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_forward_pair_parallel(benchmark::State& state) {
    const auto inst = bench_instance(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        cvec y = forward_pair(inst.ens, inst.truth);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_gradient(benchmark::State& state) {
    const auto inst = bench_instance(static_cast<int>(state.range(0)));
    InitOutput at_truth;
    at_truth.z0 = inst.truth;
    at_truth.d = inst.d0;
    at_truth.d_total = inst.d0_total;
    const SolverConfig cfg = default_config(inst, at_truth);
    for (auto _ : state) {
        BlockPair g = gradient(inst.truth, inst, cfg);
        benchmark::DoNotOptimize(g.h.data());
    }
}

}  // namespace

BENCHMARK(bm_cmatvec_serial)->Arg(256)->Arg(2048);
BENCHMARK(bm_cmatvec_parallel)->Arg(256)->Arg(2048);
BENCHMARK(bm_cmatvec_adj_serial)->Arg(256)->Arg(2048);
BENCHMARK(bm_cmatvec_adj_parallel)->Arg(256)->Arg(2048);
BENCHMARK(bm_forward_pair_serial)->Arg(256)->Arg(1024);
BENCHMARK(bm_forward_pair_parallel)->Arg(256)->Arg(1024);
BENCHMARK(bm_gradient)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
