#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "blindmix/init.hpp"
#include "blindmix/rng.hpp"
#include "blindmix/solver.hpp"
#include "oracles.hpp"

using namespace blindmix;

namespace {

cvec random_vec(int n, uint64_t key) {
    rng::Stream st(key);
    cvec v(static_cast<size_t>(n));
    st.fill_cgaussian(v);
    return v;
}

double sup_spec(const cvec& z, int L) {
    const cvec bz = apply_B(z, L);
    double peak = 0.0;
    for (const cplx& v : bz) peak = std::max(peak, std::abs(v));
    return std::sqrt(static_cast<double>(L)) * peak;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_SUITE("init") {

TEST_CASE("leading triple recovers a planted rank-1 matrix") {
    const int K = 5, N = 3;
    cvec u = random_vec(K, 1), v = random_vec(N, 2);
    const double nu = norm(u), nv = norm(v);
    for (cplx& w : u) w /= nu;
    for (cplx& w : v) w /= nv;
    cvec M(static_cast<size_t>(K) * N);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) M[static_cast<size_t>(k) * N + n] = 3.0 * u[k] * std::conj(v[n]);

    const auto t = leading_singular_triple(M, K, N);
    CHECK(t.sigma == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(std::abs(dot(t.left, u)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(dot(t.right, v)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(norm(t.left) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(t.right) == doctest::Approx(1.0).epsilon(1e-12));
    // Phase convention: largest-modulus entry of the left vector is real
    // nonnegative.
    size_t big = 0;
    for (size_t k = 1; k < t.left.size(); ++k)
        if (std::abs(t.left[k]) > std::abs(t.left[big])) big = k;
    CHECK(t.left[big].imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.left[big].real() >= 0.0);
}

TEST_CASE("degenerate spectrum still satisfies the residual contract") {
    cvec M = {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}};  // identity, K=N=2
    const auto t = leading_singular_triple(M, 2, 2, 1e-10);
    CHECK(t.sigma == doctest::Approx(1.0).epsilon(1e-9));
    cvec Mv(2, cplx{0.0, 0.0});
    for (int k = 0; k < 2; ++k)
        for (int n = 0; n < 2; ++n) Mv[k] += M[static_cast<size_t>(k) * 2 + n] * t.right[n];
    double res = 0.0;
    for (int k = 0; k < 2; ++k) res += std::norm(Mv[k] - t.sigma * t.left[k]);
    CHECK(std::sqrt(res) <= 10.0 * 1e-10 * t.sigma);
}

TEST_CASE("power iteration matches the dense SVD on a gapped matrix") {
    const int K = 8, N = 6;
    cvec u = random_vec(K, 3), v = random_vec(N, 4);
    const double nu = norm(u), nv = norm(v);
    cvec M = random_vec(K * N, 5);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n)
            M[static_cast<size_t>(k) * N + n] += 5.0 * (u[k] / nu) * std::conj(v[n] / nv);

    const auto want = oracle::dense_svd_top(M, K, N);
    REQUIRE(want.sigma1 / want.sigma2 > 1.1);
    const auto got = leading_singular_triple(M, K, N, 1e-12);
    CHECK(std::abs(got.sigma - want.sigma1) <= 1e-8 * want.sigma1);
    CHECK(1.0 - std::abs(dot(got.left, want.left)) <= 1e-12);
    CHECK(1.0 - std::abs(dot(got.right, want.right)) <= 1e-12);
}

TEST_CASE("triple error paths: zero matrix, iteration cap") {
    CHECK_THROWS_AS((void)leading_singular_triple(cvec(6, cplx{0, 0}), 3, 2), DimensionError);
    const cvec M = random_vec(20, 6);
    CHECK_THROWS_AS((void)leading_singular_triple(M, 5, 4, 1e-16, 1), ConvergenceError);
    try {
        (void)leading_singular_triple(M, 5, 4, 1e-16, 1);
    } catch (const ConvergenceError& err) {
        CHECK(err.last_estimate > 0.0);
    }
}

TEST_CASE("projection: feasible points and the square (K = L) case") {
    // Tiny point is already inside the ball.
    cvec small = {cplx{0.01, 0.0}, cplx{0.0, 0.01}};
    const cvec kept = project_mu_ball(small, 8, 1.0);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(kept[k] - small[k]) < 1e-8);

    // K = L: the range constraint is vacuous, so the projection is exactly
    // the clipped spectrum pulled back.
    const int L = 8;
    const cvec z0 = random_vec(L, 7);
    const double c = 0.8 * sup_spec(z0, L);
    cvec w = apply_B(z0, L);
    const double cap = c / std::sqrt(static_cast<double>(L));
    for (cplx& v : w)
        if (std::abs(v) > cap) v *= cap / std::abs(v);
    const cvec want = apply_B_adjoint(w, L);
    const cvec got = project_mu_ball(z0, L, c);
    for (int k = 0; k < L; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-8);
}

TEST_CASE("projection matches the cyclic-projection oracle") {
    // Pinned case, K=2, L=4, bound 2: optimum computed by cyclic Dykstra
    // over the per-row cylinders with a KKT certificate (stationarity
    // residual 6.3e-15, distance 2.73767453169).
    const cvec z0 = {cplx{3.0, 1.0}, cplx{-2.0, 2.0}};
    const cvec frozen = {cplx{1.19669372652, 0.230636120426},
                         cplx{-0.780986968542, 0.528594285921}};
    const cvec got = project_mu_ball(z0, 4, 2.0);
    double diff = 0.0, dist = 0.0;
    for (int k = 0; k < 2; ++k) {
        diff += std::norm(got[k] - frozen[k]);
        dist += std::norm(got[k] - z0[k]);
    }
    CHECK(std::sqrt(diff) <= 1e-4);
    CHECK(std::sqrt(dist) == doctest::Approx(2.73767453169).epsilon(1e-6));
    CHECK(sup_spec(got, 4) <= 2.0 + 1e-7);

    // Fresh random cases against the oracle recomputed here.
    for (uint64_t t = 0; t < 4; ++t) {
        const cvec z = random_vec(4, 100 + t);
        const double c = 0.5 * sup_spec(z, 16);
        const cvec mine = project_mu_ball(z, 16, c, 1e-11, 200000);
        const cvec orac = oracle::project_cyclic(z, 16, c, 400000, 1e-13);
        CHECK(oracle::projection_kkt_residual(z, orac, 16, c) < 1e-8);
        double d = 0.0;
        for (int k = 0; k < 4; ++k) d += std::norm(mine[k] - orac[k]);
        CHECK(std::sqrt(d) <= 1e-4);
    }
}

TEST_CASE("projection is non-expansive and idempotent") {
    const int K = 8, L = 64;
    for (uint64_t t = 0; t < 6; ++t) {
        const cvec z1 = random_vec(K, 200 + t);
        const cvec z2 = random_vec(K, 300 + t);
        const double c = 0.6 * sup_spec(z1, L);
        const cvec p1 = project_mu_ball(z1, L, c);
        const cvec p2 = project_mu_ball(z2, L, c);
        double dp = 0.0, dz = 0.0;
        for (int k = 0; k < K; ++k) {
            dp += std::norm(p1[k] - p2[k]);
            dz += std::norm(z1[k] - z2[k]);
        }
        CHECK(std::sqrt(dp) <= std::sqrt(dz) + 1e-8);

        const cvec pp = project_mu_ball(p1, L, c);
        double di = 0.0;
        for (int k = 0; k < K; ++k) di += std::norm(pp[k] - p1[k]);
        CHECK(std::sqrt(di) < 1e-6);
    }
}

TEST_CASE("projection iteration cap carries the last iterate") {
    const cvec z0 = {cplx{3.0, 1.0}, cplx{-2.0, 2.0}};
    CHECK_THROWS_AS((void)project_mu_ball(z0, 4, 2.0, 1e-15, 1), ConvergenceError);
    try {
        (void)project_mu_ball(z0, 4, 2.0, 1e-15, 1);
    } catch (const ConvergenceError& err) {
        REQUIRE(err.last_iterate.size() == 2);
        for (const cplx& v : err.last_iterate) CHECK(std::isfinite(std::abs(v)));
        // The closing clip-and-project pass pulls the iterate most of the way
        // to the box; one pass cannot be exactly feasible (the subspace
        // projection re-lifts the clipped peaks, which is why Dykstra
        // iterates), so only near-feasibility can be promised here.
        CHECK(sup_spec(err.last_iterate, 4) < sup_spec(z0, 4));
        CHECK(sup_spec(err.last_iterate, 4) <= 1.2 * 2.0);
    }
}

TEST_CASE("spectral init: output contracts on a well-posed instance") {
    auto ens = make_ensemble(256, 8, 8, 2, EnsembleKind::Gaussian, 55);
    const auto inst = generate_instance(std::move(ens), {1.0, 2.0}, 0.0, 56);
    const double mu = 6.0 * std::sqrt(std::log(256.0));
    const auto init = spectral_init(inst, mu);

    REQUIRE(init.d.size() == 2);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
        CHECK(init.d[i] > 0.0);
        acc += init.d[i] * init.d[i];
        CHECK(norm2(init.z0.x_block(i)) == doctest::Approx(init.d[i]).epsilon(1e-12));
        CHECK(norm(init.z0.h_block(i)) <= std::sqrt(init.d[i]) + 1e-6);
        CHECK(sup_spec(cvec(init.z0.h_block(i).begin(), init.z0.h_block(i).end()), 256) <=
              2.0 * std::sqrt(init.d[i]) * mu + 1e-6);
    }
    CHECK(init.d_total == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));

    // The penalty vanishes at the init point: every argument is at most 1/2
    // by construction.
    SolverConfig cfg;
    cfg.mu = mu;
    cfg.rho = inst.d0_total * inst.d0_total;
    cfg.d = init.d;
    cfg.d_total = init.d_total;
    cfg.step_init = 1.0;
    CHECK(loss_G(init.z0, cfg, 256) == 0.0);
}

TEST_CASE("spectral init lands near the truth at comfortable oversampling") {
    // At L=512 the direction estimates are already good (median error under
    // 0.3) while the scale estimates still fluctuate by several percent; the
    // tight 10-percent window needs the larger L checked below. Measured
    // in-window rates for s=2 over 1000 seeds: 73% at L=512, 91% at L=1024,
    // 99.1% at L=2048, consistent with the 1/sqrt(L) deviation scaling.
    std::vector<double> deltas;
    for (int t = 0; t < 40; ++t) {
        auto ens = make_ensemble(512, 8, 8, 2, EnsembleKind::Gaussian, 7000 + t);
        const auto inst = generate_instance(std::move(ens), {1.0, 1.0}, 0.0, 8000 + t);
        const auto init = spectral_init(inst, 6.0 * std::sqrt(std::log(512.0)));
        deltas.push_back(relative_error(init.z0, inst));
    }
    CHECK(median_of(deltas) <= 0.3);

    int scales_ok = 0;
    for (int t = 0; t < 16; ++t) {
        auto ens = make_ensemble(2048, 8, 8, 2, EnsembleKind::Gaussian, 7100 + t);
        const auto inst = generate_instance(std::move(ens), {1.0, 1.0}, 0.0, 8100 + t);
        const auto init = spectral_init(inst, 6.0 * std::sqrt(std::log(2048.0)));
        bool ok = true;
        for (int i = 0; i < 2; ++i)
            ok = ok && init.d[i] >= 0.9 * inst.d0[i] && init.d[i] <= 1.1 * inst.d0[i];
        if (ok) ++scales_ok;
    }
    CHECK(scales_ok >= 15);
}

TEST_CASE("init error improves with oversampling") {
    std::vector<double> med;
    for (const int L : {128, 256, 512}) {
        std::vector<double> deltas;
        for (int t = 0; t < 25; ++t) {
            auto ens = make_ensemble(L, 8, 8, 2, EnsembleKind::Gaussian, 9000 + t);
            const auto inst = generate_instance(std::move(ens), {1.0, 1.0}, 0.0, 9600 + t);
            const auto init = spectral_init(inst, 6.0 * std::sqrt(std::log(static_cast<double>(L))));
            deltas.push_back(relative_error(init.z0, inst));
        }
        med.push_back(median_of(deltas));
    }
    CHECK(med[1] < med[0]);
    CHECK(med[2] < med[1]);
}

TEST_CASE("all-zero observation is rejected") {
    auto ens = make_ensemble(64, 4, 4, 1, EnsembleKind::Gaussian, 77);
    auto inst = generate_instance(std::move(ens), {1.0}, 0.0, 78);
    std::fill(inst.y.begin(), inst.y.end(), cplx{0.0, 0.0});
    CHECK_THROWS_AS((void)spectral_init(inst, 5.0), DimensionError);
}

}  // TEST_SUITE
