#include "blindmix/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "blindmix/rng.hpp"

namespace blindmix {

ProblemInstance generate_instance(MeasurementEnsemble ens, const std::vector<double>& scale_profile,
                                  double sigma, uint64_t seed) {
    if (static_cast<int>(scale_profile.size()) != ens.s)
        throw DimensionError("generate_instance: scale profile must have one entry per source");
    for (double v : scale_profile)
        if (!(v > 0.0)) throw DimensionError("generate_instance: scale profile entries must be positive");
    if (sigma < 0.0) throw DimensionError("generate_instance: sigma must be nonnegative");

    ProblemInstance inst;
    inst.ens = std::move(ens);
    inst.sigma = sigma;
    inst.seed = seed;
    inst.scale_profile = scale_profile;
    inst.truth = BlockPair(inst.ens.s, inst.ens.K, inst.ens.N);
    inst.d0 = scale_profile;

    for (int i = 0; i < inst.ens.s; ++i) {
        rng::Stream sh(rng::derive(seed, 1, static_cast<uint64_t>(i)));
        rng::Stream sx(rng::derive(seed, 2, static_cast<uint64_t>(i)));
        auto h = inst.truth.h_block(i);
        auto x = inst.truth.x_block(i);
        sh.fill_cgaussian(h);
        sx.fill_cgaussian(x);
        // Balance: ||h_i0|| = ||x_i0|| = sqrt(d_i0).
        const double target = std::sqrt(scale_profile[i]);
        const double nh = norm(h);
        const double nx = norm(x);
        if (nh == 0.0 || nx == 0.0) throw NumericalError("generate_instance: degenerate zero draw");
        for (cplx& v : h) v *= target / nh;
        for (cplx& v : x) v *= target / nx;
    }

    double acc = 0.0;
    for (double v : inst.d0) acc += v * v;
    inst.d0_total = std::sqrt(acc);
    const auto [lo, hi] = std::minmax_element(inst.d0.begin(), inst.d0.end());
    inst.kappa = *hi / *lo;

    inst.e.assign(static_cast<size_t>(inst.ens.L), cplx{0.0, 0.0});
    if (sigma > 0.0) {
        // Entrywise CN(0, sigma^2 d_0^2 / L), so E||e||^2 = sigma^2 d_0^2.
        rng::Stream se(rng::derive(seed, 3));
        const double scale = sigma * inst.d0_total / std::sqrt(static_cast<double>(inst.ens.L));
        for (cplx& v : inst.e) v = scale * se.next_cgaussian();
    }
    inst.y = measure(inst.ens, inst.truth, inst.e);
    inst.mu_h = incoherence_mu_h(inst.ens, inst.truth);
    return inst;
}

cvec measure(const MeasurementEnsemble& ens, const BlockPair& z, std::span<const cplx> e) {
    if (static_cast<int>(e.size()) != ens.L) throw DimensionError("measure: noise must have length L");
    cvec y = forward_pair(ens, z);
    for (int l = 0; l < ens.L; ++l) y[l] += e[l];
    return y;
}

namespace {

// ||h x^* - h0 x0^*||_F^2 via Gram quantities; tiny negatives from rounding
// are clamped before the caller takes a square root.
double rank1_diff_sq(std::span<const cplx> h, std::span<const cplx> x,
                     std::span<const cplx> h0, std::span<const cplx> x0) {
    const double a = norm2(h) * norm2(x);
    const double b = norm2(h0) * norm2(x0);
    const cplx cross = dot(h0, h) * dot(x, x0);  // <h0,h><x,x0> = tr(x0 h0^H h x^*)
    return std::max(0.0, a + b - 2.0 * cross.real());
}

}  // namespace

double relative_error(const BlockPair& z, const ProblemInstance& inst) {
    if (z.s != inst.ens.s || z.K != inst.ens.K || z.N != inst.ens.N)
        throw DimensionError("relative_error: block pair does not match instance");
    double acc = 0.0;
    for (int i = 0; i < z.s; ++i)
        acc += rank1_diff_sq(z.h_block(i), z.x_block(i), inst.truth.h_block(i), inst.truth.x_block(i));
    return std::sqrt(acc) / inst.d0_total;
}

double per_block_error(const BlockPair& z, const ProblemInstance& inst, int i) {
    if (i < 0 || i >= inst.ens.s) throw DimensionError("per_block_error: source index out of range");
    return std::sqrt(rank1_diff_sq(z.h_block(i), z.x_block(i), inst.truth.h_block(i),
                                   inst.truth.x_block(i))) /
           inst.d0[i];
}

double snr_db(const ProblemInstance& inst) {
    const double ne = norm(inst.e);
    if (ne == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(norm(inst.y) / ne);
}

double incoherence_mu_h(const MeasurementEnsemble& ens, const BlockPair& z) {
    if (z.s != ens.s || z.K != ens.K) throw DimensionError("incoherence_mu_h: block mismatch");
    double mu2 = 0.0;
    for (int i = 0; i < z.s; ++i) {
        const cvec bh = apply_B(z.h_block(i), ens.L);
        double peak = 0.0;
        for (const cplx& v : bh) peak = std::max(peak, std::norm(v));
        mu2 = std::max(mu2, ens.L * peak / norm2(z.h_block(i)));
    }
    return std::sqrt(mu2);
}

double incoherence_mu_h(const ProblemInstance& inst) { return incoherence_mu_h(inst.ens, inst.truth); }

void save_instance_spec(const ProblemInstance& inst, const std::string& path) {
    nlohmann::json j;
    j["L"] = inst.ens.L;
    j["K"] = inst.ens.K;
    j["N"] = inst.ens.N;
    j["s"] = inst.ens.s;
    j["kind"] = inst.ens.kind == EnsembleKind::Gaussian ? "gaussian" : "hadamard";
    j["ensemble_seed"] = inst.ens.seed;
    j["instance_seed"] = inst.seed;
    j["sigma"] = inst.sigma;
    j["scale_profile"] = inst.scale_profile;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_instance_spec: cannot open " + path);
    out << j.dump(2) << "\n";
}

ProblemInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_instance: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    const EnsembleKind kind =
        j.at("kind").get<std::string>() == "hadamard" ? EnsembleKind::HadamardType : EnsembleKind::Gaussian;
    MeasurementEnsemble ens = make_ensemble(j.at("L"), j.at("K"), j.at("N"), j.at("s"), kind,
                                            j.at("ensemble_seed").get<uint64_t>());
    return generate_instance(std::move(ens), j.at("scale_profile").get<std::vector<double>>(),
                             j.at("sigma").get<double>(), j.at("instance_seed").get<uint64_t>());
}

}  // namespace blindmix
