#include "blindmix/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "blindmix/rng.hpp"

namespace blindmix {

void NeighborhoodSpec::validate(const ProblemInstance& inst) const {
    if (!(epsilon > 0.0 && epsilon <= 1.0 / 15.0))
        throw DimensionError("neighborhood spec: epsilon must lie in (0, 1/15]");
    if (!(mu >= inst.mu_h))
        throw DimensionError("neighborhood spec: mu must be at least the instance incoherence");
}

Membership in_neighborhoods(const BlockPair& z, const ProblemInstance& inst,
                            const NeighborhoodSpec& spec) {
    Membership m;
    m.in_d = m.in_mu = m.in_eps = true;
    const double rootL = std::sqrt(static_cast<double>(inst.ens.L));
    for (int i = 0; i < z.s; ++i) {
        const double cap = 2.0 * std::sqrt(inst.d0[i]);
        if (norm(z.h_block(i)) > cap || norm(z.x_block(i)) > cap) m.in_d = false;
        const cvec bh = apply_B(z.h_block(i), inst.ens.L);
        double peak = 0.0;
        for (const cplx& v : bh) peak = std::max(peak, std::abs(v));
        if (rootL * peak > 4.0 * std::sqrt(inst.d0[i]) * spec.mu) m.in_mu = false;
        if (per_block_error(z, inst, i) > spec.epsilon) m.in_eps = false;
    }
    return m;
}

namespace {

BlockPair perturb(const ProblemInstance& inst, const BlockPair& dir, double r) {
    BlockPair z = inst.truth;
    for (size_t j = 0; j < z.h.size(); ++j) z.h[j] += r * dir.h[j];
    for (size_t j = 0; j < z.x.size(); ++j) z.x[j] += r * dir.x[j];
    return z;
}

double max_block_error(const BlockPair& z, const ProblemInstance& inst) {
    double worst = 0.0;
    for (int i = 0; i < inst.ens.s; ++i) worst = std::max(worst, per_block_error(z, inst, i));
    return worst;
}

// max_i ||A_i^*(e)||; zero noise short-circuits the power iteration.
double adjoint_noise_norm(const ProblemInstance& inst) {
    if (norm2(inst.e) == 0.0) return 0.0;
    double worst = 0.0;
    for (int i = 0; i < inst.ens.s; ++i) {
        const cvec M = lift_adjoint_i(inst.ens, inst.e, i);
        worst = std::max(worst, leading_singular_triple(M, inst.ens.K, inst.ens.N).sigma);
    }
    return worst;
}

SolverConfig probe_config(const ProblemInstance& inst, const NeighborhoodSpec& spec) {
    // Conditions are stated at the true scales, so the probe objective uses
    // d_i = d_i0 and rho = d_0^2 + 2||e||^2 (e is known here).
    SolverConfig cfg;
    cfg.mu = spec.mu;
    cfg.d = inst.d0;
    cfg.d_total = inst.d0_total;
    cfg.rho = inst.d0_total * inst.d0_total + 2.0 * norm2(inst.e);
    cfg.step_init = 1.0;
    return cfg;
}

void summarize(ProbeReport& rep) {
    if (rep.samples.empty()) {
        rep.pass = rep.violations == 0;
        return;
    }
    double lo = rep.samples[0].value, hi = rep.samples[0].value, acc = 0.0;
    for (const ProbeSample& s : rep.samples) {
        lo = std::min(lo, s.value);
        hi = std::max(hi, s.value);
        acc += s.value;
        if (!s.pass) ++rep.violations;
    }
    rep.min_value = lo;
    rep.max_value = hi;
    rep.mean_value = acc / static_cast<double>(rep.samples.size());
    rep.pass = rep.violations == 0;
}

}  // namespace

std::vector<BlockPair> sample_neighborhood(const ProblemInstance& inst, const NeighborhoodSpec& spec,
                                           int n_samples, uint64_t seed) {
    spec.validate(inst);
    if (n_samples < 1) throw DimensionError("sample_neighborhood: need at least one sample");
    const double lo_band = 0.2 * spec.epsilon;
    std::vector<BlockPair> out(static_cast<size_t>(n_samples));

#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < n_samples; ++idx) {
        rng::Stream st(rng::derive(seed, 0x5A3F, static_cast<uint64_t>(idx)));
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            BlockPair dir(inst.ens.s, inst.ens.K, inst.ens.N);
            st.fill_cgaussian(dir.h);
            st.fill_cgaussian(dir.x);

            // Bracket the radius, then bisect max_i delta_i into the band.
            double r_hi = inst.d0_total / std::max(1.0, norm(dir.h));
            int grow = 0;
            while (max_block_error(perturb(inst, dir, r_hi), inst) < lo_band && grow++ < 80)
                r_hi *= 2.0;
            if (grow >= 80) continue;
            double r_lo = 0.0, r = r_hi;
            double err = max_block_error(perturb(inst, dir, r), inst);
            int steps = 0;
            while ((err < lo_band || err > spec.epsilon) && steps++ < 200) {
                if (err > spec.epsilon)
                    r_hi = r;
                else
                    r_lo = r;
                r = 0.5 * (r_lo + r_hi);
                err = max_block_error(perturb(inst, dir, r), inst);
            }
            if (err < lo_band || err > spec.epsilon) continue;

            BlockPair cand = perturb(inst, dir, r);
            const Membership m = in_neighborhoods(cand, inst, spec);
            if (m.in_d && m.in_mu && m.in_eps) {
                out[idx] = std::move(cand);
                placed = true;
            }
        }
        if (!placed) out[idx].s = -1;  // flagged, reported below
    }
    for (const BlockPair& z : out)
        if (z.s == -1)
            throw ConvergenceError("sample_neighborhood: rejection cap hit, basin too tight", 0.0);
    return out;
}

ProbeReport probe_local_rip(const ProblemInstance& inst, const NeighborhoodSpec& spec, int n_samples,
                            uint64_t seed) {
    const std::vector<BlockPair> zs = sample_neighborhood(inst, spec, n_samples, seed);
    const cvec fwd0 = forward_pair(inst.ens, inst.truth);

    ProbeReport rep;
    rep.name = "local_rip";
    rep.samples.resize(zs.size());
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < static_cast<int>(zs.size()); ++idx) {
        const cvec fwd = forward_pair(inst.ens, zs[idx]);
        double num = 0.0;
        for (int l = 0; l < inst.ens.L; ++l) num += std::norm(fwd[l] - fwd0[l]);
        const double diff = relative_error(zs[idx], inst) * inst.d0_total;  // ||X - X_0||_F
        ProbeSample& s = rep.samples[idx];
        s.index = idx;
        s.value = num / (diff * diff);
        s.lhs = 2.0 / 3.0;
        s.rhs = 3.0 / 2.0;
        s.pass = s.value >= s.lhs && s.value <= s.rhs;
    }
    summarize(rep);
    std::ostringstream det;
    det << "ratio ||A(X-X0)||^2 / ||X-X0||_F^2 in [2/3, 3/2]; min " << rep.min_value << ", max "
        << rep.max_value;
    rep.detail = det.str();
    return rep;
}

ProbeReport probe_regularity(const ProblemInstance& inst, const NeighborhoodSpec& spec, int n_samples,
                             uint64_t seed) {
    const std::vector<BlockPair> zs = sample_neighborhood(inst, spec, n_samples, seed);
    const SolverConfig cfg = probe_config(inst, spec);
    const double omega = inst.d0_total / 7000.0;
    const double c = norm2(inst.e) +
                     2000.0 * static_cast<double>(inst.ens.s) * std::pow(adjoint_noise_norm(inst), 2);

    ProbeReport rep;
    rep.name = "regularity";
    rep.samples.resize(zs.size());
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < static_cast<int>(zs.size()); ++idx) {
        const BlockPair g = gradient(zs[idx], inst, cfg);
        const double lhs = norm2(g.h) + norm2(g.x);
        const double ftilde = loss_F(zs[idx], inst) + loss_G(zs[idx], cfg, inst.ens.L);
        const double rhs = omega * std::max(ftilde - c, 0.0);
        ProbeSample& s = rep.samples[idx];
        s.index = idx;
        s.lhs = lhs;
        s.rhs = rhs;
        s.value = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
        s.pass = lhs >= rhs;
    }
    summarize(rep);
    std::ostringstream det;
    det << "||grad||^2 >= omega [F~ - c]_+ with omega=" << omega << ", c=" << c << "; violations "
        << rep.violations;
    rep.detail = det.str();
    return rep;
}

ProbeReport probe_robustness(const ProblemInstance& inst, const NeighborhoodSpec& spec) {
    spec.validate(inst);
    const double value = adjoint_noise_norm(inst);
    const double bound =
        spec.epsilon * inst.d0_total /
        (10.0 * std::sqrt(2.0) * static_cast<double>(inst.ens.s) * inst.kappa);

    ProbeReport rep;
    rep.name = "robustness";
    ProbeSample s;
    s.index = 0;
    s.value = value;
    s.lhs = value;
    s.rhs = bound;
    s.pass = value <= bound;
    rep.samples.push_back(s);
    summarize(rep);
    std::ostringstream det;
    det << "max_i ||A_i^*(e)|| = " << value << " vs bound " << bound << " (margin " << bound - value
        << ")";
    rep.detail = det.str();
    return rep;
}

ProbeReport probe_operator_norm(const ProblemInstance& inst, double tol) {
    const int L = inst.ens.L, N = inst.ens.N, s = inst.ens.s;
    const double estimate = operator_norm_estimate(inst.ens, tol);
    const double bound = std::sqrt(
        s * (N * std::log(static_cast<double>(N) * L / 2.0) + 2.0 * std::log(static_cast<double>(L))));

    ProbeReport rep;
    rep.name = "operator_norm";
    ProbeSample sm;
    sm.index = 0;
    sm.value = estimate;
    sm.lhs = estimate;
    sm.rhs = bound;
    sm.pass = estimate <= bound;
    rep.samples.push_back(sm);
    summarize(rep);
    std::ostringstream det;
    det << "||A|| estimate " << estimate << " vs sqrt(s(N log(NL/2) + 2 log L)) = " << bound;
    rep.detail = det.str();
    return rep;
}

}  // namespace blindmix
