#include "blindmix/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace blindmix {

void SolverConfig::validate() const {
    if (!(mu > 0.0)) throw DimensionError("solver config: mu must be positive");
    if (rho < 0.0) throw DimensionError("solver config: rho must be nonnegative");
    if (d.empty() || d_total <= 0.0) throw DimensionError("solver config: missing scale estimates");
    for (double v : d)
        if (!(v > 0.0)) throw DimensionError("solver config: scale estimates must be positive");
    if (!(step_init > 0.0)) throw DimensionError("solver config: step_init must be positive");
    if (!(shrink > 0.0 && shrink < 1.0)) throw DimensionError("solver config: shrink must be in (0,1)");
    if (max_iters < 1) throw DimensionError("solver config: max_iters must be at least 1");
    if (!(stop_tol > 0.0)) throw DimensionError("solver config: stop_tol must be positive");
}

SolverConfig default_config(const ProblemInstance& inst, const InitOutput& init) {
    SolverConfig cfg;
    cfg.mu = 6.0 * std::sqrt(std::log(static_cast<double>(inst.ens.L)));
    cfg.d = init.d;
    cfg.d_total = init.d_total;
    cfg.rho = init.d_total * init.d_total * (1.0 + 2.0 * inst.sigma * inst.sigma);
    cfg.step_init = 1.0 / static_cast<double>(inst.ens.K + inst.ens.N);
    return cfg;
}

double g0(double z) {
    const double t = std::max(z - 1.0, 0.0);
    return t * t;
}

double g0_prime(double z) { return 2.0 * std::max(z - 1.0, 0.0); }

double loss_F(const BlockPair& z, const ProblemInstance& inst) {
    const cvec fwd = forward_pair(inst.ens, z);
    double acc = 0.0;
    for (int l = 0; l < inst.ens.L; ++l) acc += std::norm(fwd[l] - inst.y[l]);
    return acc;
}

double loss_G(const BlockPair& z, const SolverConfig& cfg, int L) {
    if (static_cast<int>(cfg.d.size()) != z.s) throw DimensionError("loss_G: scale count mismatch");
    double acc = 0.0;
    for (int i = 0; i < z.s; ++i) {
        const double di = cfg.d[i];
        acc += g0(norm2(z.h_block(i)) / (2.0 * di));
        acc += g0(norm2(z.x_block(i)) / (2.0 * di));
        const cvec bh = apply_B(z.h_block(i), L);
        const double spike = static_cast<double>(L) / (8.0 * di * cfg.mu * cfg.mu);
        for (const cplx& v : bh) acc += g0(spike * std::norm(v));
    }
    return cfg.rho * acc;
}

namespace {

// Shared gradient core; the residual r = A(H(z)) - y is supplied so the
// descent loop can reuse its running forward value.
BlockPair gradient_from_residual(const BlockPair& z, const cvec& r, const ProblemInstance& inst,
                                 const SolverConfig& cfg) {
    const MeasurementEnsemble& ens = inst.ens;
    const int L = ens.L;
    BlockPair g(z.s, z.K, z.N);
#pragma omp parallel for schedule(static) if (z.s > 1)
    for (int i = 0; i < z.s; ++i) {
        auto h = z.h_block(i);
        auto x = z.x_block(i);
        const double di = cfg.d[i];
        const double w = cfg.rho / (2.0 * di);

        cvec gh = lift_adjoint_apply_right(ens, r, x, i);
        cvec gx = lift_adjoint_apply_left(ens, r, h, i);

        // Norm penalties.
        const double ch = w * g0_prime(norm2(h) / (2.0 * di));
        const double cx = w * g0_prime(norm2(x) / (2.0 * di));
        // Spectral penalty: sum_l G0'(.) b_l b_l^* h realized as an FFT,
        // masked multiply and inverse FFT.
        cvec bh = apply_B(h, L);
        const double spike = static_cast<double>(L) / (8.0 * di * cfg.mu * cfg.mu);
        for (cplx& v : bh) v *= g0_prime(spike * std::norm(v));
        const cvec spec = apply_B_adjoint(bh, z.K);
        const double cs = w * static_cast<double>(L) / (4.0 * cfg.mu * cfg.mu);

        for (int k = 0; k < z.K; ++k) gh[k] += ch * h[k] + cs * spec[k];
        for (int n = 0; n < z.N; ++n) gx[n] += cx * x[n];

        auto ghb = g.h_block(i);
        auto gxb = g.x_block(i);
        std::copy(gh.begin(), gh.end(), ghb.begin());
        std::copy(gx.begin(), gx.end(), gxb.begin());
    }
    return g;
}

double grad_norm(const BlockPair& g) { return std::sqrt(norm2(g.h) + norm2(g.x)); }

BlockPair step(const BlockPair& z, const BlockPair& g, double eta) {
    BlockPair out = z;
    for (size_t j = 0; j < out.h.size(); ++j) out.h[j] -= eta * g.h[j];
    for (size_t j = 0; j < out.x.size(); ++j) out.x[j] -= eta * g.x[j];
    return out;
}

}  // namespace

BlockPair gradient(const BlockPair& z, const ProblemInstance& inst, const SolverConfig& cfg) {
    cfg.validate();
    if (z.s != inst.ens.s || z.K != inst.ens.K || z.N != inst.ens.N)
        throw DimensionError("gradient: block pair does not match instance");
    cvec r = forward_pair(inst.ens, z);
    for (int l = 0; l < inst.ens.L; ++l) r[l] -= inst.y[l];
    return gradient_from_residual(z, r, inst, cfg);
}

std::pair<BlockPair, SolverTrace> descend(const InitOutput& start, const ProblemInstance& inst,
                                          const SolverConfig& cfg) {
    cfg.validate();
    const MeasurementEnsemble& ens = inst.ens;
    const int L = ens.L;
    const double ny = norm(inst.y);
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };

    struct Eval {
        cvec fwd;
        double f = 0.0, g = 0.0;
        double obj() const { return f + g; }
    };
    auto evaluate = [&](const BlockPair& z) {
        Eval ev;
        ev.fwd = forward_pair(ens, z);
        for (int l = 0; l < L; ++l) ev.f += std::norm(ev.fwd[l] - inst.y[l]);
        ev.g = loss_G(z, cfg, L);
        if (!std::isfinite(ev.obj())) throw NumericalError("descend: objective is not finite");
        return ev;
    };

    BlockPair z = start.z0;
    Eval cur = evaluate(z);
    cvec r = cur.fwd;
    for (int l = 0; l < L; ++l) r[l] -= inst.y[l];
    BlockPair g = gradient_from_residual(z, r, inst, cfg);

    SolverTrace trace;
    auto record = [&](int it, const Eval& ev, double gn, double eta) {
        TraceRow row;
        row.iter = it;
        row.objective = ev.obj();
        row.loss_f = ev.f;
        row.loss_g = ev.g;
        row.grad_norm = gn;
        row.step = eta;
        row.rel_error = cfg.record_rel_error ? relative_error(z, inst) : 0.0;
        row.elapsed_ms = elapsed_ms();
        trace.rows.push_back(row);
    };
    record(0, cur, grad_norm(g), 0.0);

    for (int t = 1; t <= cfg.max_iters; ++t) {
        double eta = cfg.step_init;
        BlockPair z_try = step(z, g, eta);
        Eval next = evaluate(z_try);
        if (cfg.backtracking) {
            while (next.obj() > cur.obj()) {
                eta *= cfg.shrink;
                if (eta < 1e-18)
                    throw NumericalError("descend: line search stalled, no decreasing stepsize");
                z_try = step(z, g, eta);
                next = evaluate(z_try);
            }
        }
        // Stopping rule on the measurement-space movement of the lift:
        // ||A(H(z_new) - H(z))|| against stop_tol * ||y||.
        double move = 0.0;
        for (int l = 0; l < L; ++l) move += std::norm(next.fwd[l] - cur.fwd[l]);
        move = std::sqrt(move);

        z = std::move(z_try);
        cur = std::move(next);
        for (int l = 0; l < L; ++l) r[l] = cur.fwd[l] - inst.y[l];
        g = gradient_from_residual(z, r, inst, cfg);
        record(t, cur, grad_norm(g), eta);
        trace.iters = t;
        if (move < cfg.stop_tol * ny) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(z), std::move(trace)};
}

void SolverTrace::write_csv(const std::string& path, bool with_timings,
                            const std::string& provenance) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("trace: cannot open " + path);
    if (!provenance.empty()) out << provenance;
    out << "iter,objective,loss_f,loss_g,grad_norm,step,rel_error,elapsed_ms\n";
    char buf[256];
    for (const TraceRow& row : rows) {
        const double ms = with_timings ? row.elapsed_ms : 0.0;
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.3f\n", row.iter,
                      row.objective, row.loss_f, row.loss_g, row.grad_norm, row.step, row.rel_error,
                      ms);
        out << buf;
    }
    if (!out) throw std::runtime_error("trace: write failed for " + path);
}

}  // namespace blindmix
