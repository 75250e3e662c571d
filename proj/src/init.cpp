#include "blindmix/init.hpp"

#include <cmath>
#include <sstream>

#include "blindmix/kernels.hpp"

namespace blindmix {

SingularTriple leading_singular_triple(const cvec& M, int K, int N, double tol, int max_iter) {
    if (M.size() != static_cast<size_t>(K) * N)
        throw DimensionError("leading_singular_triple: storage does not match K x N");
    if (tol <= 0.0) throw DimensionError("leading_singular_triple: tol must be positive");
    double frob = 0.0;
    for (const cplx& v : M) frob += std::norm(v);
    if (frob == 0.0) throw DimensionError("leading_singular_triple: zero matrix");

    cvec u(static_cast<size_t>(K), cplx{1.0 / std::sqrt(static_cast<double>(K)), 0.0});
    cvec w(static_cast<size_t>(N));
    double sigma_prev = -1.0, sigma = 0.0;

    int it = 0;
    for (; it < max_iter; ++it) {
        // w = M^H u, sigma = ||w||, u <- M w / ||M w||.
        serial::cmatvec_adj(M, K, N, u, w);
        sigma = norm(w);
        if (sigma == 0.0) {
            // All-ones start hit the null space of M^H; nudge off it.
            u[static_cast<size_t>(it) % K] += cplx{0.0, 1.0};
            const double nu = norm(u);
            for (cplx& v : u) v /= nu;
            continue;
        }
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) < tol * sigma) break;
        sigma_prev = sigma;
        serial::cmatvec(M, K, N, w, u);
        const double nu = norm(u);
        for (cplx& v : u) v /= nu;
    }
    if (it == max_iter) {
        std::ostringstream msg;
        msg << "leading_singular_triple: no convergence after " << max_iter
            << " iterations, last sigma " << sigma;
        throw ConvergenceError(msg.str(), sigma);
    }

    SingularTriple out;
    out.sigma = sigma;
    out.left = u;
    out.right = w;
    for (cplx& v : out.right) v /= sigma;

    // Phase convention: largest-modulus entry of the left vector made real
    // nonnegative; both vectors rotate together so left * right^* is kept.
    size_t peak = 0;
    for (size_t k = 1; k < out.left.size(); ++k)
        if (std::norm(out.left[k]) > std::norm(out.left[peak])) peak = k;
    const double mod = std::abs(out.left[peak]);
    if (mod > 0.0) {
        const cplx rot = std::conj(out.left[peak]) / mod;
        for (cplx& v : out.left) v *= rot;
        for (cplx& v : out.right) v *= rot;
    }
    return out;
}

cvec project_mu_ball(std::span<const cplx> z0, int L, double c, double tol, int max_iter) {
    const int K = static_cast<int>(z0.size());
    if (K > L) throw DimensionError("project_mu_ball: K must not exceed L");
    if (!(c > 0.0)) throw DimensionError("project_mu_ball: bound must be positive");
    const double radius = c / std::sqrt(static_cast<double>(L));

    auto clip_box = [&](const cvec& w) {
        cvec out = w;
        for (cplx& v : out) {
            const double m = std::abs(v);
            if (m > radius) v *= radius / m;
        }
        return out;
    };
    auto proj_range = [&](const cvec& w) { return apply_B(apply_B_adjoint(w, K), L); };

    // Dykstra between the box and range(B) in w = B z coordinates. The
    // subspace is affine so only the box needs a correction term.
    cvec x = apply_B(z0, L);
    cvec p(static_cast<size_t>(L), cplx{0.0, 0.0});
    for (int it = 0; it < max_iter; ++it) {
        cvec xp = x;
        for (int l = 0; l < L; ++l) xp[l] += p[l];
        const cvec ybox = clip_box(xp);
        for (int l = 0; l < L; ++l) p[l] = xp[l] - ybox[l];
        const cvec xnew = proj_range(ybox);
        double move = 0.0;
        for (int l = 0; l < L; ++l) move += std::norm(xnew[l] - x[l]);
        x = xnew;
        if (std::sqrt(move) < tol) return apply_B_adjoint(x, K);
    }
    // Enforce feasibility on the way out, then report the cap.
    x = proj_range(clip_box(x));
    throw ConvergenceError("project_mu_ball: no convergence after iteration cap",
                           apply_B_adjoint(x, K));
}

InitOutput spectral_init(const ProblemInstance& inst, double mu, double tol) {
    if (!(mu > 0.0)) throw DimensionError("spectral_init: mu must be positive");
    const MeasurementEnsemble& ens = inst.ens;
    InitOutput out;
    out.z0 = BlockPair(ens.s, ens.K, ens.N);
    out.d.assign(static_cast<size_t>(ens.s), 0.0);

    std::vector<std::exception_ptr> errs(static_cast<size_t>(ens.s));
#pragma omp parallel for schedule(static) if (ens.s > 1)
    for (int i = 0; i < ens.s; ++i) {
        try {
            const cvec Mi = lift_adjoint_i(ens, inst.y, i);
            const SingularTriple t = leading_singular_triple(Mi, ens.K, ens.N, tol);
            out.d[i] = t.sigma;
            const double root = std::sqrt(t.sigma);
            cvec h0(t.left);
            for (cplx& v : h0) v *= root;
            const cvec u0 = project_mu_ball(h0, ens.L, 2.0 * root * mu);
            auto hb = out.z0.h_block(i);
            std::copy(u0.begin(), u0.end(), hb.begin());
            auto xb = out.z0.x_block(i);
            for (int n = 0; n < ens.N; ++n) xb[n] = root * t.right[n];
        } catch (...) {
            errs[i] = std::current_exception();
        }
    }
    for (auto& ep : errs)
        if (ep) std::rethrow_exception(ep);

    double acc = 0.0;
    for (double v : out.d) acc += v * v;
    out.d_total = std::sqrt(acc);
    return out;
}

}  // namespace blindmix
