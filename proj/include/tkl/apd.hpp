#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "tkl/fw.hpp"

namespace tkl {

/// Step-size constants for the accelerated primal-dual loop.
struct APDConstants {
    double L_aa = 0.0;     // Lipschitz bound on the alpha gradient
    double L_ap = 0.0;     // cross term, (c_scale / n_P) * L_aa
    double tau0 = 0.0;     // 1 / (3 L_aa)
    double sigma0 = 0.0;   // L_aa / (2 L_ap^2)
    double mu = 0.0;       // strong-convexity modulus driving acceleration
    double c_scale = 0.0;  // free constant; default n_P makes L_ap = L_aa
};

inline APDConstants compute_constants(const KernelContext& ctx, const Vector& y,
                                      const TrainConfig& cfg) {
    const double np = static_cast<double>(ctx.n_p());
    const Vector e = e_star(cfg.task, y);
    const SymmetricMatrix D_e = ctx.assemble_D(e);
    const double fro = D_e.frobenius_norm();
    APDConstants c;
    c.L_aa = 0.5 * np * fro * fro;
    if (c.L_aa <= 0.0)
        throw std::invalid_argument("compute_constants: D(e) = 0, degenerate data");
    // The coupling constant is a free parameter: L_ap = (c/np) * L_aa holds
    // for any c > 0, and sigma0 = np^2 / (2 c^2 L_aa) grows as c shrinks.
    // Since L_aa is a very conservative bound, c = np (which makes
    // L_ap = L_aa) yields P-steps far too small to make progress on real
    // data; 0.1 gives a usable sigma0 while keeping the step-size condition
    // intact.
    c.c_scale = cfg.apd_c_scale > 0.0 ? cfg.apd_c_scale : 0.1;
    c.L_ap = (c.c_scale / np) * c.L_aa;
    c.tau0 = 1.0 / (3.0 * c.L_aa);
    c.sigma0 = c.L_aa / (2.0 * c.L_ap * c.L_ap);
    if (cfg.apd_mu > 0.0) {
        c.mu = cfg.apd_mu;
    } else {
        const SymmetricMatrix K0 = ctx.kernel_matrix(SymmetricMatrix::identity(ctx.n_p()));
        c.mu = 1e-6 * K0.trace() / static_cast<double>(ctx.sample_count());
    }
    return c;
}

struct APDState {
    SymmetricMatrix P;
    Vector alpha;
    SymmetricMatrix x_cur;   // 1/2 D(e * alpha_k)
    SymmetricMatrix x_prev;  // 1/2 D(e * alpha_{k-1})
    double gamma = 0.0;
    double tau = 0.0;
    double sigma_prev = 0.0;
    int k = 0;
    // step scalars of the last executed step (for tracing)
    double last_sigma = 0.0;
    double last_theta = 0.0;
};

/// One APD iteration: extrapolated gradient, trace-simplex projection,
/// proximal QP, then the gamma/tau/sigma recursion.
inline APDState apd_step(const APDState& state, const KernelContext& ctx, const Vector& y,
                         const TrainConfig& cfg, const APDConstants& consts) {
    APDState next = state;
    const double sigma_k = state.gamma * state.tau;
    const double theta_k = state.sigma_prev / sigma_k;

    SymmetricMatrix S = state.x_cur.scaled(1.0 + theta_k).axpy(-theta_k, state.x_prev);
    next.P = project_trace_simplex(state.P.axpy(sigma_k, S), static_cast<double>(ctx.n_p()));

    const SymmetricMatrix K = ctx.kernel_matrix(next.P);
    QPSolution prox = solve_prox_qp(K, cfg.task, y, cfg.C, cfg.epsilon_tube, state.tau,
                                    state.alpha, cfg.qp_tol);
    next.alpha = prox.alpha.values;
    next.x_prev = state.x_cur;
    next.x_cur = ctx.assemble_D(elementwise(e_star(cfg.task, y), next.alpha)).scaled(0.5);

    const double gamma_next = state.gamma * (1.0 + consts.mu * state.tau);
    next.tau = state.tau * std::sqrt(state.gamma / gamma_next);
    next.gamma = gamma_next;
    next.sigma_prev = sigma_k;
    next.k = state.k + 1;
    next.last_sigma = sigma_k;
    next.last_theta = theta_k;
    return next;
}

/// Accelerated primal-dual training loop. The duality gap (full OPT_A primal
/// vs eigen dual) is evaluated every apd_check_interval iterations; the
/// best-primal checkpoint is returned.
inline TrainResult train_apd(const KernelContext& ctx, const Vector& y, const TrainConfig& cfg,
                             const SymmetricMatrix* P_init = nullptr,
                             const Vector* alpha_init = nullptr) {
    const std::size_t np = ctx.n_p();
    const APDConstants consts = compute_constants(ctx, y, cfg);

    APDState st;
    st.P = P_init ? *P_init : SymmetricMatrix::identity(np);
    if (alpha_init) {
        st.alpha = *alpha_init;
    } else {
        st.alpha = opt_a(st.P, ctx, y, cfg).alpha.values;
    }
    st.x_cur = ctx.assemble_D(elementwise(e_star(cfg.task, y), st.alpha)).scaled(0.5);
    st.x_prev = st.x_cur;  // (tau_-1, sigma_-1) = (tau_0, sigma_0), x_-1 = x_0
    st.tau = consts.tau0;
    st.sigma_prev = consts.sigma0;
    st.gamma = consts.sigma0 / consts.tau0;

    TrainResult result;
    result.P = st.P;
    result.alpha = st.alpha;
    double best_primal = std::numeric_limits<double>::infinity();

    const int maxit = cfg.apd_maxit > 0 ? cfg.apd_maxit : cfg.maxit;
    const int interval = std::max(1, cfg.apd_check_interval);
    double prev_kappa = kappa_star(cfg.task, st.alpha, y, cfg.epsilon_tube);
    SymmetricMatrix prev_P = st.P;
    SymmetricMatrix prev_x = st.x_cur;

    for (int k = 0; k <= maxit; ++k) {
        if (k % interval == 0 || k == maxit) {
            auto t0 = std::chrono::steady_clock::now();
            QPSolution sol = opt_a(st.P, ctx, y, cfg);
            const double t_a = detail::ms_since(t0);
            t0 = std::chrono::steady_clock::now();
            OptPResult op = opt_p(sol.alpha.values, ctx, y, cfg);

            IterationRecord rec;
            rec.k = k;
            rec.primal = sol.objective;
            rec.dual = op.dual_value;
            rec.gap = rec.primal - rec.dual;
            rec.t_opt_a_ms = t_a;
            rec.t_opt_p_ms = detail::ms_since(t0);
            rec.tau = st.tau;
            rec.sigma = st.last_sigma;
            rec.theta = st.last_theta;
            // Lagrangian-difference stopping quantity, logged for reference:
            // L(P_k, a_{k-1}) - L(P_{k-1}, a_k) with L(P, a) = <x(a), P> - kappa(a).
            const double kappa_cur = kappa_star(cfg.task, st.alpha, y, cfg.epsilon_tube);
            rec.step = (prev_x.inner(st.P) - prev_kappa) - (st.x_cur.inner(prev_P) - kappa_cur);
            result.trace.push_back(rec);

            if (rec.primal < best_primal) {
                best_primal = rec.primal;
                result.P = st.P;
                result.alpha = sol.alpha.values;
                result.bias = sol.bias;
                result.primal = rec.primal;
            }
            result.final_gap = rec.gap;
            if (rec.gap < cfg.tol) {
                result.converged = true;
                break;
            }
        }
        if (k == maxit) break;
        prev_kappa = kappa_star(cfg.task, st.alpha, y, cfg.epsilon_tube);
        prev_P = st.P;
        prev_x = st.x_cur;
        st = apd_step(st, ctx, y, cfg, consts);
    }
    return result;
}

/// Frank-Wolfe to a switch tolerance, then APD from the FW iterate, then one
/// final OPT_A at the resulting kernel parameter.
inline TrainResult train_hybrid(const KernelContext& ctx, const Vector& y,
                                const TrainConfig& cfg) {
    TrainConfig fw_cfg = cfg;
    fw_cfg.tol = std::max(cfg.tol, cfg.hybrid_switch_tol);
    TrainResult fw = train_fw(ctx, y, fw_cfg);

    TrainResult apd = train_apd(ctx, y, cfg, &fw.P, &fw.alpha);
    TrainResult& out = apd;
    if (fw.primal < apd.primal) {
        out.P = fw.P;
        out.alpha = fw.alpha;
        out.bias = fw.bias;
        out.primal = fw.primal;
    }
    // Re-solve the dual at the final kernel parameter.
    QPSolution final_sol = opt_a(out.P, ctx, y, cfg);
    out.alpha = final_sol.alpha.values;
    out.bias = final_sol.bias;
    out.primal = final_sol.objective;
    // Merge traces with continued iteration numbering.
    std::vector<IterationRecord> merged = fw.trace;
    const int offset = fw.trace.empty() ? 0 : fw.trace.back().k + 1;
    for (IterationRecord r : apd.trace) {
        r.k += offset;
        merged.push_back(r);
    }
    out.trace = std::move(merged);
    return out;
}

}  // namespace tkl
