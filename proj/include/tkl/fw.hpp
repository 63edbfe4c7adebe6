#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tkl/context.hpp"
#include "tkl/eig.hpp"
#include "tkl/qp.hpp"

namespace tkl {

enum class Algorithm { fw, apd, hybrid };

struct TrainConfig {
    double C = 1.0;
    double epsilon_tube = 0.1;
    double tol = 0.01;
    int maxit = 100;
    int n_gamma = 10;
    bool fw_fixed_step = false;  // take the classical 2/(k+2) step, no line search
    Task task = Task::classification;
    Algorithm algorithm = Algorithm::fw;
    std::size_t cache_budget_bytes = std::size_t{2} << 30;
    int threads = 0;

    int degree = 1;
    double delta = 0.5;

    double qp_tol = 1e-6;
    bool second_order = false;

    // APD knobs
    double hybrid_switch_tol = 1e-3;
    double apd_mu = 0.0;       // 0 = auto: 1e-6 * trace(K(P0)) / m
    double apd_c_scale = 0.0;  // 0 = auto: 0.1 (free constant in L_ap)
    int apd_check_interval = 10;
    int apd_maxit = 0;  // 0 = use maxit

    // Debug: pick the minimum instead of maximum eigenvector in the
    // linear-minimization step (the direction-optimality property fails then).
    bool flip_eig_direction = false;
};

struct IterationRecord {
    int k = 0;
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    double step = 0.0;  // FW gamma
    double t_opt_a_ms = 0.0;
    double t_opt_p_ms = 0.0;
    double t_linesearch_ms = 0.0;
    // APD extras
    double tau = 0.0;
    double sigma = 0.0;
    double theta = 0.0;
};

struct TrainResult {
    SymmetricMatrix P;
    Vector alpha;
    double bias = 0.0;
    double primal = 0.0;
    double final_gap = 0.0;
    bool converged = false;
    std::vector<IterationRecord> trace;
};

/// e_star: labels for classification, ones for regression.
inline Vector e_star(Task task, const Vector& y) {
    if (task == Task::classification) return y;
    return Vector(y.size(), 1.0);
}

inline Vector elementwise(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
    return r;
}

inline double kappa_star(Task task, const Vector& alpha, const Vector& y, double epsilon) {
    double s = 0.0;
    if (task == Task::classification) {
        for (double a : alpha) s += a;
    } else {
        for (std::size_t i = 0; i < alpha.size(); ++i)
            s += y[i] * alpha[i] - epsilon * std::abs(alpha[i]);
    }
    return s;
}

/// lambda(e * alpha, P) = -1/2 (e*a)' K(P) (e*a), computed through the Gram
/// matrix. Tests cross-check against -1/2 <D(e*a), P>.
inline double objective_lambda(const Vector& alpha, const SymmetricMatrix& P,
                               const KernelContext& ctx, const Vector& e) {
    const Vector beta = elementwise(e, alpha);
    const SymmetricMatrix K = ctx.kernel_matrix(P);
    const Vector u = K.multiply(beta);
    double s = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) s += beta[i] * u[i];
    return -0.5 * s;
}

/// OPT_A(P): the SVM dual at fixed kernel parameter. The returned objective is
/// lambda + kappa at the optimum.
inline QPSolution opt_a_from_gram(const SymmetricMatrix& K, const Vector& y,
                                  const TrainConfig& cfg, double inner_tol,
                                  const Vector* warm = nullptr) {
    if (cfg.task == Task::classification)
        return solve_svc_dual(K, y, cfg.C, inner_tol, warm, cfg.second_order);
    return solve_svr_dual(K, y, cfg.C, cfg.epsilon_tube, inner_tol, warm, cfg.second_order);
}

inline QPSolution opt_a(const SymmetricMatrix& P, const KernelContext& ctx, const Vector& y,
                        const TrainConfig& cfg, const Vector* warm = nullptr) {
    return opt_a_from_gram(ctx.kernel_matrix(P), y, cfg, cfg.qp_tol, warm);
}

struct OptPResult {
    SymmetricMatrix S;
    double dual_value = 0.0;
    double lambda_max = 0.0;
    SymmetricMatrix D;
};

/// OPT_P(alpha): analytic eigen-step. S = n_P v v' for the extremal
/// eigenvector of D(e * alpha); dual value is kappa - (n_P / 2) lambda_max,
/// the exact inner minimum of the saddle objective over the trace simplex.
inline OptPResult opt_p(const Vector& alpha, const KernelContext& ctx, const Vector& y,
                        const TrainConfig& cfg) {
    const Vector e = e_star(cfg.task, y);
    OptPResult r{SymmetricMatrix(ctx.n_p()), 0.0, 0.0, SymmetricMatrix(ctx.n_p())};
    r.D = ctx.assemble_D(elementwise(e, alpha));
    auto [lmax, v] = extremal_eigpair(r.D, !cfg.flip_eig_direction);
    r.lambda_max = lmax;
    r.S = outer_scaled(v, static_cast<double>(ctx.n_p()));
    r.dual_value = kappa_star(cfg.task, alpha, y, cfg.epsilon_tube) -
                   0.5 * static_cast<double>(ctx.n_p()) * lmax;
    return r;
}

struct LineSearchResult {
    double gamma = 0.0;
    QPSolution solution;
    SymmetricMatrix gram;  // K(P_k + gamma (S_k - P_k))
};

/// Grid line search over OPT_A(P_k + gamma (S_k - P_k)). The Gram matrix is
/// linear in P, so only K(P_k) and K(S_k) are assembled; every candidate is a
/// convex combination. Candidates are 1/n .. n/n plus the classical 2/(k+2);
/// the fallback step is 2/(k+2) when no candidate improves on the current
/// primal.
inline LineSearchResult line_search(const SymmetricMatrix& K_p, const SymmetricMatrix& K_s,
                                    const Vector& y, const TrainConfig& cfg, int k,
                                    double current_primal, const Vector& warm_alpha,
                                    double inner_tol) {
    const std::size_t m = y.size();
    std::vector<double> candidates;
    candidates.reserve(static_cast<std::size_t>(cfg.n_gamma) + 1);
    const double fallback = 2.0 / (k + 2.0);
    if (!cfg.fw_fixed_step)
        for (int j = 1; j <= cfg.n_gamma; ++j)
            candidates.push_back(static_cast<double>(j) / cfg.n_gamma);
    candidates.push_back(fallback);

    LineSearchResult best;
    best.gamma = -1.0;
    LineSearchResult fb;
    fb.gamma = -1.0;
    Vector warm = warm_alpha;
    for (double g : candidates) {
        SymmetricMatrix Kg(m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j)
                Kg.set(i, j, (1.0 - g) * K_p.at(i, j) + g * K_s.at(i, j));
        QPSolution sol = opt_a_from_gram(Kg, y, cfg, inner_tol, &warm);
        warm = sol.alpha.values;  // warm-start the next candidate
        if (best.gamma < 0.0 || sol.objective < best.solution.objective) {
            best.gamma = g;
            best.solution = sol;
            best.gram = Kg;
        }
        if (g == fallback) {
            fb.gamma = g;
            fb.solution = std::move(sol);
            fb.gram = std::move(Kg);
        }
    }
    if (best.solution.objective <= current_primal) return best;
    return fb;
}

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Frank-Wolfe loop: alternate OPT_A, the eigen linear-minimization step, and
/// the grid line search; stop on primal - dual < tol. Returns the
/// best-primal iterate seen.
inline TrainResult train_fw(const KernelContext& ctx, const Vector& y, const TrainConfig& cfg,
                            const SymmetricMatrix* P_init = nullptr) {
    const std::size_t np = ctx.n_p();
    SymmetricMatrix P = P_init ? *P_init : SymmetricMatrix::identity(np);
    SymmetricMatrix K_p = ctx.kernel_matrix(P);

    TrainResult result;
    result.P = P;
    double inner_tol = cfg.qp_tol;
    QPSolution sol = opt_a_from_gram(K_p, y, cfg, inner_tol);

    double best_primal = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.maxit; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.primal = sol.objective;

        auto t0 = std::chrono::steady_clock::now();
        OptPResult step = opt_p(sol.alpha.values, ctx, y, cfg);
        rec.t_opt_p_ms = detail::ms_since(t0);
        rec.dual = step.dual_value;
        rec.gap = rec.primal - rec.dual;

        // A loosely solved inner QP understates the primal, which can make
        // the gap look converged. Confirm with a full-tolerance solve.
        if (rec.gap < cfg.tol && inner_tol > cfg.qp_tol) {
            t0 = std::chrono::steady_clock::now();
            sol = opt_a_from_gram(K_p, y, cfg, cfg.qp_tol, &sol.alpha.values);
            rec.t_opt_a_ms = detail::ms_since(t0);
            inner_tol = cfg.qp_tol;
            rec.primal = sol.objective;
            step = opt_p(sol.alpha.values, ctx, y, cfg);
            rec.dual = step.dual_value;
            rec.gap = rec.primal - rec.dual;
        }

        if (rec.primal < best_primal) {
            best_primal = rec.primal;
            result.P = P;
            result.alpha = sol.alpha.values;
            result.bias = sol.bias;
            result.primal = rec.primal;
        }
        result.final_gap = rec.gap;

        if (rec.gap < cfg.tol) {
            result.trace.push_back(rec);
            result.converged = true;
            break;
        }

        inner_tol = std::max(cfg.qp_tol, 0.01 * rec.gap);

        t0 = std::chrono::steady_clock::now();
        const SymmetricMatrix K_s = ctx.kernel_matrix(step.S);
        LineSearchResult ls =
            line_search(K_p, K_s, y, cfg, k, rec.primal, sol.alpha.values, inner_tol);
        rec.t_linesearch_ms = detail::ms_since(t0);
        rec.step = ls.gamma;

        P = P.scaled(1.0 - ls.gamma).axpy(ls.gamma, step.S);
        K_p = std::move(ls.gram);
        sol = std::move(ls.solution);
        result.trace.push_back(rec);
    }

    // Intermediate primals come from loosened inner solves and can understate
    // the true value, so re-evaluate both the tracked-best iterate and the
    // final one at full tolerance and return whichever is genuinely better.
    QPSolution best_sol = opt_a(result.P, ctx, y, cfg);
    QPSolution last_sol = opt_a_from_gram(K_p, y, cfg, cfg.qp_tol, &sol.alpha.values);
    if (last_sol.objective <= best_sol.objective) {
        result.P = P;
        best_sol = std::move(last_sol);
    }
    result.alpha = best_sol.alpha.values;
    result.bias = best_sol.bias;
    result.primal = best_sol.objective;
    result.final_gap = result.primal - opt_p(result.alpha, ctx, y, cfg).dual_value;
    return result;
}

}  // namespace tkl
