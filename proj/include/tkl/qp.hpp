#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tkl/matrix.hpp"

namespace tkl {

enum class Task { classification, regression };

/// SVM dual vector with its feasibility set: classification requires
/// sum(alpha_i y_i) = 0 and alpha in [0, C]; regression requires
/// sum(alpha_i) = 0 and alpha in [-C, C].
struct DualVariables {
    Vector values;
    Task task = Task::classification;
};

struct QPSolution {
    DualVariables alpha;
    double objective = 0.0;  // lambda(e * alpha, P) + kappa(alpha) at the solution
    double bias = 0.0;
    long iterations = 0;
    double kkt_violation = 0.0;
};

namespace detail {

/// Canonical SMO problem: minimize 0.5 b'Qb + p'b over sum(s_i b_i) = 0,
/// 0 <= b_i <= C. Classification uses b = alpha, s = y; regression uses the
/// split variables b = (alpha+, alpha-) with s = (+1, -1).
struct SMOProblem {
    std::vector<double> Q;  // row-major, size m*m
    std::vector<double> p;
    std::vector<double> s;  // +-1
    double box = 0.0;       // C
};

struct SMOResult {
    Vector beta;
    long iterations = 0;
    double kkt_violation = 0.0;
};

inline SMOResult smo_solve(const SMOProblem& prob, double tol, const Vector* warm,
                           bool second_order = false) {
    const std::size_t m = prob.p.size();
    Vector beta(m, 0.0);
    if (warm && warm->size() == m) {
        beta = *warm;
        for (double& b : beta) b = std::clamp(b, 0.0, prob.box);
        // SMO pair updates preserve sum(s_i beta_i), so the start point must
        // sit on the constraint plane. Repair any residual within the box.
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) r += prob.s[i] * beta[i];
        for (std::size_t i = 0; i < m && std::abs(r) > 1e-15; ++i) {
            const double target = std::clamp(beta[i] - prob.s[i] * r, 0.0, prob.box);
            r += prob.s[i] * (target - beta[i]);
            beta[i] = target;
        }
        if (std::abs(r) > 1e-12) beta.assign(m, 0.0);
    }

    // Gradient of the objective: G = Q beta + p.
    Vector grad(prob.p);
    for (std::size_t i = 0; i < m; ++i) {
        if (beta[i] == 0.0) continue;
        const double bi = beta[i];
        for (std::size_t k = 0; k < m; ++k) grad[k] += prob.Q[k * m + i] * bi;
    }

    const double C = prob.box;
    const long max_iter = std::max<long>(10000000, 200 * static_cast<long>(m));
    long it = 0;
    double viol = std::numeric_limits<double>::infinity();

    for (; it < max_iter; ++it) {
        // Maximal violating pair over I_up / I_low.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i = m, j = m;
        for (std::size_t t = 0; t < m; ++t) {
            const double v = -prob.s[t] * grad[t];
            const bool in_up = (prob.s[t] > 0.0) ? (beta[t] < C) : (beta[t] > 0.0);
            const bool in_low = (prob.s[t] > 0.0) ? (beta[t] > 0.0) : (beta[t] < C);
            if (in_up && v > up_best) {
                up_best = v;
                i = t;
            }
            if (in_low && v < low_best) {
                low_best = v;
                j = t;
            }
        }
        viol = up_best - low_best;
        if (i == m || j == m || viol <= tol) break;

        if (second_order) {
            // WSS2: fix i, pick j minimizing the second-order gain estimate.
            double best_gain = 0.0;
            std::size_t jb = m;
            for (std::size_t t = 0; t < m; ++t) {
                const bool in_low = (prob.s[t] > 0.0) ? (beta[t] > 0.0) : (beta[t] < C);
                if (!in_low || t == i) continue;
                const double g = prob.s[i] * grad[i] - prob.s[t] * grad[t];
                if (g >= 0.0) continue;
                double q = prob.Q[i * m + i] + prob.Q[t * m + t] -
                           2.0 * prob.s[i] * prob.s[t] * prob.Q[i * m + t];
                if (q <= 1e-12) q = 1e-12;
                const double gain = g * g / q;
                if (gain > best_gain) {
                    best_gain = gain;
                    jb = t;
                }
            }
            if (jb != m) j = jb;
        }

        const double g = prob.s[i] * grad[i] - prob.s[j] * grad[j];
        double q = prob.Q[i * m + i] + prob.Q[j * m + j] -
                   2.0 * prob.s[i] * prob.s[j] * prob.Q[i * m + j];
        if (q <= 1e-12) q = 1e-12;
        double t_step = -g / q;

        // Box limits: beta_i moves by s_i * t, beta_j by -s_j * t.
        double t_max = std::numeric_limits<double>::infinity();
        if (prob.s[i] > 0.0)
            t_max = std::min(t_max, C - beta[i]);
        else
            t_max = std::min(t_max, beta[i]);
        if (prob.s[j] > 0.0)
            t_max = std::min(t_max, beta[j]);
        else
            t_max = std::min(t_max, C - beta[j]);
        t_step = std::clamp(t_step, 0.0, t_max);
        if (t_step <= 0.0) break;  // blocked pair; violation already reported

        beta[i] += prob.s[i] * t_step;
        beta[j] -= prob.s[j] * t_step;
        beta[i] = std::clamp(beta[i], 0.0, C);
        beta[j] = std::clamp(beta[j], 0.0, C);
        for (std::size_t k = 0; k < m; ++k)
            grad[k] += (prob.Q[k * m + i] * prob.s[i] - prob.Q[k * m + j] * prob.s[j]) * t_step;
    }

    return {std::move(beta), it, viol};
}

inline void check_kernel_finite(const SymmetricMatrix& K) {
    if (!K.all_finite()) throw std::invalid_argument("qp: kernel matrix has non-finite entries");
}

}  // namespace detail

/// SVC dual: maximize sum(alpha) - 0.5 sum alpha_i alpha_j y_i y_j K_ij
/// over sum(alpha_i y_i) = 0, 0 <= alpha <= C.
inline QPSolution solve_svc_dual(const SymmetricMatrix& K, const Vector& labels, double C,
                                 double tol = 1e-6, const Vector* warm = nullptr,
                                 bool second_order = false) {
    detail::check_kernel_finite(K);
    const std::size_t m = K.order();
    if (labels.size() != m) throw std::invalid_argument("solve_svc_dual: label size mismatch");
    bool has_pos = false, has_neg = false;
    for (double y : labels) {
        if (y > 0) has_pos = true;
        else has_neg = true;
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("solve_svc_dual: both classes must be present");

    detail::SMOProblem prob;
    prob.Q.resize(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            prob.Q[i * m + j] = labels[i] * labels[j] * K.at(i, j);
    prob.p.assign(m, -1.0);
    prob.s = labels;
    prob.box = C;

    auto r = detail::smo_solve(prob, tol, warm, second_order);

    QPSolution sol;
    sol.alpha.values = r.beta;
    sol.alpha.task = Task::classification;
    sol.iterations = r.iterations;
    sol.kkt_violation = r.kkt_violation;

    // objective = kappa_c + lambda = sum(alpha) - 0.5 (y.a)' K (y.a)
    Vector u(m, 0.0);  // u_i = sum_j alpha_j y_j K_ij
    for (std::size_t j = 0; j < m; ++j) {
        if (r.beta[j] == 0.0) continue;
        const double w = r.beta[j] * labels[j];
        for (std::size_t i = 0; i < m; ++i) u[i] += w * K.at(i, j);
    }
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        quad += r.beta[i] * labels[i] * u[i];
        lin += r.beta[i];
    }
    sol.objective = lin - 0.5 * quad;

    // Bias: mean of u_i - y_i over free support vectors; else midpoint of the
    // KKT interval.
    double sum_b = 0.0;
    int free_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        const double c = u[i] - labels[i];
        if (r.beta[i] > 1e-12 * C && r.beta[i] < C * (1.0 - 1e-12)) {
            sum_b += c;
            ++free_count;
        } else if (r.beta[i] <= 1e-12 * C) {
            if (labels[i] > 0) hi = std::min(hi, c);
            else lo = std::max(lo, c);
        } else {
            if (labels[i] > 0) lo = std::max(lo, c);
            else hi = std::min(hi, c);
        }
    }
    if (free_count > 0)
        sol.bias = sum_b / free_count;
    else if (std::isfinite(lo) && std::isfinite(hi))
        sol.bias = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
        sol.bias = lo;
    else if (std::isfinite(hi))
        sol.bias = hi;
    return sol;
}

/// SVR dual on split variables alpha = alpha+ - alpha-: maximize
/// -0.5 a'Ka - eps |a|_1 + y'a over sum(a) = 0, a in [-C, C]. Complementarity
/// min(alpha+_i, alpha-_i) = 0 is enforced on return.
inline QPSolution solve_svr_dual(const SymmetricMatrix& K, const Vector& targets, double C,
                                 double epsilon, double tol = 1e-6, const Vector* warm = nullptr,
                                 bool second_order = false) {
    detail::check_kernel_finite(K);
    const std::size_t m = K.order();
    if (targets.size() != m) throw std::invalid_argument("solve_svr_dual: target size mismatch");
    for (double y : targets)
        if (!std::isfinite(y)) throw std::invalid_argument("solve_svr_dual: non-finite target");

    const std::size_t mm = 2 * m;
    detail::SMOProblem prob;
    prob.Q.resize(mm * mm);
    for (std::size_t i = 0; i < mm; ++i) {
        const double si = i < m ? 1.0 : -1.0;
        const std::size_t ii = i < m ? i : i - m;
        for (std::size_t j = 0; j < mm; ++j) {
            const double sj = j < m ? 1.0 : -1.0;
            const std::size_t jj = j < m ? j : j - m;
            prob.Q[i * mm + j] = si * sj * K.at(ii, jj);
        }
    }
    prob.p.resize(mm);
    prob.s.resize(mm);
    for (std::size_t i = 0; i < m; ++i) {
        prob.p[i] = epsilon - targets[i];
        prob.p[i + m] = epsilon + targets[i];
        prob.s[i] = 1.0;
        prob.s[i + m] = -1.0;
    }
    prob.box = C;

    std::optional<Vector> warm_split;
    if (warm && warm->size() == m) {
        warm_split.emplace(mm, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if ((*warm)[i] >= 0.0) (*warm_split)[i] = (*warm)[i];
            else (*warm_split)[i + m] = -(*warm)[i];
        }
    }
    auto r = detail::smo_solve(prob, tol, warm_split ? &*warm_split : nullptr, second_order);

    Vector alpha(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double common = std::min(r.beta[i], r.beta[i + m]);
        alpha[i] = (r.beta[i] - common) - (r.beta[i + m] - common);
    }

    QPSolution sol;
    sol.alpha.values = alpha;
    sol.alpha.task = Task::regression;
    sol.iterations = r.iterations;
    sol.kkt_violation = r.kkt_violation;

    Vector u = K.multiply(alpha);
    double quad = 0.0, l1 = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        quad += alpha[i] * u[i];
        l1 += std::abs(alpha[i]);
        lin += targets[i] * alpha[i];
    }
    sol.objective = -0.5 * quad - epsilon * l1 + lin;

    double sum_b = 0.0;
    int free_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double edge = 1e-10 * std::max(C, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double c = u[i] - targets[i];
        if (alpha[i] > edge && alpha[i] < C - edge) {
            sum_b += c + epsilon;
            ++free_count;
        } else if (alpha[i] < -edge && alpha[i] > -C + edge) {
            sum_b += c - epsilon;
            ++free_count;
        } else if (std::abs(alpha[i]) <= edge) {
            lo = std::max(lo, c - epsilon);
            hi = std::min(hi, c + epsilon);
        } else if (alpha[i] >= C - edge) {
            lo = std::max(lo, c + epsilon);
        } else {
            hi = std::min(hi, c - epsilon);
        }
    }
    if (free_count > 0)
        sol.bias = sum_b / free_count;
    else if (std::isfinite(lo) && std::isfinite(hi))
        sol.bias = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
        sol.bias = lo;
    else if (std::isfinite(hi))
        sol.bias = hi;
    return sol;
}

/// Proximal QP for the APD inner step: the plain dual objective minus
/// (1 / (2 tau)) ||alpha - center||^2, same feasible set. As tau grows the
/// solution approaches the plain dual; as tau shrinks it approaches center.
inline QPSolution solve_prox_qp(const SymmetricMatrix& K, Task task, const Vector& labels_or_targets,
                                double C, double epsilon, double tau, const Vector& center,
                                double tol = 1e-6) {
    detail::check_kernel_finite(K);
    if (tau <= 0.0) throw std::invalid_argument("solve_prox_qp: tau must be positive");
    const std::size_t m = K.order();
    if (center.size() != m) throw std::invalid_argument("solve_prox_qp: center size mismatch");
    const double inv_tau = 1.0 / tau;

    detail::SMOProblem prob;
    QPSolution sol;

    if (task == Task::classification) {
        prob.Q.resize(m * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                prob.Q[i * m + j] = labels_or_targets[i] * labels_or_targets[j] * K.at(i, j) +
                                    (i == j ? inv_tau : 0.0);
        prob.p.resize(m);
        for (std::size_t i = 0; i < m; ++i) prob.p[i] = -1.0 - inv_tau * center[i];
        prob.s = labels_or_targets;
        prob.box = C;
        auto r = detail::smo_solve(prob, tol, &center);
        sol.alpha.values = r.beta;
        sol.alpha.task = task;
        sol.iterations = r.iterations;
        sol.kkt_violation = r.kkt_violation;
        Vector u(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            if (r.beta[j] == 0.0) continue;
            const double w = r.beta[j] * labels_or_targets[j];
            for (std::size_t i = 0; i < m; ++i) u[i] += w * K.at(i, j);
        }
        double quad = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            quad += r.beta[i] * labels_or_targets[i] * u[i];
            lin += r.beta[i];
        }
        sol.objective = lin - 0.5 * quad;
        return sol;
    }

    // Regression: split form with the prox on alpha = alpha+ - alpha-.
    const std::size_t mm = 2 * m;
    prob.Q.resize(mm * mm);
    for (std::size_t i = 0; i < mm; ++i) {
        const double si = i < m ? 1.0 : -1.0;
        const std::size_t ii = i < m ? i : i - m;
        for (std::size_t j = 0; j < mm; ++j) {
            const double sj = j < m ? 1.0 : -1.0;
            const std::size_t jj = j < m ? j : j - m;
            prob.Q[i * mm + j] = si * sj * (K.at(ii, jj) + (ii == jj ? inv_tau : 0.0));
        }
    }
    prob.p.resize(mm);
    prob.s.resize(mm);
    for (std::size_t i = 0; i < m; ++i) {
        prob.p[i] = epsilon - labels_or_targets[i] - inv_tau * center[i];
        prob.p[i + m] = epsilon + labels_or_targets[i] + inv_tau * center[i];
        prob.s[i] = 1.0;
        prob.s[i + m] = -1.0;
    }
    prob.box = C;
    Vector warm_split(mm, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (center[i] >= 0.0) warm_split[i] = center[i];
        else warm_split[i + m] = -center[i];
    }
    auto r = detail::smo_solve(prob, tol, &warm_split);

    Vector alpha(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double common = std::min(r.beta[i], r.beta[i + m]);
        alpha[i] = (r.beta[i] - common) - (r.beta[i + m] - common);
    }
    sol.alpha.values = alpha;
    sol.alpha.task = task;
    sol.iterations = r.iterations;
    sol.kkt_violation = r.kkt_violation;
    Vector u = K.multiply(alpha);
    double quad = 0.0, l1 = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        quad += alpha[i] * u[i];
        l1 += std::abs(alpha[i]);
        lin += labels_or_targets[i] * alpha[i];
    }
    sol.objective = -0.5 * quad - epsilon * l1 + lin;
    return sol;
}

}  // namespace tkl
