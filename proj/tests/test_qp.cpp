#include <random>

#include "doctest.h"
#include "support/brute_force_qp.hpp"
#include "support/fixtures.hpp"
#include "tkl/matrix.hpp"
#include "tkl/qp.hpp"

using namespace tkl;

namespace {

std::vector<std::vector<double>> to_dense(const SymmetricMatrix& K) {
    std::vector<std::vector<double>> out(K.order(), std::vector<double>(K.order()));
    for (std::size_t i = 0; i < K.order(); ++i)
        for (std::size_t j = 0; j < K.order(); ++j) out[i][j] = K.at(i, j);
    return out;
}

}  // namespace

TEST_CASE("hand-solved SVC instance: K=I, y=(+1,-1)") {
    const SymmetricMatrix K = SymmetricMatrix::identity(2);
    SUBCASE("C=1: interior optimum alpha=(1,1), objective 1") {
        const QPSolution s = solve_svc_dual(K, {1.0, -1.0}, 1.0, 1e-8);
        CHECK(s.alpha.values[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(s.alpha.values[1] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("C=0.5: box-clipped optimum alpha=(0.5,0.5), objective 0.75") {
        const QPSolution s = solve_svc_dual(K, {1.0, -1.0}, 0.5, 1e-8);
        CHECK(s.alpha.values[0] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(s.alpha.values[1] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(s.objective == doctest::Approx(0.75).epsilon(1e-8));
    }
}

TEST_CASE("hand-solved SVR instance: K=I, y=(1,-1), eps=0, C=10") {
    const SymmetricMatrix K = SymmetricMatrix::identity(2);
    const QPSolution s = solve_svr_dual(K, {1.0, -1.0}, 10.0, 0.0, 1e-10);
    CHECK(s.alpha.values[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(s.alpha.values[1] == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("solver rejects degenerate input") {
    const SymmetricMatrix K = SymmetricMatrix::identity(2);
    CHECK_THROWS(solve_svc_dual(K, {1.0, 1.0}, 1.0));
    SymmetricMatrix bad(2);
    bad.set(0, 0, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS(solve_svc_dual(bad, {1.0, -1.0}, 1.0));
}

TEST_CASE("SVC matches brute-force oracle on random instances") {
    std::mt19937 rng(101);
    std::uniform_int_distribution<std::size_t> msize(2, 6);
    std::uniform_real_distribution<double> cdist(0.5, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = msize(rng);
        const SymmetricMatrix K = fixtures::random_gram(m, rng);
        const Vector y = fixtures::random_labels(m, rng);
        const double C = cdist(rng);
        const QPSolution s = solve_svc_dual(K, y, C, 1e-9);
        const auto oracle = bfqp::solve(bfqp::svc_problem(to_dense(K), y, C));
        // solver reports the maximized dual; the oracle minimizes its negative
        CHECK(s.objective == doctest::Approx(-oracle.objective).epsilon(1e-6).scale(1.0));
        // feasibility of the returned point
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(s.alpha.values[i] >= -1e-12);
            CHECK(s.alpha.values[i] <= C + 1e-12);
            dot += s.alpha.values[i] * y[i];
        }
        CHECK(dot == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
}

TEST_CASE("SVR matches brute-force oracle on random instances") {
    std::mt19937 rng(202);
    std::uniform_int_distribution<std::size_t> msize(2, 6);
    std::uniform_real_distribution<double> cdist(0.5, 2.0);
    std::uniform_real_distribution<double> ydist(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = msize(rng);
        const SymmetricMatrix K = fixtures::random_gram(m, rng);
        Vector y(m);
        for (double& v : y) v = ydist(rng);
        const double C = cdist(rng);
        const double eps = trial % 3 == 0 ? 0.0 : 0.1;
        const QPSolution s = solve_svr_dual(K, y, C, eps, 1e-9);
        const auto oracle = bfqp::solve(bfqp::svr_problem(to_dense(K), y, C, eps));
        CHECK(s.objective == doctest::Approx(-oracle.objective).epsilon(1e-6).scale(1.0));
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(std::abs(s.alpha.values[i]) <= C + 1e-12);
            sum += s.alpha.values[i];
        }
        CHECK(sum == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
}

TEST_CASE("SVR split variables respect complementarity") {
    std::mt19937 rng(7);
    const SymmetricMatrix K = fixtures::random_gram(6, rng);
    Vector y{0.4, -0.2, 0.9, -0.7, 0.1, -0.5};
    const QPSolution s = solve_svr_dual(K, y, 1.0, 0.05, 1e-9);
    // returned alpha is the net coefficient; re-derive feasibility bounds
    for (double a : s.alpha.values) CHECK(std::abs(a) <= 1.0 + 1e-12);
}

TEST_CASE("warm start does not change the optimum and speeds convergence") {
    std::mt19937 rng(303);
    const SymmetricMatrix K = fixtures::random_gram(8, rng);
    const Vector y = fixtures::random_labels(8, rng);
    const QPSolution cold = solve_svc_dual(K, y, 1.0, 1e-9);
    const QPSolution warm = solve_svc_dual(K, y, 1.0, 1e-9, &cold.alpha.values);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
    CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("second-order working-set selection reaches the same optimum") {
    std::mt19937 rng(404);
    const SymmetricMatrix K = fixtures::random_gram(10, rng);
    const Vector y = fixtures::random_labels(10, rng);
    const QPSolution first = solve_svc_dual(K, y, 1.5, 1e-9, nullptr, false);
    const QPSolution second = solve_svc_dual(K, y, 1.5, 1e-9, nullptr, true);
    CHECK(first.objective == doctest::Approx(second.objective).epsilon(1e-7));
}

TEST_CASE("SVC bias satisfies KKT margins on separable data") {
    // u_i - y_i should equal the bias for free support vectors
    SymmetricMatrix K(4);
    std::mt19937 rng(505);
    const SymmetricMatrix G = fixtures::random_gram(4, rng);
    const Vector y{1.0, 1.0, -1.0, -1.0};
    const QPSolution s = solve_svc_dual(G, y, 10.0, 1e-10);
    for (std::size_t i = 0; i < 4; ++i) {
        if (s.alpha.values[i] > 1e-8 && s.alpha.values[i] < 10.0 - 1e-8) {
            double u = 0.0;
            for (std::size_t j = 0; j < 4; ++j)
                u += s.alpha.values[j] * y[j] * G.at(i, j);
            CHECK(u - y[i] == doctest::Approx(s.bias).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("proximal QP matches the brute-force oracle (classification)") {
    std::mt19937 rng(606);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 4;
        const SymmetricMatrix K = fixtures::random_gram(m, rng);
        const Vector y = fixtures::random_labels(m, rng);
        const double C = 1.0, tau = 0.5;
        Vector center(m);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (double& c : center) c = C * unit(rng);

        const QPSolution s = solve_prox_qp(K, Task::classification, y, C, 0.0, tau, center, 1e-10);

        // oracle on the prox-augmented problem
        auto pr = bfqp::svc_problem(to_dense(K), y, C);
        for (std::size_t i = 0; i < m; ++i) {
            pr.Q[i][i] += 1.0 / tau;
            pr.p[i] -= y[i] * y[i] * center[i] / tau;  // beta-space linear term
        }
        const auto oracle = bfqp::solve(pr);
        // compare the argmin (objective conventions differ by the prox term)
        for (std::size_t i = 0; i < m; ++i)
            CHECK(s.alpha.values[i] == doctest::Approx(oracle.b[i]).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("proximal QP approaches the plain solution as tau grows") {
    std::mt19937 rng(707);
    const SymmetricMatrix K = fixtures::random_gram(6, rng);
    const Vector y = fixtures::random_labels(6, rng);
    const QPSolution plain = solve_svc_dual(K, y, 1.0, 1e-10);
    const Vector center(6, 0.0);
    const QPSolution prox =
        solve_prox_qp(K, Task::classification, y, 1.0, 0.0, 1e9, center, 1e-10);
    CHECK(prox.objective == doctest::Approx(plain.objective).epsilon(1e-5));
}

TEST_CASE("objective is a concavity certificate: perturbation never improves") {
    std::mt19937 rng(808);
    const SymmetricMatrix K = fixtures::random_gram(6, rng);
    const Vector y = fixtures::random_labels(6, rng);
    const double C = 1.0;
    const QPSolution s = solve_svc_dual(K, y, C, 1e-10);
    const auto dual_value = [&](const Vector& a) {
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            lin += a[i];
            for (std::size_t j = 0; j < a.size(); ++j)
                quad += a[i] * y[i] * a[j] * y[j] * K.at(i, j);
        }
        return lin - 0.5 * quad;
    };
    CHECK(dual_value(s.alpha.values) == doctest::Approx(s.objective).epsilon(1e-10));
    for (int trial = 0; trial < 200; ++trial) {
        const Vector a = fixtures::random_feasible_alpha(y, C, rng);
        CHECK(dual_value(a) <= s.objective + 1e-6);
    }
}
