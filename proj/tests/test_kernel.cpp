#include <random>

#include "doctest.h"
#include "tkl/exponents.hpp"
#include "tkl/kernel.hpp"
#include "tkl/matrix.hpp"
#include "tkl/oracle.hpp"

using namespace tkl;

TEST_CASE("binomial coefficients") {
    CHECK(binomial(0, 0) == 1);
    CHECK(binomial(5, 2) == 10);
    CHECK(binomial(5, 0) == 1);
    CHECK(binomial(9, 1) == 9);
}

TEST_CASE("exponent table size is 2*C(2n+d, d)") {
    for (std::size_t n : {1u, 2u, 3u}) {
        for (int d : {0, 1, 2}) {
            const auto t = enumerate_exponents(n, d);
            const std::size_t expect = binomial(2 * n + static_cast<std::size_t>(d),
                                                static_cast<std::size_t>(d));
            CHECK(t.half_size() == expect);
            CHECK(t.n_p() == 2 * expect);
            for (const auto& pair : t.pairs) {
                CHECK(pair.delta_exp.size() == n);
                CHECK(pair.gamma_exp.size() == n);
                int total = 0;
                for (int e : pair.delta_exp) total += e;
                for (int e : pair.gamma_exp) total += e;
                CHECK(total <= d);
            }
        }
    }
}

TEST_CASE("exponent table is graded: degrees are nondecreasing") {
    const auto t = enumerate_exponents(2, 2);
    int prev = 0;
    for (const auto& pair : t.pairs) {
        int total = 0;
        for (int e : pair.delta_exp) total += e;
        for (int e : pair.gamma_exp) total += e;
        CHECK(total >= prev);
        prev = total;
    }
}

TEST_CASE("t_integral basics") {
    // 1-D: (y^z - x^z)/z
    CHECK(t_integral({0.0}, {1.0}, {1}) == doctest::Approx(1.0));
    CHECK(t_integral({0.5}, {1.5}, {2}) == doctest::Approx((2.25 - 0.25) / 2.0));
    // multiplies across dimensions
    CHECK(t_integral({0.0, 0.0}, {2.0, 3.0}, {1, 1}) == doctest::Approx(6.0));
    CHECK_THROWS_AS((void)t_integral({0.0}, {1.0}, {0}), std::invalid_argument);
}

TEST_CASE("degree-0 worked value and closed form") {
    const auto cfg = TKBasisConfig::unit_box(1, 0, 0.5);
    const auto t = enumerate_exponents(1, 0);
    CHECK(eval_G(0, 0, {0.2}, {0.6}, cfg, t) == doctest::Approx(0.9).epsilon(1e-14));

    // closed form: prod_i (b_i + delta_i - max(x_i, y_i)) for the low-low block
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t n : {1u, 2u, 3u}) {
        const auto cfgn = TKBasisConfig::unit_box(n, 0, 0.5);
        const auto tn = enumerate_exponents(n, 0);
        for (int trial = 0; trial < 100; ++trial) {
            Vector x(n), y(n);
            double expect = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = unit(rng);
                y[k] = unit(rng);
                expect *= 1.5 - std::max(x[k], y[k]);
            }
            CHECK(eval_G(0, 0, x, y, cfgn, tn) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("eval_G matches the quadrature oracle") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t n : {1u, 2u}) {
        for (int d : {0, 1, 2}) {
            const auto cfg = TKBasisConfig::unit_box(n, d, 0.5);
            const auto t = enumerate_exponents(n, d);
            std::uniform_int_distribution<std::size_t> pick(0, t.n_p() - 1);
            for (int trial = 0; trial < 50; ++trial) {
                const std::size_t i = pick(rng), j = pick(rng);
                Vector x(n), y(n);
                for (std::size_t k = 0; k < n; ++k) {
                    x[k] = unit(rng);
                    y[k] = unit(rng);
                }
                const double got = eval_G(i, j, x, y, cfg, t);
                const double want = quadrature_oracle_G(i, j, x, y, cfg, t);
                CHECK(got == doctest::Approx(want).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("transpose symmetry G(i,j,x,y) = G(j,i,y,x)") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto cfg = TKBasisConfig::unit_box(2, 2, 0.5);
    const auto t = enumerate_exponents(2, 2);
    std::uniform_int_distribution<std::size_t> pick(0, t.n_p() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t i = pick(rng), j = pick(rng);
        Vector x{unit(rng), unit(rng)}, y{unit(rng), unit(rng)};
        CHECK(eval_G(i, j, x, y, cfg, t) ==
              doctest::Approx(eval_G(j, i, y, x, cfg, t)).epsilon(1e-12));
    }
}

TEST_CASE("eval_G_block agrees with elementwise eval_G") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto cfg = TKBasisConfig::unit_box(2, 1, 0.5);
    const auto t = enumerate_exponents(2, 1);
    const std::size_t np = t.n_p();
    Vector x{unit(rng), unit(rng)}, y{unit(rng), unit(rng)};
    std::vector<double> block(np * np);
    eval_G_block(x, y, cfg, t, block.data());
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j)
            CHECK(block[i * np + j] ==
                  doctest::Approx(eval_G(i, j, x, y, cfg, t)).epsilon(1e-12));
}

TEST_CASE("kernel matrix for feasible P is positive semidefinite") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto cfg = TKBasisConfig::unit_box(2, 1, 0.5);
    const auto t = enumerate_exponents(2, 1);
    std::vector<Vector> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({unit(rng), unit(rng)});

    const SymmetricMatrix P = SymmetricMatrix::identity(t.n_p());
    SymmetricMatrix K(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            K.set(i, j, eval_kernel(pts[i], pts[j], P, cfg, t));
    // PSD check via random quadratic forms
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector v(pts.size());
        for (double& vi : v) vi = gauss(rng);
        const Vector Kv = K.multiply(v);
        double q = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) q += v[i] * Kv[i];
        CHECK(q >= -1e-9);
    }
}

TEST_CASE("config validation rejects bad inputs") {
    CHECK_THROWS(TKBasisConfig::unit_box(0, 1, 0.5));
    CHECK_THROWS(TKBasisConfig::unit_box(2, -1, 0.5));
    CHECK_THROWS(TKBasisConfig::unit_box(2, 1, 0.0));
    const auto cfg = TKBasisConfig::unit_box(1, 0, 0.5);
    const auto t = enumerate_exponents(1, 0);
    CHECK_THROWS_AS((void)eval_G(5, 0, {0.1}, {0.2}, cfg, t), std::out_of_range);
}
