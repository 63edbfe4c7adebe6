#pragma once

// Shared synthetic data generators for the test suites.

#include <cmath>
#include <random>
#include <vector>

#include "tkl/matrix.hpp"
#include "tkl/qp.hpp"

namespace fixtures {

// Random PSD Gram matrix A'A / m with a small ridge, entries O(1).
inline tkl::SymmetricMatrix random_gram(std::size_t m, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<tkl::Vector> a(m, tkl::Vector(m));
    for (auto& row : a)
        for (double& v : row) v = gauss(rng);
    tkl::SymmetricMatrix K(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < m; ++k) dot += a[i][k] * a[j][k];
            K.set(i, j, dot / static_cast<double>(m) + (i == j ? 1e-3 : 0.0));
        }
    return K;
}

inline tkl::Vector random_labels(std::size_t m, std::mt19937& rng) {
    tkl::Vector y(m);
    bool has_pos = false, has_neg = false;
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = coin(rng) ? 1.0 : -1.0;
        (y[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos) y[0] = 1.0;
    if (!has_neg) y[m - 1] = -1.0;
    return y;
}

// Two-class checkerboard points in the unit square.
inline void checkerboard(std::size_t m, unsigned seed, std::vector<tkl::Vector>& X,
                         tkl::Vector& y, int cells = 2) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    X.clear();
    y.clear();
    for (std::size_t i = 0; i < m; ++i) {
        const double a = unit(rng), b = unit(rng);
        X.push_back({a, b});
        y.push_back((static_cast<int>(a * cells) + static_cast<int>(b * cells)) % 2 == 0
                        ? 1.0
                        : -1.0);
    }
}

// Noiseless 1-D sine regression samples on [0, 1].
inline void sine(std::size_t m, unsigned seed, std::vector<tkl::Vector>& X, tkl::Vector& y) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    X.clear();
    y.clear();
    for (std::size_t i = 0; i < m; ++i) {
        const double a = unit(rng);
        X.push_back({a});
        y.push_back(std::sin(2.0 * M_PI * a));
    }
}

// 4-feature nonlinear two-class data where kernel-target alignment matters.
inline void aligned4d(std::size_t m, unsigned seed, std::vector<tkl::Vector>& X,
                      tkl::Vector& y) {
    std::mt19937 rng(seed + 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    X.clear();
    y.clear();
    for (std::size_t i = 0; i < m; ++i) {
        tkl::Vector x(4);
        for (double& v : x) v = unit(rng);
        const double s = x[0] * x[0] + std::sin(3.0 * x[1]) + x[2] * x[3];
        X.push_back(x);
        y.push_back(s > 0.9 ? 1.0 : -1.0);
    }
}

// Random feasible dual point for the classification constraint set
// {sum_i a_i y_i = 0, 0 <= a <= C}: random draw, then rebalanced per class.
inline tkl::Vector random_feasible_alpha(const tkl::Vector& y, double C, std::mt19937& rng) {
    const std::size_t m = y.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    tkl::Vector a(m);
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        a[i] = C * unit(rng);
        (y[i] > 0 ? pos : neg) += a[i];
    }
    const double target = std::min(pos, neg);
    for (std::size_t i = 0; i < m; ++i)
        a[i] *= (y[i] > 0 ? target / pos : target / neg);
    return a;
}

// Random point of the trace simplex {P >= 0, trace(P) = n_p}: a convex
// combination of random rank-1 terms.
inline tkl::SymmetricMatrix random_feasible_P(std::size_t n_p, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    tkl::SymmetricMatrix P(n_p);
    const int terms = 3;
    tkl::Vector w(terms);
    double wsum = 0.0;
    for (double& wi : w) {
        wi = unit(rng) + 1e-3;
        wsum += wi;
    }
    for (int t = 0; t < terms; ++t) {
        tkl::Vector v(n_p);
        double n2 = 0.0;
        for (double& vi : v) {
            vi = gauss(rng);
            n2 += vi * vi;
        }
        const double coef = static_cast<double>(n_p) * (w[t] / wsum) / n2;
        for (std::size_t i = 0; i < n_p; ++i)
            for (std::size_t j = 0; j <= i; ++j) P.set(i, j, P.at(i, j) + coef * v[i] * v[j]);
    }
    return P;
}

}  // namespace fixtures
