#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tkl/exponents.hpp"
#include "tkl/matrix.hpp"

namespace tkl {

/// Basis configuration for the tessellated kernel family. The data domain is
/// the box [a, b]; integration runs over the padded box [a - delta, b + delta].
struct TKBasisConfig {
    std::size_t n_features = 0;
    int degree = 0;
    Vector domain_lower;   // a
    Vector domain_upper;   // b
    Vector padding;        // delta, per dimension, strictly positive

    void validate() const {
        if (n_features < 1) throw std::invalid_argument("TKBasisConfig: n_features must be >= 1");
        if (degree < 0) throw std::invalid_argument("TKBasisConfig: degree must be >= 0");
        if (domain_lower.size() != n_features || domain_upper.size() != n_features ||
            padding.size() != n_features)
            throw std::invalid_argument("TKBasisConfig: vector length mismatch");
        for (std::size_t i = 0; i < n_features; ++i) {
            if (!(domain_lower[i] < domain_upper[i]))
                throw std::invalid_argument("TKBasisConfig: requires domain_lower < domain_upper");
            if (!(padding[i] > 0.0))
                throw std::invalid_argument("TKBasisConfig: padding must be strictly positive");
        }
    }

    static TKBasisConfig unit_box(std::size_t n, int degree, double delta) {
        TKBasisConfig cfg;
        cfg.n_features = n;
        cfg.degree = degree;
        cfg.domain_lower.assign(n, 0.0);
        cfg.domain_upper.assign(n, 1.0);
        cfg.padding.assign(n, delta);
        cfg.validate();
        return cfg;
    }

    Vector box_lower() const {
        Vector lo(n_features);
        for (std::size_t i = 0; i < n_features; ++i) lo[i] = domain_lower[i] - padding[i];
        return lo;
    }
    Vector box_upper() const {
        Vector hi(n_features);
        for (std::size_t i = 0; i < n_features; ++i) hi[i] = domain_upper[i] + padding[i];
        return hi;
    }
};

/// T(x, y, zeta) = prod_j (y_j^zeta_j - x_j^zeta_j) / zeta_j.
/// Every zeta_j must be >= 1 (the formula divides by it).
inline double t_integral(const Vector& x, const Vector& y, const std::vector<int>& zeta) {
    if (x.size() != y.size() || x.size() != zeta.size())
        throw std::invalid_argument("t_integral: length mismatch");
    double r = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (zeta[j] < 1) throw std::invalid_argument("t_integral: zeta entries must be >= 1");
        r *= (std::pow(y[j], zeta[j]) - std::pow(x[j], zeta[j])) / zeta[j];
    }
    return r;
}

namespace detail {

inline double int_pow(double base, int e) {
    double r = 1.0;
    while (e-- > 0) r *= base;
    return r;
}

}  // namespace detail

/// G_{i,j}(x, y) for the tessellated basis: the integral over the padded box
/// of N_i(z, x) N_j(z, y), where N carries a monomial times an orthant
/// indicator (first half of the index range) or its complement (second half).
/// Indices are 0-based in [0, 2 * half_size).
inline double eval_G(std::size_t i, std::size_t j, const Vector& x, const Vector& y,
                     const TKBasisConfig& cfg, const ExponentTable& table) {
    const std::size_t h = table.half_size();
    if (i >= 2 * h || j >= 2 * h) throw std::out_of_range("eval_G: basis index out of range");
    if (x.size() != cfg.n_features || y.size() != cfg.n_features)
        throw std::invalid_argument("eval_G: point dimension mismatch");

    const bool i_low = i < h;
    const bool j_low = j < h;
    const ExponentPair& pi = table.pairs[i_low ? i : i - h];
    const ExponentPair& pj = table.pairs[j_low ? j : j - h];

    const std::size_t n = cfg.n_features;
    Vector pmax(n), lo = cfg.box_lower(), hi = cfg.box_upper();
    std::vector<int> gsum(n);
    double prefix = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        pmax[k] = std::max(x[k], y[k]);
        gsum[k] = pi.gamma_exp[k] + pj.gamma_exp[k] + 1;
        prefix *= detail::int_pow(x[k], pi.delta_exp[k]) * detail::int_pow(y[k], pj.delta_exp[k]);
    }

    const double t_max = t_integral(pmax, hi, gsum);
    if (i_low && j_low) return prefix * t_max;
    if (i_low && !j_low) return prefix * (t_integral(x, hi, gsum) - t_max);
    if (!i_low && j_low) return prefix * (t_integral(y, hi, gsum) - t_max);
    return prefix * (t_integral(lo, hi, gsum) - t_integral(x, hi, gsum) -
                     t_integral(y, hi, gsum) + t_max);
}

/// All n_P x n_P basis values for one sample pair, row-major. Shares the
/// per-dimension power tables across entries; used by the Gram assembly.
inline void eval_G_block(const Vector& x, const Vector& y, const TKBasisConfig& cfg,
                         const ExponentTable& table, double* out /* n_p*n_p row-major */) {
    const std::size_t h = table.half_size();
    const std::size_t np = 2 * h;
    const std::size_t n = cfg.n_features;
    const int maxp = 2 * cfg.degree + 1;

    const Vector lo = cfg.box_lower(), hi = cfg.box_upper();

    // pow_*[k][e] = value^e, e in [0, maxp]
    auto build = [&](const Vector& v) {
        std::vector<double> p(n * static_cast<std::size_t>(maxp + 1));
        for (std::size_t k = 0; k < n; ++k) {
            p[k * (maxp + 1)] = 1.0;
            for (int e = 1; e <= maxp; ++e)
                p[k * (maxp + 1) + e] = p[k * (maxp + 1) + e - 1] * v[k];
        }
        return p;
    };
    Vector pmax(n);
    for (std::size_t k = 0; k < n; ++k) pmax[k] = std::max(x[k], y[k]);
    const auto px = build(x), py = build(y), pm = build(pmax), pb = build(hi), pa = build(lo);

    // Monomials x^{delta_I}, y^{delta_J} per base index.
    std::vector<double> mono_x(h), mono_y(h);
    for (std::size_t I = 0; I < h; ++I) {
        double mx = 1.0, my = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            mx *= px[k * (maxp + 1) + table.pairs[I].delta_exp[k]];
            my *= py[k * (maxp + 1) + table.pairs[I].delta_exp[k]];
        }
        mono_x[I] = mx;
        mono_y[I] = my;
    }

    for (std::size_t I = 0; I < h; ++I) {
        for (std::size_t J = 0; J < h; ++J) {
            double t_x = 1.0, t_y = 1.0, t_m = 1.0, t_a = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                const int z = table.pairs[I].gamma_exp[k] + table.pairs[J].gamma_exp[k] + 1;
                const double bz = pb[k * (maxp + 1) + z];
                t_x *= (bz - px[k * (maxp + 1) + z]) / z;
                t_y *= (bz - py[k * (maxp + 1) + z]) / z;
                t_m *= (bz - pm[k * (maxp + 1) + z]) / z;
                t_a *= (bz - pa[k * (maxp + 1) + z]) / z;
            }
            const double prefix = mono_x[I] * mono_y[J];
            out[I * np + J] = prefix * t_m;
            out[I * np + (J + h)] = prefix * (t_x - t_m);
            out[(I + h) * np + J] = prefix * (t_y - t_m);
            out[(I + h) * np + (J + h)] = prefix * (t_a - t_x - t_y + t_m);
        }
    }
}

/// k(x, y) = sum_{i,j} P_{i,j} G_{i,j}(x, y).
inline double eval_kernel(const Vector& x, const Vector& y, const SymmetricMatrix& P,
                          const TKBasisConfig& cfg, const ExponentTable& table) {
    const std::size_t np = table.n_p();
    if (P.order() != np) throw std::invalid_argument("eval_kernel: P order does not match basis");
    std::vector<double> block(np * np);
    eval_G_block(x, y, cfg, table, block.data());
    double s = 0.0;
    const auto& pd = P.data();
    for (std::size_t k = 0; k < block.size(); ++k) s += pd[k] * block[k];
    return s;
}

}  // namespace tkl
