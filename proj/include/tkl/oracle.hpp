#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "tkl/kernel.hpp"

namespace tkl {

/// Ground-truth evaluation of G_{i,j}(x, y) by exact cell decomposition:
/// the padded box is split at the coordinates of x and y per dimension, so on
/// each resulting cell both indicators are constant and the integrand is a
/// single monomial in z, integrated in closed form. No sampling is involved,
/// so agreement with eval_G can be required to tight tolerance.
inline double quadrature_oracle_G(std::size_t i, std::size_t j, const Vector& x, const Vector& y,
                                  const TKBasisConfig& cfg, const ExponentTable& table) {
    const std::size_t h = table.half_size();
    if (i >= 2 * h || j >= 2 * h)
        throw std::out_of_range("quadrature_oracle_G: basis index out of range");

    const bool i_low = i < h;
    const bool j_low = j < h;
    const ExponentPair& pi = table.pairs[i_low ? i : i - h];
    const ExponentPair& pj = table.pairs[j_low ? j : j - h];

    const std::size_t n = cfg.n_features;
    const Vector lo = cfg.box_lower(), hi = cfg.box_upper();

    // Per-dimension interval edges: box edges plus x_k, y_k (deduplicated).
    std::vector<std::vector<double>> edges(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> e = {lo[k], hi[k]};
        for (double v : {x[k], y[k]})
            if (v > lo[k] && v < hi[k]) e.push_back(v);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        edges[k] = std::move(e);
    }

    double prefix = 1.0;
    for (std::size_t k = 0; k < n; ++k)
        prefix *= detail::int_pow(x[k], pi.delta_exp[k]) * detail::int_pow(y[k], pj.delta_exp[k]);

    // Walk the cell grid with a mixed-radix counter.
    std::vector<std::size_t> idx(n, 0);
    double total = 0.0;
    while (true) {
        double cell = 1.0;
        bool ge_x = true, ge_y = true;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = edges[k][idx[k]], b = edges[k][idx[k] + 1];
            const double mid = 0.5 * (a + b);
            if (mid < x[k]) ge_x = false;
            if (mid < y[k]) ge_y = false;
            const int g = pi.gamma_exp[k] + pj.gamma_exp[k] + 1;
            cell *= (detail::int_pow(b, g) - detail::int_pow(a, g)) / g;
        }
        const double wi = i_low ? (ge_x ? 1.0 : 0.0) : (ge_x ? 0.0 : 1.0);
        const double wj = j_low ? (ge_y ? 1.0 : 0.0) : (ge_y ? 0.0 : 1.0);
        total += wi * wj * cell;

        std::size_t k = 0;
        while (k < n && ++idx[k] == edges[k].size() - 1) idx[k++] = 0;
        if (k == n) break;
    }
    return prefix * total;
}

}  // namespace tkl
