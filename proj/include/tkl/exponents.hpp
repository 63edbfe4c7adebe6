#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tkl {

/// One monomial exponent pair (delta, gamma), each a length-n vector of
/// nonnegative integers.
struct ExponentPair {
    std::vector<int> delta_exp;
    std::vector<int> gamma_exp;
};

/// The ordered index set of exponent pairs with |delta| + |gamma| <= d.
/// Ordering is graded lexicographic on the concatenated 2n-vector, so the
/// basis ordering is deterministic across runs.
struct ExponentTable {
    std::vector<ExponentPair> pairs;
    std::size_t n_features = 0;
    std::size_t half_size() const { return pairs.size(); }
    std::size_t n_p() const { return 2 * pairs.size(); }
};

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline ExponentTable enumerate_exponents(std::size_t n, int d) {
    if (n < 1) throw std::invalid_argument("enumerate_exponents: n must be >= 1");
    if (d < 0) throw std::invalid_argument("enumerate_exponents: d must be >= 0");

    const std::size_t dims = 2 * n;
    std::vector<std::vector<int>> all;

    // Grades 0..d; within a grade, lexicographic on the concatenated 2n-vector.
    for (int total = 0; total <= d; ++total) {
        std::vector<std::vector<int>> grade;
        std::vector<int> v(dims, 0);
        auto gen = [&](auto&& self, std::size_t pos, int rem) -> void {
            if (pos == dims - 1) {
                v[pos] = rem;
                grade.push_back(v);
                return;
            }
            for (int e = 0; e <= rem; ++e) {
                v[pos] = e;
                self(self, pos + 1, rem - e);
            }
            v[pos] = 0;
        };
        gen(gen, 0, total);
        std::sort(grade.begin(), grade.end());
        for (auto& g : grade) all.push_back(std::move(g));
    }

    ExponentTable table;
    table.n_features = n;
    table.pairs.reserve(all.size());
    for (const auto& v : all) {
        ExponentPair p;
        p.delta_exp.assign(v.begin(), v.begin() + static_cast<long>(n));
        p.gamma_exp.assign(v.begin() + static_cast<long>(n), v.end());
        table.pairs.push_back(std::move(p));
    }
    return table;
}

}  // namespace tkl
