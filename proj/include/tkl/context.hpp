#pragma once

#include <cstddef>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tkl/kernel.hpp"
#include "tkl/matrix.hpp"

namespace tkl {

namespace detail {

inline unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Static partition of [0, count) into contiguous chunks, one task per chunk.
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        fn(0, count, 0);
        return;
    }
    const unsigned t = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(t);
    const std::size_t chunk = (count + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, w] { fn(lo, hi, w); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Shared read-only state for repeated Gram and D assembly over one sample
/// set. The full basis tensor G_{i,j}(x_k, x_l) is cached when it fits the
/// byte budget; otherwise blocks are recomputed per call.
class KernelContext {
public:
    KernelContext(TKBasisConfig cfg, ExponentTable table, std::vector<Vector> samples,
                  std::size_t cache_budget_bytes = std::size_t{2} << 30, int threads = 0)
        : cfg_(std::move(cfg)),
          table_(std::move(table)),
          samples_(std::move(samples)),
          threads_(detail::resolve_threads(threads)) {
        cfg_.validate();
        if (samples_.empty()) throw std::invalid_argument("KernelContext: empty sample set");
        for (const auto& s : samples_)
            if (s.size() != cfg_.n_features)
                throw std::invalid_argument("KernelContext: sample dimension mismatch");
        const std::size_t m = samples_.size();
        const std::size_t np = table_.n_p();
        const std::size_t blocks = m * (m + 1) / 2;
        const std::size_t bytes = blocks * np * np * sizeof(double);
        if (bytes <= cache_budget_bytes) {
            cache_.resize(blocks * np * np);
            detail::parallel_chunks(m, threads_, [&](std::size_t lo, std::size_t hi, unsigned) {
                for (std::size_t k = lo; k < hi; ++k)
                    for (std::size_t l = k; l < m; ++l)
                        eval_G_block(samples_[k], samples_[l], cfg_, table_,
                                     cache_.data() + block_offset(k, l) * np * np);
            });
        }
    }

    const TKBasisConfig& config() const { return cfg_; }
    const ExponentTable& table() const { return table_; }
    const std::vector<Vector>& samples() const { return samples_; }
    std::size_t sample_count() const { return samples_.size(); }
    std::size_t n_p() const { return table_.n_p(); }
    bool cached() const { return !cache_.empty(); }

    /// m x m Gram matrix for kernel parameter P.
    SymmetricMatrix kernel_matrix(const SymmetricMatrix& P) const {
        const std::size_t m = samples_.size();
        const std::size_t np = table_.n_p();
        if (P.order() != np)
            throw std::invalid_argument("kernel_matrix: P order does not match basis");
        SymmetricMatrix K(m);
        const auto& pd = P.data();
        detail::parallel_chunks(m, threads_, [&](std::size_t lo, std::size_t hi, unsigned) {
            std::vector<double> scratch(cache_.empty() ? np * np : 0);
            for (std::size_t k = lo; k < hi; ++k) {
                for (std::size_t l = k; l < m; ++l) {
                    const double* block = fetch(k, l, scratch.data());
                    double s = 0.0;
                    for (std::size_t t = 0; t < np * np; ++t) s += pd[t] * block[t];
                    K.set(k, l, s);
                }
            }
        });
        return K;
    }

    /// D_{i,j} = sum_{k,l} w_k G_{i,j}(x_k, x_l) w_l for weights w = e * alpha.
    SymmetricMatrix assemble_D(const Vector& weights) const {
        const std::size_t m = samples_.size();
        const std::size_t np = table_.n_p();
        if (weights.size() != m) throw std::invalid_argument("assemble_D: weight size mismatch");

        // Accumulate into a fixed set of stripes (k -> stripe k % kStripes) and
        // reduce them in a fixed order, so the result is bitwise identical for
        // any thread count.
        constexpr std::size_t kStripes = 16;
        std::vector<std::vector<double>> partial(kStripes, std::vector<double>(np * np, 0.0));
        detail::parallel_chunks(kStripes, threads_, [&](std::size_t lo, std::size_t hi, unsigned) {
            std::vector<double> scratch(cache_.empty() ? np * np : 0);
            for (std::size_t stripe = lo; stripe < hi; ++stripe) {
            auto& acc = partial[stripe];
            for (std::size_t k = stripe; k < m; k += kStripes) {
                if (weights[k] == 0.0) continue;
                for (std::size_t l = k; l < m; ++l) {
                    if (weights[l] == 0.0) continue;
                    const double c = weights[k] * weights[l];
                    const double* block = fetch(k, l, scratch.data());
                    if (l == k) {
                        for (std::size_t idx = 0; idx < np * np; ++idx) acc[idx] += c * block[idx];
                    } else {
                        // off-diagonal pair contributes block + block^T
                        for (std::size_t i = 0; i < np; ++i)
                            for (std::size_t j = 0; j < np; ++j)
                                acc[i * np + j] += c * (block[i * np + j] + block[j * np + i]);
                    }
                }
            }
            }
        });
        // Fixed reduction order over stripe index.
        std::vector<double>& total = partial[0];
        for (std::size_t w = 1; w < partial.size(); ++w)
            for (std::size_t idx = 0; idx < np * np; ++idx) total[idx] += partial[w][idx];
        return SymmetricMatrix::from_dense(np, total);
    }

private:
    static std::size_t block_offset_static(std::size_t k, std::size_t l, std::size_t m) {
        // upper-triangle row-major: offset(k,l) for k <= l
        return k * m - k * (k + 1) / 2 + l;
    }
    std::size_t block_offset(std::size_t k, std::size_t l) const {
        return block_offset_static(k, l, samples_.size());
    }
    const double* fetch(std::size_t k, std::size_t l, double* scratch) const {
        const std::size_t np = table_.n_p();
        if (!cache_.empty()) return cache_.data() + block_offset(k, l) * np * np;
        eval_G_block(samples_[k], samples_[l], cfg_, table_, scratch);
        return scratch;
    }

    TKBasisConfig cfg_;
    ExponentTable table_;
    std::vector<Vector> samples_;
    unsigned threads_;
    std::vector<double> cache_;
};

/// One-shot wrappers over KernelContext.
inline SymmetricMatrix kernel_matrix(const std::vector<Vector>& samples, const SymmetricMatrix& P,
                                     const TKBasisConfig& cfg, const ExponentTable& table) {
    return KernelContext(cfg, table, samples).kernel_matrix(P);
}

inline SymmetricMatrix assemble_D(const std::vector<Vector>& samples, const Vector& weights,
                                  const TKBasisConfig& cfg, const ExponentTable& table) {
    return KernelContext(cfg, table, samples).assemble_D(weights);
}

}  // namespace tkl
