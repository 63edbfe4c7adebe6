#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tkl/matrix.hpp"

namespace tkl {

/// Eigenvalues descending; eigenvectors stored column-major (column i pairs
/// with eigenvalues[i]), each unit norm with its largest-magnitude entry
/// positive so results are deterministic.
struct EigenDecomposition {
    Vector eigenvalues;
    std::vector<Vector> eigenvectors;  // eigenvectors[i] is the i-th column
};

/// Cyclic Jacobi rotations on a dense symmetric matrix.
inline EigenDecomposition jacobi_eig(const SymmetricMatrix& A) {
    if (!A.all_finite()) throw std::invalid_argument("jacobi_eig: non-finite entries");
    const std::size_t n = A.order();
    std::vector<double> a(A.data());
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
        return std::sqrt(2.0 * s);
    };

    const double scale = std::max(1.0, A.frobenius_norm());
    const double tol = 1e-14 * scale;
    const int max_sweeps = 64;

    for (int sweep = 0; sweep < max_sweeps && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

    EigenDecomposition e;
    e.eigenvalues.resize(n);
    e.eigenvectors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = order[i];
        e.eigenvalues[i] = a[c * n + c];
        Vector col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k * n + c];
        // Sign canonicalization: largest-magnitude entry positive.
        std::size_t arg = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(col[k]) > std::abs(col[arg])) arg = k;
        if (col[arg] < 0.0)
            for (double& x : col) x = -x;
        e.eigenvectors[i] = std::move(col);
    }
    return e;
}

/// Largest or smallest eigenpair; the vector is unit norm, sign-canonicalized.
inline std::pair<double, Vector> extremal_eigpair(const SymmetricMatrix& A, bool maximum) {
    const EigenDecomposition e = jacobi_eig(A);
    const std::size_t idx = maximum ? 0 : e.eigenvalues.size() - 1;
    return {e.eigenvalues[idx], e.eigenvectors[idx]};
}

/// Kernel parameter carrier: P symmetric PSD with trace(P) = n_P.
struct TraceSimplexMatrix {
    SymmetricMatrix P;

    static bool is_feasible(const SymmetricMatrix& P, double n_p) {
        if (std::abs(P.trace() - n_p) > 1e-9 * n_p) return false;
        const auto [lmin, vec] = extremal_eigpair(P, false);
        (void)vec;
        return lmin >= -1e-8 * n_p;
    }
};

/// Frobenius-nearest point of {P >= 0, trace(P) = n_p} to A: eigendecompose,
/// then bisect for the shift y with sum_i max(lambda_i - y, 0) = n_p and
/// rebuild from the clipped spectrum. The lower bracket is extended to
/// min(lambda) - n_p, which guarantees the residual is nonnegative there even
/// when trace(A) < n_p.
inline SymmetricMatrix project_trace_simplex(const SymmetricMatrix& A, double n_p,
                                             double eps = -1.0) {
    if (eps <= 0.0) eps = 1e-10 * n_p;
    const EigenDecomposition e = jacobi_eig(A);
    const std::size_t n = A.order();

    auto residual = [&](double y) {
        double s = 0.0;
        for (double l : e.eigenvalues) s += std::max(l - y, 0.0);
        return s - n_p;
    };

    double yl = e.eigenvalues.back() - n_p;  // residual(yl) >= 0 by construction
    double yu = e.eigenvalues.front();       // residual(yu) = -n_p < 0
    double y = 0.5 * (yl + yu);
    // residual is nonincreasing in y; move the lower bracket up while r >= 0.
    for (int it = 0; it < 200; ++it) {
        y = 0.5 * (yl + yu);
        const double r = residual(y);
        if (std::abs(r) <= eps) break;
        if (r >= 0.0)
            yl = y;
        else
            yu = y;
    }

    SymmetricMatrix P(n);
    std::vector<double> dense(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::max(e.eigenvalues[i] - y, 0.0);
        if (w == 0.0) continue;
        const Vector& vec = e.eigenvectors[i];
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) dense[r * n + c] += w * vec[r] * vec[c];
    }
    return SymmetricMatrix::from_dense(n, dense);
}

}  // namespace tkl
