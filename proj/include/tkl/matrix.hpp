#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tkl {

using Vector = std::vector<double>;

/// Dense real symmetric matrix. Entries are symmetrized on construction so
/// that at(i,j) == at(j,i) holds exactly.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    explicit SymmetricMatrix(std::size_t order)
        : order_(order), data_(order * order, 0.0) {
        if (order == 0) throw std::invalid_argument("SymmetricMatrix: order must be positive");
    }

    static SymmetricMatrix identity(std::size_t order) {
        SymmetricMatrix m(order);
        for (std::size_t i = 0; i < order; ++i) m.data_[i * order + i] = 1.0;
        return m;
    }

    /// Builds from row-major dense storage, averaging A and A^T.
    static SymmetricMatrix from_dense(std::size_t order, const std::vector<double>& dense) {
        if (dense.size() != order * order)
            throw std::invalid_argument("SymmetricMatrix: dense size mismatch");
        SymmetricMatrix m(order);
        for (std::size_t i = 0; i < order; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double v = 0.5 * (dense[i * order + j] + dense[j * order + i]);
                m.data_[i * order + j] = v;
                m.data_[j * order + i] = v;
            }
        return m;
    }

    std::size_t order() const { return order_; }

    double at(std::size_t i, std::size_t j) const { return data_[i * order_ + j]; }

    /// Sets entry (i,j) and its mirror (j,i).
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * order_ + j] = v;
        data_[j * order_ + i] = v;
    }

    const std::vector<double>& data() const { return data_; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < order_; ++i) t += data_[i * order_ + i];
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    /// Frobenius inner product <A, B>.
    double inner(const SymmetricMatrix& other) const {
        if (other.order_ != order_)
            throw std::invalid_argument("SymmetricMatrix::inner: order mismatch");
        double s = 0.0;
        for (std::size_t k = 0; k < data_.size(); ++k) s += data_[k] * other.data_[k];
        return s;
    }

    /// y = A x
    Vector multiply(const Vector& x) const {
        if (x.size() != order_) throw std::invalid_argument("SymmetricMatrix::multiply: size mismatch");
        Vector y(order_, 0.0);
        for (std::size_t i = 0; i < order_; ++i) {
            double s = 0.0;
            const double* row = &data_[i * order_];
            for (std::size_t j = 0; j < order_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    /// this + c * other
    SymmetricMatrix axpy(double c, const SymmetricMatrix& other) const {
        if (other.order_ != order_)
            throw std::invalid_argument("SymmetricMatrix::axpy: order mismatch");
        SymmetricMatrix r(order_);
        for (std::size_t k = 0; k < data_.size(); ++k)
            r.data_[k] = data_[k] + c * other.data_[k];
        return r;
    }

    SymmetricMatrix scaled(double c) const {
        SymmetricMatrix r(order_);
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = c * data_[k];
        return r;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t order_ = 0;
    std::vector<double> data_;
};

inline SymmetricMatrix outer_scaled(const Vector& v, double scale) {
    SymmetricMatrix m(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) m.set(i, j, scale * v[i] * v[j]);
    return m;
}

}  // namespace tkl
