#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tkl/kernel.hpp"
#include "tkl/matrix.hpp"
#include "tkl/qp.hpp"

namespace tkl {

constexpr int kModelFormatVersion = 1;

/// Per-feature affine scaling fitted on the training data: maps raw inputs
/// to [0, 1]. Constant features map to 0.5.
struct FeatureScaler {
    Vector minimum;
    Vector maximum;

    Vector apply(const Vector& x) const {
        if (x.size() != minimum.size())
            throw std::invalid_argument("FeatureScaler: feature count mismatch");
        Vector out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double span = maximum[k] - minimum[k];
            double v = span > 0.0 ? (x[k] - minimum[k]) / span : 0.5;
            if (v < 0.0) v = 0.0;  // clamp out-of-range test points to the box
            if (v > 1.0) v = 1.0;
            out[k] = v;
        }
        return out;
    }
};

inline FeatureScaler fit_scaler(const std::vector<Vector>& samples) {
    if (samples.empty()) throw std::invalid_argument("fit_scaler: no samples");
    FeatureScaler s;
    s.minimum = samples[0];
    s.maximum = samples[0];
    for (const Vector& x : samples) {
        if (x.size() != s.minimum.size())
            throw std::invalid_argument("fit_scaler: inconsistent feature counts");
        for (std::size_t k = 0; k < x.size(); ++k) {
            s.minimum[k] = std::min(s.minimum[k], x[k]);
            s.maximum[k] = std::max(s.maximum[k], x[k]);
        }
    }
    return s;
}

/// Trained model: kernel parameter matrix, support points with coefficients
/// alpha_i * e_i, bias, and the input scaler.
class TKPredictor {
public:
    TKBasisConfig basis;
    SymmetricMatrix P{1};
    std::vector<Vector> support_points;
    Vector coefficients;  // alpha_i * e_i, pruned to |alpha_i| > prune_tol
    double bias = 0.0;
    Task task = Task::classification;
    FeatureScaler scaler;
    double final_gap = 0.0;

    static constexpr double prune_tol = 1e-12;

    TKPredictor() = default;

    TKPredictor(TKBasisConfig basis_cfg, SymmetricMatrix P_in,
                const std::vector<Vector>& scaled_points, const Vector& alpha,
                const Vector& e, double bias_in, Task task_in, FeatureScaler scaler_in,
                double gap = 0.0)
        : basis(std::move(basis_cfg)),
          P(std::move(P_in)),
          bias(bias_in),
          task(task_in),
          scaler(std::move(scaler_in)),
          final_gap(gap),
          table_(enumerate_exponents(basis.n_features, basis.degree)) {
        basis.validate();
        if (scaled_points.size() != alpha.size() || alpha.size() != e.size())
            throw std::invalid_argument("TKPredictor: size mismatch");
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            if (std::abs(alpha[i]) > prune_tol) {
                support_points.push_back(scaled_points[i]);
                coefficients.push_back(alpha[i] * e[i]);
            }
        }
    }

    std::size_t support_count() const { return support_points.size(); }

    /// f(z) - b for a raw (unscaled) input.
    double decision_value(const Vector& x) const {
        const Vector z = scaler.apply(x);
        double f = 0.0;
        for (std::size_t i = 0; i < support_points.size(); ++i)
            f += coefficients[i] * eval_kernel(support_points[i], z, P, basis, table());
        return f - bias;
    }

    /// Classification: sign of the decision value (ties break to +1).
    /// Regression: the decision value itself.
    double predict(const Vector& x) const {
        const double f = decision_value(x);
        if (task == Task::classification) return f >= 0.0 ? 1.0 : -1.0;
        return f;
    }

    void save(const std::string& path) const;
    static TKPredictor load(const std::string& path);

    const ExponentTable& table() const {
        if (table_.pairs.empty())
            table_ = enumerate_exponents(basis.n_features, basis.degree);
        return table_;
    }

private:
    mutable ExponentTable table_;
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fmt17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_vector(std::ostringstream& os, const Vector& v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) os << ' ';
        os << fmt17(v[k]);
    }
    os << '\n';
}

struct ModelReader {
    std::istringstream in;
    std::string path;
    int line_no = 0;

    explicit ModelReader(std::string body, std::string p)
        : in(std::move(body)), path(std::move(p)) {}

    std::string next_line() {
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error(path + ": truncated model file");
        ++line_no;
        return line;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
    }

    std::string expect_key(const std::string& key) {
        std::string line = next_line();
        if (line.rfind(key + " ", 0) != 0 && line != key)
            fail("expected '" + key + "', got '" + line + "'");
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
    }

    Vector parse_vector(const std::string& text, std::size_t expected) {
        std::istringstream vs(text);
        Vector v;
        double x;
        while (vs >> x) v.push_back(x);
        if (v.size() != expected) fail("expected " + std::to_string(expected) + " values");
        return v;
    }
};

}  // namespace detail

inline void TKPredictor::save(const std::string& path) const {
    std::ostringstream body;
    body << "task " << (task == Task::classification ? "classify" : "regress") << '\n';
    body << "n_features " << basis.n_features << '\n';
    body << "degree " << basis.degree << '\n';
    body << "padding ";
    detail::write_vector(body, basis.padding);
    body << "domain_lower ";
    detail::write_vector(body, basis.domain_lower);
    body << "domain_upper ";
    detail::write_vector(body, basis.domain_upper);
    body << "bias " << detail::fmt17(bias) << '\n';
    body << "final_gap " << detail::fmt17(final_gap) << '\n';

    body << "scaler_min ";
    detail::write_vector(body, scaler.minimum);
    body << "scaler_max ";
    detail::write_vector(body, scaler.maximum);

    body << "P " << P.order() << '\n';
    for (std::size_t i = 0; i < P.order(); ++i) {
        Vector row(P.order());
        for (std::size_t j = 0; j < P.order(); ++j) row[j] = P.at(i, j);
        detail::write_vector(body, row);
    }

    body << "support " << support_points.size() << '\n';
    for (std::size_t i = 0; i < support_points.size(); ++i) {
        body << detail::fmt17(coefficients[i]);
        for (double v : support_points[i]) body << ' ' << detail::fmt17(v);
        body << '\n';
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "tessellate-model version " << kModelFormatVersion << '\n';
    out << "checksum " << std::hex << detail::fnv1a64(body.str()) << std::dec << '\n';
    out << body.str();
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline TKPredictor TKPredictor::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string header, checksum_line;
    if (!std::getline(in, header) || !std::getline(in, checksum_line))
        throw std::runtime_error(path + ": truncated model file");
    {
        std::istringstream hs(header);
        std::string magic, vword;
        int version = -1;
        hs >> magic >> vword >> version;
        if (magic != "tessellate-model" || vword != "version")
            throw std::runtime_error(path + ": not a model file");
        if (version != kModelFormatVersion)
            throw std::runtime_error(path + ": unsupported model version " +
                                     std::to_string(version));
    }
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    {
        std::istringstream cs(checksum_line);
        std::string word;
        std::uint64_t stored = 0;
        cs >> word >> std::hex >> stored;
        if (word != "checksum" || !cs)
            throw std::runtime_error(path + ": malformed checksum line");
        if (stored != detail::fnv1a64(body))
            throw std::runtime_error(path + ": checksum mismatch, file corrupted");
    }

    detail::ModelReader r(body, path);
    r.line_no = 2;
    TKPredictor m;

    const std::string task_word = r.expect_key("task");
    if (task_word == "classify")
        m.task = Task::classification;
    else if (task_word == "regress")
        m.task = Task::regression;
    else
        r.fail("unknown task '" + task_word + "'");

    m.basis.n_features = static_cast<std::size_t>(std::stoull(r.expect_key("n_features")));
    m.basis.degree = std::stoi(r.expect_key("degree"));
    m.basis.padding = r.parse_vector(r.expect_key("padding"), m.basis.n_features);
    m.basis.domain_lower = r.parse_vector(r.expect_key("domain_lower"), m.basis.n_features);
    m.basis.domain_upper = r.parse_vector(r.expect_key("domain_upper"), m.basis.n_features);
    m.bias = std::stod(r.expect_key("bias"));
    m.final_gap = std::stod(r.expect_key("final_gap"));
    m.scaler.minimum = r.parse_vector(r.expect_key("scaler_min"), m.basis.n_features);
    m.scaler.maximum = r.parse_vector(r.expect_key("scaler_max"), m.basis.n_features);
    m.basis.validate();

    const std::size_t order = static_cast<std::size_t>(std::stoull(r.expect_key("P")));
    Vector dense(order * order);
    for (std::size_t i = 0; i < order; ++i) {
        Vector row = r.parse_vector(r.next_line(), order);
        for (std::size_t j = 0; j < order; ++j) dense[i * order + j] = row[j];
    }
    m.P = SymmetricMatrix::from_dense(order, dense);

    const std::size_t n_sv = static_cast<std::size_t>(std::stoull(r.expect_key("support")));
    m.support_points.reserve(n_sv);
    m.coefficients.reserve(n_sv);
    for (std::size_t i = 0; i < n_sv; ++i) {
        Vector row = r.parse_vector(r.next_line(), m.basis.n_features + 1);
        m.coefficients.push_back(row[0]);
        m.support_points.emplace_back(row.begin() + 1, row.end());
    }

    const ExponentTable tbl = enumerate_exponents(m.basis.n_features, m.basis.degree);
    if (m.P.order() != tbl.n_p())
        throw std::runtime_error(path + ": P order inconsistent with basis size");
    return m;
}

}  // namespace tkl
