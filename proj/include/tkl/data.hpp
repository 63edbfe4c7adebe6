#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tkl/matrix.hpp"
#include "tkl/model.hpp"

namespace tkl {

struct Dataset {
    std::vector<Vector> samples;
    Vector targets;

    std::size_t size() const { return samples.size(); }
    std::size_t n_features() const { return samples.empty() ? 0 : samples[0].size(); }
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

inline std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

inline bool parse_double(const std::string& token, double& out) {
    std::size_t consumed = 0;
    try {
        out = std::stod(token, &consumed);
    } catch (const std::exception&) {
        return false;
    }
    return consumed == token.size();
}

}  // namespace detail

/// Sparse "label idx:value ..." format: 1-based, strictly increasing indices,
/// '#' starts a comment. Feature count is the maximum index seen.
inline Dataset parse_sparse_svm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);

    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    Vector targets;
    std::size_t n_features = 0;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::strip_comment(raw);
        if (detail::blank(line)) continue;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;
        double label;
        if (!detail::parse_double(token, label))
            detail::parse_fail(path, line_no, "invalid label '" + token + "'");

        std::vector<std::pair<std::size_t, double>> feats;
        std::size_t prev_index = 0;
        while (ls >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos)
                detail::parse_fail(path, line_no, "expected index:value, got '" + token + "'");
            long index;
            double value;
            try {
                index = std::stol(token.substr(0, colon));
            } catch (const std::exception&) {
                detail::parse_fail(path, line_no, "invalid feature index in '" + token + "'");
            }
            if (index < 1)
                detail::parse_fail(path, line_no, "feature indices are 1-based, got " +
                                                      std::to_string(index));
            if (static_cast<std::size_t>(index) <= prev_index)
                detail::parse_fail(path, line_no,
                                   "feature indices must be strictly increasing");
            if (!detail::parse_double(token.substr(colon + 1), value))
                detail::parse_fail(path, line_no, "invalid feature value in '" + token + "'");
            prev_index = static_cast<std::size_t>(index);
            feats.emplace_back(prev_index, value);
        }
        n_features = std::max(n_features, prev_index);
        rows.push_back(std::move(feats));
        targets.push_back(label);
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");

    Dataset d;
    d.targets = std::move(targets);
    d.samples.assign(rows.size(), Vector(n_features, 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& [idx, val] : rows[i]) d.samples[i][idx - 1] = val;
    return d;
}

/// Dense CSV with the target in the given column (default: last). A header
/// row is auto-detected: if any cell of the first row fails numeric parsing,
/// the row is skipped.
inline Dataset parse_csv(const std::string& path, long label_column = -1) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);

    Dataset d;
    std::string raw;
    int line_no = 0;
    std::size_t n_cols = 0;
    bool first_content_row = true;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::strip_comment(raw);
        if (detail::blank(line)) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.empty()) continue;

        Vector values(cells.size());
        bool numeric = true;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (!detail::parse_double(cells[k], values[k])) {
                numeric = false;
                break;
            }
        }
        if (first_content_row) {
            first_content_row = false;
            n_cols = cells.size();
            if (!numeric) continue;  // header row
        }
        if (!numeric)
            detail::parse_fail(path, line_no, "non-numeric cell outside header row");
        if (cells.size() != n_cols)
            detail::parse_fail(path, line_no,
                               "expected " + std::to_string(n_cols) + " columns, got " +
                                   std::to_string(cells.size()));
        if (n_cols < 2) detail::parse_fail(path, line_no, "need at least two columns");

        const std::size_t label_idx =
            label_column < 0 ? n_cols - 1 : static_cast<std::size_t>(label_column);
        if (label_idx >= n_cols)
            detail::parse_fail(path, line_no, "label column out of range");
        Vector x;
        x.reserve(n_cols - 1);
        for (std::size_t k = 0; k < n_cols; ++k)
            if (k != label_idx) x.push_back(values[k]);
        d.samples.push_back(std::move(x));
        d.targets.push_back(values[label_idx]);
    }
    if (d.samples.empty()) throw std::runtime_error(path + ": no data rows");
    return d;
}

/// Exactly two distinct target values -> classification, mapped to {-1, +1}
/// by sorted order (smaller value becomes -1).
inline bool detect_classification(const Vector& targets, double* low = nullptr,
                                  double* high = nullptr) {
    std::set<double> uniq(targets.begin(), targets.end());
    if (uniq.size() != 2) return false;
    if (low) *low = *uniq.begin();
    if (high) *high = *uniq.rbegin();
    return true;
}

inline Vector map_labels(const Vector& targets) {
    double low, high;
    if (!detect_classification(targets, &low, &high))
        throw std::invalid_argument("map_labels: targets do not have exactly two values");
    Vector y(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) y[i] = targets[i] == low ? -1.0 : 1.0;
    return y;
}

inline std::vector<Vector> scale_apply(const FeatureScaler& s, const std::vector<Vector>& xs) {
    std::vector<Vector> out;
    out.reserve(xs.size());
    for (const Vector& x : xs) out.push_back(s.apply(x));
    return out;
}

struct CVResult {
    double C = 0.0;
    double delta = 0.0;
    double score = 0.0;  // mean accuracy (classification) or mean MSE (regression)
    std::vector<std::vector<double>> table;  // rows of (C, delta, score)
};

/// Deterministic k-fold split: shuffled by the seed, stratified by label for
/// classification so each fold sees both classes.
inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t m, std::size_t folds,
                                                           unsigned seed, const Vector* labels) {
    if (folds < 2 || folds > m)
        throw std::invalid_argument("kfold_indices: need 2 <= folds <= sample count");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    if (labels) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return (*labels)[a] < (*labels)[b];
        });
    }
    std::vector<std::vector<std::size_t>> fold_of(folds);
    for (std::size_t r = 0; r < m; ++r) fold_of[r % folds].push_back(order[r]);
    return fold_of;
}

}  // namespace tkl
