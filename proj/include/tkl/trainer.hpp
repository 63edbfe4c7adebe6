#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "tkl/apd.hpp"
#include "tkl/data.hpp"
#include "tkl/fw.hpp"
#include "tkl/model.hpp"

namespace tkl {

struct FitOutput {
    TKPredictor model;
    TrainResult result;
};

/// Fit on raw samples/targets: scale inputs to the unit box, build the
/// tessellated basis over [0,1]^n with the configured padding, run the chosen
/// training algorithm, and package a predictor.
inline FitOutput fit(const std::vector<Vector>& samples, const Vector& targets,
                     const TrainConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("fit: no samples");
    if (samples.size() != targets.size())
        throw std::invalid_argument("fit: sample/target count mismatch");

    const FeatureScaler scaler = fit_scaler(samples);
    const std::vector<Vector> scaled = scale_apply(scaler, samples);

    Vector y = targets;
    if (cfg.task == Task::classification) y = map_labels(targets);

    const TKBasisConfig basis =
        TKBasisConfig::unit_box(samples[0].size(), cfg.degree, cfg.delta);
    const ExponentTable table = enumerate_exponents(basis.n_features, basis.degree);
    KernelContext ctx(basis, table, scaled, cfg.cache_budget_bytes, cfg.threads);

    TrainResult result;
    switch (cfg.algorithm) {
        case Algorithm::fw: result = train_fw(ctx, y, cfg); break;
        case Algorithm::apd: result = train_apd(ctx, y, cfg); break;
        case Algorithm::hybrid: result = train_hybrid(ctx, y, cfg); break;
    }

    FitOutput out{TKPredictor(basis, result.P, scaled, result.alpha, e_star(cfg.task, y),
                              result.bias, cfg.task, scaler, result.final_gap),
                  std::move(result)};
    return out;
}

inline double evaluate_accuracy(const TKPredictor& model, const std::vector<Vector>& samples,
                                const Vector& targets) {
    const Vector y = map_labels(targets);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (model.predict(samples[i]) == y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

inline double evaluate_mse(const TKPredictor& model, const std::vector<Vector>& samples,
                           const Vector& targets) {
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double r = model.predict(samples[i]) - targets[i];
        sum += r * r;
    }
    return sum / static_cast<double>(samples.size());
}

/// Grid search over (C, delta) by k-fold cross-validation. Classification
/// folds are stratified; selection maximizes accuracy or minimizes MSE, with
/// ties broken toward smaller C, then smaller delta.
inline CVResult kfold_cv(const std::vector<Vector>& samples, const Vector& targets,
                         const TrainConfig& base_cfg, const std::vector<double>& C_grid,
                         const std::vector<double>& delta_grid, std::size_t folds = 2,
                         unsigned seed = 0) {
    if (C_grid.empty() || delta_grid.empty())
        throw std::invalid_argument("kfold_cv: empty parameter grid");
    const bool classify = base_cfg.task == Task::classification;
    Vector labels;
    if (classify) labels = map_labels(targets);
    const auto fold_sets =
        kfold_indices(samples.size(), folds, seed, classify ? &labels : nullptr);

    // Ascending grids plus a strict comparison give the tie-break toward
    // smaller C, then smaller delta.
    std::vector<double> Cs = C_grid, deltas = delta_grid;
    std::sort(Cs.begin(), Cs.end());
    std::sort(deltas.begin(), deltas.end());

    CVResult best;
    best.score = classify ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
    for (double C : Cs) {
        for (double delta : deltas) {
            TrainConfig cfg = base_cfg;
            cfg.C = C;
            cfg.delta = delta;
            double total = 0.0;
            for (std::size_t f = 0; f < fold_sets.size(); ++f) {
                std::vector<Vector> train_x, test_x;
                Vector train_y, test_y;
                for (std::size_t g = 0; g < fold_sets.size(); ++g) {
                    for (std::size_t idx : fold_sets[g]) {
                        if (g == f) {
                            test_x.push_back(samples[idx]);
                            test_y.push_back(targets[idx]);
                        } else {
                            train_x.push_back(samples[idx]);
                            train_y.push_back(targets[idx]);
                        }
                    }
                }
                const FitOutput fitted = fit(train_x, train_y, cfg);
                total += classify ? evaluate_accuracy(fitted.model, test_x, test_y)
                                  : evaluate_mse(fitted.model, test_x, test_y);
            }
            const double score = total / static_cast<double>(fold_sets.size());
            best.table.push_back({C, delta, score});
            const bool better = classify ? score > best.score : score < best.score;
            if (better) {
                best.score = score;
                best.C = C;
                best.delta = delta;
            }
        }
    }
    return best;
}

}  // namespace tkl
