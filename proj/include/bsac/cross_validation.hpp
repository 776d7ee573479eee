#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bsac/ensemble.hpp"
#include "bsac/metrics.hpp"
#include "bsac/preprocess.hpp"
#include "bsac/rng.hpp"

namespace bsac {

/// Stratified fold assignment: per-class round-robin chunks, with the second
/// class's remainder offset so total fold sizes also differ by at most one.
inline std::vector<std::size_t> stratified_kfold(const Vector& labels, std::size_t k, Rng& rng) {
    if (k < 3) {
        throw std::invalid_argument("stratified_kfold: k must be >= 3 (train/validation/test)");
    }
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1.0) {
            positives.push_back(i);
        } else if (labels[i] == 0.0) {
            negatives.push_back(i);
        } else {
            throw std::invalid_argument("stratified_kfold: non-binary label");
        }
    }
    if (positives.size() < k || negatives.size() < k) {
        throw std::invalid_argument("stratified_kfold: each class needs at least k members");
    }
    rng.shuffle(positives);
    rng.shuffle(negatives);

    std::vector<std::size_t> fold_of(labels.size());
    auto deal = [&](const std::vector<std::size_t>& indices, std::size_t first_fold) {
        const std::size_t base = indices.size() / k;
        const std::size_t remainder = indices.size() % k;
        std::size_t cursor = 0;
        for (std::size_t f = 0; f < k; ++f) {
            // folds first_fold, first_fold+1, ... absorb the remainder
            const std::size_t fold = (first_fold + f) % k;
            const std::size_t take = base + (f < remainder ? 1 : 0);
            for (std::size_t j = 0; j < take; ++j) {
                fold_of[indices[cursor++]] = fold;
            }
        }
    };
    deal(positives, 0);
    deal(negatives, positives.size() % k);
    return fold_of;
}

struct FoldResult {
    MetricsReport metrics;
    ConfusionMatrix cm;
    std::vector<double> selected_gammas;           // one per base classifier
    std::vector<GammaSweepRow> sweep;              // full F1-vs-gamma grid
};

struct MetricsSummary {
    double accuracy = 0, precision = 0, recall = 0, specificity = 0, f1 = 0, g_mean = 0;
};

/// Per-fold confusion matrices and metrics plus mean/std rows over folds.
struct CVReport {
    std::vector<FoldResult> folds;
    MetricsSummary mean;
    MetricsSummary stddev;  // population std over the fold values
};

namespace detail {

inline void summarize(CVReport& report) {
    const double k = static_cast<double>(report.folds.size());
    auto stats = [&](auto field) {
        double sum = 0.0;
        for (const auto& f : report.folds) sum += f.metrics.*field;
        const double mean = sum / k;
        double var = 0.0;
        for (const auto& f : report.folds) {
            const double d = f.metrics.*field - mean;
            var += d * d;
        }
        return std::pair<double, double>(mean, std::sqrt(var / k));
    };
    std::tie(report.mean.accuracy, report.stddev.accuracy) = stats(&MetricsReport::accuracy);
    std::tie(report.mean.precision, report.stddev.precision) = stats(&MetricsReport::precision);
    std::tie(report.mean.recall, report.stddev.recall) = stats(&MetricsReport::recall);
    std::tie(report.mean.specificity, report.stddev.specificity) =
        stats(&MetricsReport::specificity);
    std::tie(report.mean.f1, report.stddev.f1) = stats(&MetricsReport::f1);
    std::tie(report.mean.g_mean, report.stddev.g_mean) = stats(&MetricsReport::g_mean);
}

}  // namespace detail

/// k-fold protocol: test = fold i, validation = fold (i+1) mod k, train = the
/// rest. Continuous features are re-normalized per rotation on the training
/// rows only, then the pool is trained and scored on the held-out test fold.
inline CVReport run_cv(const Dataset& dataset, const SAConfig& base_config,
                       const std::vector<double>& gamma_grid, std::size_t k, Rng& rng) {
    const std::vector<std::size_t> fold_of = stratified_kfold(dataset.labels, k, rng);
    const std::uint64_t cv_seed = rng.next_u64();

    CVReport report;
    for (std::size_t test_fold = 0; test_fold < k; ++test_fold) {
        const std::size_t val_fold = (test_fold + 1) % k;
        std::vector<std::size_t> train_rows, val_rows, test_rows;
        for (std::size_t i = 0; i < fold_of.size(); ++i) {
            if (fold_of[i] == test_fold) {
                test_rows.push_back(i);
            } else if (fold_of[i] == val_fold) {
                val_rows.push_back(i);
            } else {
                train_rows.push_back(i);
            }
        }

        Matrix refitted = dataset.features;
        refit_minmax(refitted, dataset.feature_kinds, train_rows);
        Dataset scaled{std::move(refitted), dataset.labels, dataset.feature_names,
                       dataset.feature_kinds};
        const Dataset train = dataset_subset(scaled, train_rows);
        const Dataset validation = dataset_subset(scaled, val_rows);
        const Dataset test = dataset_subset(scaled, test_rows);

        Rng fold_rng(derive_stream(cv_seed, test_fold));
        PoolTrainResult trained =
            train_bsac_with_sweep(train, validation, base_config, gamma_grid, fold_rng);

        const BSACPrediction pred = bsac_predict(trained.model, test.features);
        FoldResult fold;
        fold.cm = confusion(test.labels, pred.labels);
        fold.metrics = metrics(fold.cm);
        fold.selected_gammas = trained.model.gammas;
        fold.sweep = std::move(trained.sweep);
        report.folds.push_back(std::move(fold));
    }
    detail::summarize(report);
    return report;
}

/// The full F1-vs-gamma grid per base classifier (the machine-readable data
/// behind the sensitivity plots). Same derived streams as train_bsac, so the
/// per-subset argmax matches the gamma train_bsac selects for the same seed.
inline std::vector<GammaSweepRow> gamma_sweep(const Dataset& train, const Dataset& validation,
                                              const SAConfig& base_config,
                                              const std::vector<double>& gamma_grid, Rng& rng) {
    return train_bsac_with_sweep(train, validation, base_config, gamma_grid, rng).sweep;
}

}  // namespace bsac
