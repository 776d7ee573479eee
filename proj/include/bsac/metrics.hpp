#pragma once

#include <cmath>
#include <stdexcept>

#include "bsac/matrix.hpp"

namespace bsac {

/// Binary confusion counts; positive class = 1 (default / minority).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionMatrix confusion(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("confusion: length mismatch");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double t = y_true[i], p = y_pred[i];
        if ((t != 0.0 && t != 1.0) || (p != 0.0 && p != 1.0)) {
            throw std::invalid_argument("confusion: non-binary entry");
        }
        if (t == 1.0) {
            (p == 1.0 ? cm.tp : cm.fn)++;
        } else {
            (p == 1.0 ? cm.fp : cm.tn)++;
        }
    }
    return cm;
}

/// Classification metrics in [0,1]. A zero denominator yields 0 for that
/// metric and sets `degenerate` instead of aborting the aggregation.
struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;      // TPR / sensitivity
    double specificity = 0.0; // TNR
    double f1 = 0.0;
    double g_mean = 0.0;      // sqrt(recall * specificity)
    bool degenerate = false;
};

inline MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) {
        throw std::invalid_argument("metrics: empty confusion matrix");
    }
    MetricsReport r;
    auto ratio = [&r](std::size_t num, std::size_t denom) {
        if (denom == 0) {
            r.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(denom);
    };
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    r.recall = ratio(cm.tp, cm.tp + cm.fn);
    r.specificity = ratio(cm.tn, cm.tn + cm.fp);
    r.precision = ratio(cm.tp, cm.tp + cm.fp);
    if (r.precision + r.recall > 0.0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    } else {
        r.f1 = 0.0;
        r.degenerate = true;
    }
    r.g_mean = std::sqrt(r.recall * r.specificity);
    return r;
}

}  // namespace bsac
