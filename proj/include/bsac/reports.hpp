#pragma once

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "bsac/cross_validation.hpp"
#include "bsac/datasets.hpp"
#include "bsac/ensemble.hpp"
#include "bsac/model_io.hpp"

namespace bsac {

namespace detail {

inline std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::string full_precision(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Quotes a CSV cell only when it needs it.
inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

}  // namespace detail

/// Machine-readable per-fold metrics with mean/std rows.
inline std::string cv_report_csv(const CVReport& report) {
    std::ostringstream out;
    out << "fold,tp,fp,tn,fn,accuracy,precision,recall,specificity,f1,g_mean,selected_gammas\n";
    for (std::size_t i = 0; i < report.folds.size(); ++i) {
        const FoldResult& f = report.folds[i];
        out << i << ',' << f.cm.tp << ',' << f.cm.fp << ',' << f.cm.tn << ',' << f.cm.fn;
        for (double v : {f.metrics.accuracy, f.metrics.precision, f.metrics.recall,
                         f.metrics.specificity, f.metrics.f1, f.metrics.g_mean}) {
            out << ',' << detail::full_precision(v);
        }
        out << ',';
        for (std::size_t g = 0; g < f.selected_gammas.size(); ++g) {
            out << (g ? "|" : "") << detail::full_precision(f.selected_gammas[g]);
        }
        out << '\n';
    }
    for (const char* row : {"mean", "std"}) {
        const MetricsSummary& s = row == std::string("mean") ? report.mean : report.stddev;
        out << row << ",,,,";
        for (double v : {s.accuracy, s.precision, s.recall, s.specificity, s.f1, s.g_mean}) {
            out << ',' << detail::full_precision(v);
        }
        out << ",\n";
    }
    return out.str();
}

/// Human-readable fixed-width table, metrics to 4 decimals.
inline std::string cv_report_table(const CVReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-6s %8s %8s %8s %8s %8s %8s\n", "fold", "acc", "prec",
                  "recall", "spec", "f1", "g-mean");
    out << line;
    auto print_row = [&](const std::string& name, double acc, double prec, double rec, double spec,
                         double f1, double gm) {
        std::snprintf(line, sizeof(line), "%-6s %8s %8s %8s %8s %8s %8s\n", name.c_str(),
                      detail::fixed4(acc).c_str(), detail::fixed4(prec).c_str(),
                      detail::fixed4(rec).c_str(), detail::fixed4(spec).c_str(),
                      detail::fixed4(f1).c_str(), detail::fixed4(gm).c_str());
        out << line;
    };
    for (std::size_t i = 0; i < report.folds.size(); ++i) {
        const MetricsReport& m = report.folds[i].metrics;
        print_row(std::to_string(i), m.accuracy, m.precision, m.recall, m.specificity, m.f1,
                  m.g_mean);
    }
    print_row("mean", report.mean.accuracy, report.mean.precision, report.mean.recall,
              report.mean.specificity, report.mean.f1, report.mean.g_mean);
    print_row("std", report.stddev.accuracy, report.stddev.precision, report.stddev.recall,
              report.stddev.specificity, report.stddev.f1, report.stddev.g_mean);
    return out.str();
}

/// F1-vs-gamma grid rows, one per (fold, base classifier, gamma).
inline std::string sweep_csv(const std::vector<std::vector<GammaSweepRow>>& per_fold) {
    std::ostringstream out;
    out << "fold,subset,gamma,validation_f1\n";
    for (std::size_t fold = 0; fold < per_fold.size(); ++fold) {
        for (const GammaSweepRow& row : per_fold[fold]) {
            out << fold << ',' << row.subset_id << ',' << detail::full_precision(row.gamma) << ','
                << detail::full_precision(row.validation_f1) << '\n';
        }
    }
    return out.str();
}

/// Prepared feature matrix + labels as CSV (the `prepare` command output).
inline std::string dataset_csv(const Dataset& ds) {
    std::ostringstream out;
    for (std::size_t c = 0; c < ds.feature_names.size(); ++c) {
        out << (c ? "," : "") << detail::csv_cell(ds.feature_names[c]);
    }
    out << ",label\n";
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < ds.features.cols(); ++c) {
            out << (c ? "," : "") << detail::full_precision(ds.features(r, c));
        }
        out << ',' << (ds.labels[r] == 1.0 ? '1' : '0') << '\n';
    }
    return out.str();
}

inline std::string schema_report(const PreparedDataset& prepared) {
    const Dataset& ds = prepared.dataset;
    std::size_t positives = 0;
    for (double y : ds.labels) positives += y == 1.0 ? 1 : 0;
    const std::size_t negatives = ds.rows() - positives;

    std::ostringstream out;
    out << "dataset_kind: " << prepared.kind << '\n';
    out << "rows: " << ds.rows() << '\n';
    out << "features: " << ds.features.cols() << '\n';
    out << "positives: " << positives << '\n';
    out << "negatives: " << negatives << '\n';
    if (positives > 0 && negatives >= positives) {
        const double ir = static_cast<double>(negatives) / static_cast<double>(positives);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "imbalance_ratio: %.4f\n", ir);
        out << buf;
        out << "subset_count: " << negatives / positives << '\n';
    } else {
        out << "imbalance_ratio: undefined (positive class is not the minority)\n";
    }
    for (const std::string& note : prepared.notes) {
        out << "note: " << note << '\n';
    }
    out << "feature_names:\n";
    for (const std::string& name : ds.feature_names) {
        out << "  - " << name << '\n';
    }
    return out.str();
}

/// Per-row hard label and positive-vote share.
inline std::string predictions_csv(const std::vector<std::size_t>& source_rows,
                                   const BSACPrediction& pred) {
    std::ostringstream out;
    out << "row,label,positive_vote_fraction\n";
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        out << source_rows[i] << ',' << (pred.labels[i] == 1.0 ? '1' : '0') << ','
            << detail::full_precision(pred.positive_vote_fraction[i]) << '\n';
    }
    return out.str();
}

}  // namespace bsac
