#pragma once

#include <algorithm>
#include <cstdio>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsac/csv.hpp"
#include "bsac/matrix.hpp"

namespace bsac {

enum class FeatureKind { Continuous, Indicator };

enum class ColumnRole { Continuous, Categorical };

/// Declared handling of one source column. An empty `categories` list means
/// the categories are observed from the fitting data (sorted, deduplicated);
/// a non-empty list pins the dummy layout regardless of the data.
struct ColumnSpec {
    std::string name;
    ColumnRole role = ColumnRole::Continuous;
    std::vector<std::string> categories;
};

struct TableSchema {
    std::vector<ColumnSpec> columns;
    std::string label_column;  // never read by fit_preprocess
};

/// Canonical text for category matching: numeric-looking cells are reformatted
/// so "2", "2.0" and " 2" all name the same category.
inline std::string canonical_category(const std::string& cell) {
    if (auto num = parse_number(cell)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", *num);
        return buf;
    }
    std::string out = cell;
    const auto first = out.find_first_not_of(" \t");
    const auto last = out.find_last_not_of(" \t");
    if (first == std::string::npos) return "";
    return out.substr(first, last - first + 1);
}

/// Fitted preprocessing: per-continuous-column min/max, per-categorical-column
/// ordered category list. Fully determines the emitted feature layout.
struct PreprocessParams {
    struct Column {
        std::string name;
        ColumnRole role = ColumnRole::Continuous;
        double min = 0.0, max = 0.0;          // Continuous
        std::vector<std::string> categories;  // Categorical
    };
    std::vector<Column> columns;

    std::size_t feature_count() const {
        std::size_t n = 0;
        for (const auto& c : columns) {
            n += c.role == ColumnRole::Continuous ? 1 : c.categories.size();
        }
        return n;
    }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names;
        for (const auto& c : columns) {
            if (c.role == ColumnRole::Continuous) {
                names.push_back(c.name);
            } else {
                for (const auto& cat : c.categories) {
                    names.push_back(c.name + "=" + cat);
                }
            }
        }
        return names;
    }

    std::vector<FeatureKind> feature_kinds() const {
        std::vector<FeatureKind> kinds;
        for (const auto& c : columns) {
            if (c.role == ColumnRole::Continuous) {
                kinds.push_back(FeatureKind::Continuous);
            } else {
                kinds.insert(kinds.end(), c.categories.size(), FeatureKind::Indicator);
            }
        }
        return kinds;
    }
};

/// Feature matrix + binary labels (1 = default / minority class).
struct Dataset {
    Matrix features;
    Vector labels;
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;

    std::size_t rows() const { return features.rows(); }
};

/// Learns min/max for continuous columns and category lists for categorical
/// ones from the fitting rows. Never touches `schema.label_column`.
inline PreprocessParams fit_preprocess(const RawTable& table, const TableSchema& schema) {
    PreprocessParams params;
    for (const ColumnSpec& spec : schema.columns) {
        if (spec.name == schema.label_column) {
            throw std::invalid_argument("fit_preprocess: label column '" + spec.name +
                                        "' listed as a feature");
        }
        const std::size_t col = table.column_index(spec.name);
        PreprocessParams::Column out;
        out.name = spec.name;
        out.role = spec.role;
        if (spec.role == ColumnRole::Continuous) {
            bool seen = false;
            for (const std::string& cell : table.columns[col]) {
                if (cell.empty()) continue;
                const auto num = parse_number(cell);
                if (!num) {
                    throw std::invalid_argument("fit_preprocess: non-numeric cell '" + cell +
                                                "' in continuous column '" + spec.name + "'");
                }
                if (!seen) {
                    out.min = out.max = *num;
                    seen = true;
                } else {
                    out.min = std::min(out.min, *num);
                    out.max = std::max(out.max, *num);
                }
            }
            if (!seen) {
                throw std::invalid_argument("fit_preprocess: continuous column '" + spec.name +
                                            "' has no values");
            }
        } else if (!spec.categories.empty()) {
            out.categories = spec.categories;
        } else {
            std::set<std::string> seen;
            for (const std::string& cell : table.columns[col]) {
                if (cell.empty()) continue;
                seen.insert(canonical_category(cell));
            }
            if (seen.empty()) {
                throw std::invalid_argument("fit_preprocess: categorical column '" + spec.name +
                                            "' has no values");
            }
            out.categories.assign(seen.begin(), seen.end());
        }
        params.columns.push_back(std::move(out));
    }
    return params;
}

/// Emits the feature matrix for `table` under fitted `params`. Continuous
/// columns map through (v - min) / (max - min) — not clamped, so unseen data
/// may fall outside [0,1]; zero-range columns map to 0. Unseen categories
/// produce an all-zero dummy block.
inline Matrix apply_features(const RawTable& table, const PreprocessParams& params) {
    std::vector<std::size_t> src;
    std::string missing;
    for (const auto& c : params.columns) {
        if (const auto idx = table.find_column(c.name)) {
            src.push_back(*idx);
        } else {
            missing += missing.empty() ? c.name : ", " + c.name;
        }
    }
    if (!missing.empty()) {
        throw std::invalid_argument("apply_features: columns absent from table: " + missing);
    }
    const std::size_t rows = table.row_count();
    Matrix features(rows, params.feature_count());
    std::size_t base = 0;
    for (std::size_t ci = 0; ci < params.columns.size(); ++ci) {
        const auto& c = params.columns[ci];
        const auto& cells = table.columns[src[ci]];
        if (c.role == ColumnRole::Continuous) {
            const double range = c.max - c.min;
            for (std::size_t r = 0; r < rows; ++r) {
                const auto num = parse_number(cells[r]);
                if (!num) {
                    throw std::invalid_argument("apply_features: missing or non-numeric cell in '" +
                                                c.name + "' at row " + std::to_string(r));
                }
                features(r, base) = range > 0.0 ? (*num - c.min) / range : 0.0;
            }
            base += 1;
        } else {
            for (std::size_t r = 0; r < rows; ++r) {
                if (cells[r].empty()) continue;  // missing -> all-zero block
                const std::string cat = canonical_category(cells[r]);
                for (std::size_t k = 0; k < c.categories.size(); ++k) {
                    if (c.categories[k] == cat) {
                        features(r, base + k) = 1.0;
                        break;
                    }
                }
            }
            base += c.categories.size();
        }
    }
    return features;
}

/// Extracts a 0/1 label vector from a raw column.
inline Vector binary_labels(const RawTable& table, const std::string& label_column) {
    const std::size_t col = table.column_index(label_column);
    Vector labels(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const auto num = parse_number(table.columns[col][r]);
        if (!num || (*num != 0.0 && *num != 1.0)) {
            throw std::invalid_argument("binary_labels: '" + label_column + "' row " +
                                        std::to_string(r) + " is not 0/1");
        }
        labels[r] = *num;
    }
    return labels;
}

inline Dataset apply_preprocess(const RawTable& table, const PreprocessParams& params,
                                const std::string& label_column) {
    Dataset ds;
    ds.features = apply_features(table, params);
    ds.labels = binary_labels(table, label_column);
    ds.feature_names = params.feature_names();
    ds.feature_kinds = params.feature_kinds();
    return ds;
}

/// Min-max rescale of the continuous feature columns, fitted on `fit_rows`
/// only and applied to the whole matrix. Used for leakage-free per-fold refits
/// (min-max composes, so refitting in normalized space is equivalent to
/// refitting on raw values).
inline void refit_minmax(Matrix& features, const std::vector<FeatureKind>& kinds,
                         std::span<const std::size_t> fit_rows) {
    if (kinds.size() != features.cols()) {
        throw std::invalid_argument("refit_minmax: kinds/width mismatch");
    }
    for (std::size_t c = 0; c < features.cols(); ++c) {
        if (kinds[c] != FeatureKind::Continuous) continue;
        double lo = 0.0, hi = 0.0;
        bool seen = false;
        for (std::size_t r : fit_rows) {
            const double v = features(r, c);
            if (!seen) {
                lo = hi = v;
                seen = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        const double range = hi - lo;
        for (std::size_t r = 0; r < features.rows(); ++r) {
            features(r, c) = range > 0.0 ? (features(r, c) - lo) / range : 0.0;
        }
    }
}

inline Dataset dataset_subset(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset out;
    out.features = gather_rows(ds.features, rows);
    out.labels = gather(ds.labels, rows);
    out.feature_names = ds.feature_names;
    out.feature_kinds = ds.feature_kinds;
    return out;
}

}  // namespace bsac
