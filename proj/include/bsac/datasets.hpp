#pragma once

#include <cctype>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsac/csv.hpp"
#include "bsac/preprocess.hpp"

namespace bsac {

/// A dataset ready for training plus everything needed to reproduce the
/// feature layout on new data.
struct PreparedDataset {
    Dataset dataset;
    PreprocessParams params;
    TableSchema schema;
    std::string kind;  // taiwan | lendingclub | generic
    std::vector<std::string> notes;
};

namespace detail {

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void require_columns(const RawTable& table, const std::vector<std::string>& names,
                            const char* what) {
    std::string missing;
    for (const std::string& name : names) {
        if (!table.find_column(name)) {
            missing += missing.empty() ? name : ", " + name;
        }
    }
    if (!missing.empty()) {
        throw std::invalid_argument(std::string(what) + ": missing expected columns: " + missing);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Taiwan credit card dataset (UCI default-of-credit-card-clients schema)
// ---------------------------------------------------------------------------

/// Declared schema: 20 continuous columns plus fixed dummy lists for SEX,
/// EDUCATION and MARRIAGE, emitting 32 feature columns for any row subset.
/// Values outside the declared category lists map to all-zero dummy blocks.
inline TableSchema taiwan_schema(const RawTable& table) {
    const std::string pay0 = table.find_column("PAY_0") ? "PAY_0" : "PAY_1";
    TableSchema schema;
    auto cont = [&](const std::string& name) {
        schema.columns.push_back({name, ColumnRole::Continuous, {}});
    };
    auto cat = [&](const std::string& name, std::vector<std::string> values) {
        schema.columns.push_back({name, ColumnRole::Categorical, std::move(values)});
    };
    cont("LIMIT_BAL");
    cat("SEX", {"1", "2"});
    cat("EDUCATION", {"1", "2", "3", "4", "5", "6"});
    cat("MARRIAGE", {"0", "1", "2", "3"});
    cont("AGE");
    cont(pay0);
    for (int i = 2; i <= 6; ++i) cont("PAY_" + std::to_string(i));
    for (int i = 1; i <= 6; ++i) cont("BILL_AMT" + std::to_string(i));
    for (int i = 1; i <= 6; ++i) cont("PAY_AMT" + std::to_string(i));
    return schema;
}

inline std::string taiwan_label_column(const RawTable& table) {
    for (const char* name : {"default payment next month", "default.payment.next.month", "Y"}) {
        if (table.find_column(name)) return name;
    }
    throw std::invalid_argument(
        "prepare_taiwan: missing expected columns: target "
        "('default payment next month' / 'default.payment.next.month' / 'Y')");
}

inline constexpr std::size_t kTaiwanFeatureCount = 32;

inline PreparedDataset prepare_taiwan(const RawTable& table) {
    PreparedDataset prepared;
    prepared.kind = "taiwan";
    prepared.schema = taiwan_schema(table);
    prepared.schema.label_column = taiwan_label_column(table);

    std::vector<std::string> required;
    for (const auto& c : prepared.schema.columns) required.push_back(c.name);
    detail::require_columns(table, required, "prepare_taiwan");

    prepared.params = fit_preprocess(table, prepared.schema);
    prepared.dataset = apply_preprocess(table, prepared.params, prepared.schema.label_column);
    if (prepared.dataset.features.cols() != kTaiwanFeatureCount) {
        prepared.notes.push_back("realized feature count " +
                                 std::to_string(prepared.dataset.features.cols()) +
                                 " differs from the expected 32");
    }
    return prepared;
}

// ---------------------------------------------------------------------------
// Lending Club accepted-loans dataset
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& lending_club_continuous_columns() {
    static const std::vector<std::string> columns = {
        "loan_amnt",   "acc_now_delinq", "int_rate",
        "installment", "annual_inc",     "emp_length",
        "dti",         "delinq_2yrs",    "average_fico",
        "inq_last_6mths", "open_acc",    "pub_rec",
        "revol_util",  "total_acc",      "chargeoff_within_12_mths",
        "delinq_amnt", "mort_acc",       "pub_rec_bankruptcies",
        "tax_liens",   "credit_history"};
    return columns;
}

inline const std::vector<std::string>& lending_club_categorical_columns() {
    static const std::vector<std::string> columns = {
        "grade", "sub_grade", "home_ownership", "purpose", "verification_status",
        "initial_list_status"};
    return columns;
}

/// Raw columns the pipeline reads (use as LoadOptions::keep_columns to avoid
/// materializing the other ~125 columns of the full dump).
inline std::vector<std::string> lending_club_required_columns() {
    std::vector<std::string> columns = {"term",          "issue_d",
                                        "earliest_cr_line", "loan_status",
                                        "fico_range_low", "fico_range_high"};
    for (const auto& c : lending_club_continuous_columns()) {
        if (c != "average_fico" && c != "credit_history") columns.push_back(c);
    }
    for (const auto& c : lending_club_categorical_columns()) columns.push_back(c);
    return columns;
}

inline constexpr long kLendingClubIssueCutoffMonths = 2016L * 12 + 2;  // March 2016

/// Months-since-year-0 filter predicate for streaming loads: 36-month term,
/// issued before March 2016. Applied on raw cells before any parsing.
inline bool lending_club_row_filter(const std::vector<std::string>& header,
                                    const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "term") {
            const auto pos = cells[i].find("36");
            if (pos == std::string::npos) return false;
        } else if (header[i] == "issue_d") {
            const auto months = parse_month_year(cells[i]);
            if (months && *months >= kLendingClubIssueCutoffMonths) return false;
        }
    }
    return true;
}

/// "< 1 year" -> 0, "1 year" -> 1, ..., "10+ years" -> 10; empty / "n/a" -> missing.
inline std::optional<double> parse_emp_length(const std::string& cell) {
    if (cell.empty() || cell == "n/a") return std::nullopt;
    if (cell.find("< 1") != std::string::npos) return 0.0;
    if (cell.rfind("10+", 0) == 0) return 10.0;
    std::size_t i = 0;
    while (i < cell.size() && (cell[i] == ' ')) ++i;
    std::size_t j = i;
    while (j < cell.size() && std::isdigit(static_cast<unsigned char>(cell[j]))) ++j;
    if (j == i) return std::nullopt;
    return static_cast<double>(std::stol(cell.substr(i, j - i)));
}

/// Maps a loan status to its label; loans that have not resolved (Current,
/// Late, In Grace Period, ...) have no ground truth and return nullopt.
inline std::optional<double> lending_club_label(const std::string& status) {
    if (status == "Fully Paid") return 0.0;
    if (status == "Charged Off" || status == "Default") return 1.0;
    return std::nullopt;
}

/// Filters to matured 36-month loans issued before March 2016, engineers
/// average_fico and credit_history (whole months), parses emp_length, maps
/// loan_status to 0/1 and drops rows with missing cells in kept columns.
/// Returns the engineered table with a "label" column.
inline RawTable lending_club_build_rows(const RawTable& raw, bool labeled,
                                        std::vector<std::string>* notes = nullptr,
                                        std::vector<std::size_t>* kept_rows = nullptr) {
    std::vector<std::string> required = lending_club_required_columns();
    if (!labeled) {
        std::erase(required, "loan_status");
    }
    detail::require_columns(raw, required, "prepare_lending_club");

    RawTable out;
    for (const auto& name : lending_club_continuous_columns()) out.column_names.push_back(name);
    for (const auto& name : lending_club_categorical_columns()) out.column_names.push_back(name);
    if (labeled) out.column_names.push_back("label");
    out.columns.resize(out.column_names.size());

    const std::size_t term_col = raw.column_index("term");
    const std::size_t issue_col = raw.column_index("issue_d");
    const std::size_t earliest_col = raw.column_index("earliest_cr_line");
    const std::size_t fico_low_col = raw.column_index("fico_range_low");
    const std::size_t fico_high_col = raw.column_index("fico_range_high");
    const std::size_t status_col = labeled ? raw.column_index("loan_status") : 0;

    std::size_t dropped_missing = 0, dropped_filter = 0;
    for (std::size_t r = 0; r < raw.row_count(); ++r) {
        std::optional<double> label;
        long issue_months = 0;
        if (labeled) {
            if (raw.columns[term_col][r].find("36") == std::string::npos) {
                ++dropped_filter;
                continue;
            }
            const std::string& issue_cell = raw.columns[issue_col][r];
            if (issue_cell.empty()) {
                ++dropped_missing;
                continue;
            }
            const auto issue = parse_month_year(issue_cell);
            if (!issue) {
                throw std::invalid_argument("prepare_lending_club: unparseable issue_d '" +
                                            issue_cell + "' at row " + std::to_string(r));
            }
            issue_months = *issue;
            if (issue_months >= kLendingClubIssueCutoffMonths) {
                ++dropped_filter;
                continue;
            }
            label = lending_club_label(raw.columns[status_col][r]);
            if (!label) {
                ++dropped_filter;  // unresolved status, no ground truth
                continue;
            }
        } else {
            const auto issue = parse_month_year(raw.columns[issue_col][r]);
            if (!issue) {
                ++dropped_missing;
                continue;
            }
            issue_months = *issue;
        }

        // Engineered values first, so a bad row is rejected before any writes.
        const std::string& earliest_cell = raw.columns[earliest_col][r];
        if (earliest_cell.empty()) {
            ++dropped_missing;
            continue;
        }
        const auto earliest = parse_month_year(earliest_cell);
        if (!earliest) {
            throw std::invalid_argument("prepare_lending_club: unparseable earliest_cr_line '" +
                                        earliest_cell + "' at row " + std::to_string(r));
        }
        const auto fico_low = parse_number(raw.columns[fico_low_col][r]);
        const auto fico_high = parse_number(raw.columns[fico_high_col][r]);
        if (!fico_low || !fico_high) {
            ++dropped_missing;
            continue;
        }

        std::vector<std::string> row;
        row.reserve(out.column_names.size());
        bool complete = true;
        for (const auto& name : lending_club_continuous_columns()) {
            if (name == "average_fico") {
                row.push_back(detail::format_number((*fico_low + *fico_high) / 2.0));
            } else if (name == "credit_history") {
                row.push_back(detail::format_number(
                    static_cast<double>(issue_months - *earliest)));
            } else if (name == "emp_length") {
                const auto years = parse_emp_length(raw.columns[raw.column_index(name)][r]);
                if (!years) {
                    complete = false;
                    break;
                }
                row.push_back(detail::format_number(*years));
            } else {
                const std::string& cell = raw.columns[raw.column_index(name)][r];
                if (!parse_number(cell)) {
                    complete = false;
                    break;
                }
                row.push_back(cell);
            }
        }
        if (complete) {
            for (const auto& name : lending_club_categorical_columns()) {
                const std::string& cell = raw.columns[raw.column_index(name)][r];
                if (cell.empty()) {
                    complete = false;
                    break;
                }
                row.push_back(cell);
            }
        }
        if (!complete) {
            ++dropped_missing;
            continue;
        }
        if (labeled) row.push_back(detail::format_number(*label));
        for (std::size_t c = 0; c < row.size(); ++c) {
            out.columns[c].push_back(std::move(row[c]));
        }
        if (kept_rows) kept_rows->push_back(r);
    }

    out.column_types.assign(out.column_count(), ColumnType::Categorical);
    for (std::size_t c = 0; c < lending_club_continuous_columns().size(); ++c) {
        out.column_types[c] = ColumnType::Numeric;
    }
    if (notes) {
        if (dropped_filter > 0) {
            notes->push_back(std::to_string(dropped_filter) +
                             " rows outside the 36-month / pre-2016-03 / resolved-status filter");
        }
        if (dropped_missing > 0) {
            notes->push_back(std::to_string(dropped_missing) + " rows dropped for missing cells");
        }
    }
    return out;
}

inline PreparedDataset prepare_lending_club(const RawTable& raw) {
    PreparedDataset prepared;
    prepared.kind = "lendingclub";

    const RawTable rows = lending_club_build_rows(raw, /*labeled=*/true, &prepared.notes);
    if (rows.row_count() == 0) {
        throw std::invalid_argument("prepare_lending_club: no rows survive the filters");
    }

    for (const auto& name : lending_club_continuous_columns()) {
        prepared.schema.columns.push_back({name, ColumnRole::Continuous, {}});
    }
    for (const auto& name : lending_club_categorical_columns()) {
        prepared.schema.columns.push_back({name, ColumnRole::Categorical, {}});
    }
    prepared.schema.label_column = "label";

    prepared.params = fit_preprocess(rows, prepared.schema);
    prepared.dataset = apply_preprocess(rows, prepared.params, "label");
    prepared.notes.push_back("realized feature count " +
                             std::to_string(prepared.dataset.features.cols()) +
                             " (81 in the reference preparation)");
    return prepared;
}

// ---------------------------------------------------------------------------
// Generic CSV: numeric columns are continuous, text columns categorical
// ---------------------------------------------------------------------------

inline PreparedDataset prepare_generic(const RawTable& table,
                                       const std::string& label_column = "label") {
    PreparedDataset prepared;
    prepared.kind = "generic";
    prepared.schema.label_column = label_column;
    if (!table.find_column(label_column)) {
        throw std::invalid_argument("prepare_generic: missing label column '" + label_column +
                                    "'");
    }
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (table.column_names[c] == label_column) continue;
        prepared.schema.columns.push_back(
            {table.column_names[c],
             table.column_types[c] == ColumnType::Numeric ? ColumnRole::Continuous
                                                          : ColumnRole::Categorical,
             {}});
    }
    prepared.params = fit_preprocess(table, prepared.schema);
    prepared.dataset = apply_preprocess(table, prepared.params, label_column);
    return prepared;
}

struct PredictFeatures {
    Matrix features;
    std::vector<std::size_t> source_rows;  // original table row of each feature row
};

/// Featurizes a table for prediction with the stored params of a trained
/// model; Lending Club rows are engineered the same way but not filtered by
/// term/date/status (rows with unusable cells are skipped and reported via
/// source_rows).
inline PredictFeatures build_features_for_predict(const std::string& kind, const RawTable& table,
                                                  const PreprocessParams& params) {
    PredictFeatures out;
    if (kind == "lendingclub") {
        const RawTable rows =
            lending_club_build_rows(table, /*labeled=*/false, nullptr, &out.source_rows);
        out.features = apply_features(rows, params);
        return out;
    }
    out.features = apply_features(table, params);
    out.source_rows.resize(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) out.source_rows[r] = r;
    return out;
}

}  // namespace bsac
