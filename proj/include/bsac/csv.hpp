#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace bsac {

enum class ColumnType { Numeric, Categorical, Date };

/// Rectangular table of raw CSV cells, column-major. Empty string = missing.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> columns;
    std::vector<ColumnType> column_types;

    std::size_t row_count() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t column_count() const { return columns.size(); }

    std::optional<std::size_t> find_column(const std::string& name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i) {
            if (column_names[i] == name) return i;
        }
        return std::nullopt;
    }

    std::size_t column_index(const std::string& name) const {
        if (auto idx = find_column(name)) return *idx;
        throw std::invalid_argument("RawTable: no column named '" + name + "'");
    }
};

inline std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    if (begin == end) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

/// Months since year 0 for "Mon-YYYY" cells such as "Dec-2015" (two-digit
/// years accepted with a 1950 pivot). Used for issue_d / earliest_cr_line.
inline std::optional<long> parse_month_year(const std::string& cell) {
    static const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    const auto dash = cell.find('-');
    if (dash == std::string::npos || dash != 3) return std::nullopt;
    int month = -1;
    for (int m = 0; m < 12; ++m) {
        if (cell.compare(0, 3, kMonths[m]) == 0) {
            month = m;
            break;
        }
    }
    if (month < 0) return std::nullopt;
    const std::string year_text = cell.substr(dash + 1);
    if (year_text.empty() || year_text.size() > 4) return std::nullopt;
    int year = 0;
    const auto [ptr, ec] = std::from_chars(year_text.data(), year_text.data() + year_text.size(), year);
    if (ec != std::errc{} || ptr != year_text.data() + year_text.size()) return std::nullopt;
    if (year_text.size() <= 2) {
        year += year < 50 ? 2000 : 1900;
    }
    return static_cast<long>(year) * 12 + month;
}

struct LoadOptions {
    /// When non-empty, only these columns are kept (order preserved from the file).
    std::vector<std::string> keep_columns;
    /// Columns typed as Date instead of inferred.
    std::vector<std::string> date_columns;
    /// Optional raw-row filter applied while streaming, before type inference.
    /// Receives the full header and the raw cells of one record.
    std::function<bool(const std::vector<std::string>&, const std::vector<std::string>&)> row_filter;
};

namespace detail {

/// Reads one CSV record (RFC-4180 quoting: embedded commas, quotes, newlines).
/// Returns false at end of input. `line` tracks the record's starting line.
inline bool read_record(std::istream& in, std::vector<std::string>& cells, std::size_t& line) {
    cells.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            cells.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            ++line;
            if (!field.empty() && field.back() == '\r') field.pop_back();
            cells.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (!any) return false;
    if (!field.empty() && field.back() == '\r') field.pop_back();
    cells.push_back(std::move(field));
    return true;
}

}  // namespace detail

/// Loads a CSV file with a header row. Cell types are inferred per column:
/// all numeric (ignoring missing) -> Numeric, configured date columns -> Date,
/// anything else -> Categorical. Empty cells are missing.
inline RawTable load_csv(const std::string& path, const LoadOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_csv: cannot open '" + path + "'");
    }

    std::vector<std::string> header;
    std::size_t line = 1;
    if (!detail::read_record(in, header, line)) {
        throw std::runtime_error("load_csv: '" + path + "' is empty");
    }
    {
        std::unordered_set<std::string> seen;
        for (const std::string& name : header) {
            if (!seen.insert(name).second) {
                throw std::runtime_error("load_csv: duplicate header '" + name + "' in " + path);
            }
        }
    }

    std::vector<std::size_t> keep;
    if (options.keep_columns.empty()) {
        keep.resize(header.size());
        for (std::size_t i = 0; i < header.size(); ++i) keep[i] = i;
    } else {
        for (std::size_t i = 0; i < header.size(); ++i) {
            for (const std::string& wanted : options.keep_columns) {
                if (header[i] == wanted) {
                    keep.push_back(i);
                    break;
                }
            }
        }
    }

    RawTable table;
    for (std::size_t idx : keep) table.column_names.push_back(header[idx]);
    table.columns.resize(keep.size());

    std::vector<std::string> cells;
    while (true) {
        const std::size_t record_line = line;
        if (!detail::read_record(in, cells, line)) break;
        if (cells.size() == 1 && cells[0].empty()) continue;  // trailing blank line
        if (cells.size() != header.size()) {
            throw std::runtime_error("load_csv: ragged row at line " +
                                     std::to_string(record_line) + " of '" + path + "' (" +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()) + ")");
        }
        if (options.row_filter && !options.row_filter(header, cells)) continue;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            table.columns[k].push_back(cells[keep[k]]);
        }
    }

    table.column_types.resize(table.columns.size(), ColumnType::Categorical);
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
        bool is_date = false;
        for (const std::string& d : options.date_columns) {
            if (table.column_names[k] == d) {
                is_date = true;
                break;
            }
        }
        if (is_date) {
            table.column_types[k] = ColumnType::Date;
            continue;
        }
        bool numeric = true;
        for (const std::string& cell : table.columns[k]) {
            if (cell.empty()) continue;
            if (!parse_number(cell)) {
                numeric = false;
                break;
            }
        }
        table.column_types[k] = numeric ? ColumnType::Numeric : ColumnType::Categorical;
    }
    return table;
}

/// Removes columns whose missing fraction strictly exceeds `threshold`.
inline RawTable drop_high_missing(const RawTable& table, double threshold = 0.5,
                                  std::vector<std::string>* dropped = nullptr) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("drop_high_missing: threshold must be in (0,1]");
    }
    RawTable out;
    const double rows = static_cast<double>(table.row_count());
    for (std::size_t k = 0; k < table.column_count(); ++k) {
        std::size_t missing = 0;
        for (const std::string& cell : table.columns[k]) {
            if (cell.empty()) ++missing;
        }
        if (rows > 0 && static_cast<double>(missing) / rows > threshold) {
            if (dropped) dropped->push_back(table.column_names[k]);
            continue;
        }
        out.column_names.push_back(table.column_names[k]);
        out.columns.push_back(table.columns[k]);
        out.column_types.push_back(table.column_types[k]);
    }
    return out;
}

}  // namespace bsac
