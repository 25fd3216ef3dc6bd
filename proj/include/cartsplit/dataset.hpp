#pragma once
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartsplit {

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

enum class ResponseKind { Continuous, Binary };

// Immutable after construction. Features are stored column-major so that the
// per-feature split scans walk contiguous memory.
struct Dataset {
    std::vector<std::vector<double>> columns;  // columns[j][i], values in [0,1]
    std::vector<double> response;
    std::vector<std::string> names;
    ResponseKind kind = ResponseKind::Continuous;

    int n() const { return static_cast<int>(response.size()); }
    int d() const { return static_cast<int>(columns.size()); }
    double x(int row, int col) const { return columns[col][row]; }

    void validate() const {
        if (n() < 1 || d() < 1) throw DataError("dataset requires n >= 1 and d >= 1");
        for (int j = 0; j < d(); ++j) {
            if (static_cast<int>(columns[j].size()) != n())
                throw DataError("column length mismatch");
            for (double v : columns[j])
                if (!(v >= 0.0 && v <= 1.0))
                    throw DataError("feature value outside [0,1]; load with standardize=true");
        }
        if (kind == ResponseKind::Binary) {
            for (double y : response)
                if (y != 1.0 && y != -1.0)
                    throw DataError("binary response must take values in {-1,+1}");
        }
    }
};

// Axis-aligned box plus the sorted row indices it contains.
struct NodeRegion {
    std::vector<double> lower, upper;
    std::vector<int> rows;

    static NodeRegion root(const Dataset& data) {
        NodeRegion r;
        r.lower.assign(data.d(), 0.0);
        r.upper.assign(data.d(), 1.0);
        r.rows.resize(data.n());
        for (int i = 0; i < data.n(); ++i) r.rows[i] = i;
        return r;
    }

    int count() const { return static_cast<int>(rows.size()); }

    bool contains(const Dataset& data, int row) const {
        for (size_t j = 0; j < lower.size(); ++j) {
            const double v = data.x(row, static_cast<int>(j));
            if (v < lower[j] || v > upper[j]) return false;
        }
        return true;
    }

    void check_invariants(const Dataset& data) const {
        for (size_t j = 0; j < lower.size(); ++j)
            if (!(lower[j] < upper[j])) throw DataError("degenerate subnode: a_j >= b_j");
        for (size_t i = 1; i < rows.size(); ++i)
            if (rows[i - 1] >= rows[i]) throw DataError("row list not sorted/unique");
        for (int r : rows)
            if (!contains(data, r)) throw DataError("row outside region bounds");
    }
};

// ---------------------------------------------------------------------------
// min-max standardization: X' = (X - min) / (max - min), constant columns -> 0
// ---------------------------------------------------------------------------

struct Standardization {
    std::vector<double> mins, maxs;

    double apply(int col, double v) const {
        const double range = maxs[col] - mins[col];
        if (range <= 0.0) return 0.0;
        double s = (v - mins[col]) / range;
        return std::clamp(s, 0.0, 1.0);
    }
};

inline Standardization fit_standardization(const std::vector<std::vector<double>>& columns) {
    Standardization st;
    for (const auto& col : columns) {
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        st.mins.push_back(*mn);
        st.maxs.push_back(*mx);
    }
    return st;
}

inline void apply_standardization(std::vector<std::vector<double>>& columns,
                                  const Standardization& st) {
    for (size_t j = 0; j < columns.size(); ++j)
        for (double& v : columns[j]) v = st.apply(static_cast<int>(j), v);
}

// ---------------------------------------------------------------------------
// CSV ingestion: comma-separated, header row, '.' decimal point
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_cell(const std::string& cell, int row, int col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // Reject empty cells and trailing garbage.
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || !std::isfinite(v))
        throw DataError("non-numeric or missing cell at row " + std::to_string(row) +
                        ", column " + std::to_string(col + 1));
    return v;
}

} // namespace detail

// Numeric CSV table in raw units (no scaling, no range requirements).
struct RawTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    int n() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }

    // Remove a column by name; returns its values.
    std::vector<double> take_column(const std::string& name) {
        for (size_t j = 0; j < names.size(); ++j) {
            if (names[j] != name) continue;
            auto out = std::move(columns[j]);
            columns.erase(columns.begin() + j);
            names.erase(names.begin() + j);
            return out;
        }
        throw DataError("column '" + name + "' not found in header");
    }
};

inline RawTable load_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
        line = line.substr(3);  // UTF-8 BOM
    RawTable table;
    table.names = detail::split_csv_line(line);
    for (auto& h : table.names) {
        while (!h.empty() && h.front() == ' ') h.erase(h.begin());
        while (!h.empty() && h.back() == ' ') h.pop_back();
    }
    table.columns.resize(table.names.size());
    int row = 1;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != table.names.size())
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(table.names.size()));
        for (size_t j = 0; j < cells.size(); ++j)
            table.columns[j].push_back(detail::parse_cell(cells[j], row, static_cast<int>(j)));
        ++row;
    }
    if (table.n() == 0) throw DataError("no data rows in " + path);
    return table;
}

struct CsvLoadResult {
    Dataset data;
    Standardization standardization;  // identity-equivalent when standardize=false
};

inline CsvLoadResult load_csv(const std::string& path, const std::string& response_column,
                              bool standardize = true,
                              ResponseKind kind_hint = ResponseKind::Continuous,
                              bool auto_detect_binary = true) {
    RawTable table = load_csv_table(path);
    CsvLoadResult out;
    auto& data = out.data;
    data.response = table.take_column(response_column);
    data.names = std::move(table.names);
    data.columns = std::move(table.columns);

    out.standardization = fit_standardization(data.columns);
    if (standardize) {
        apply_standardization(data.columns, out.standardization);
    } else {
        for (size_t j = 0; j < data.columns.size(); ++j) {
            out.standardization.mins[j] = 0.0;
            out.standardization.maxs[j] = 1.0;
        }
    }

    bool saw_pos = false, saw_neg = false, all_pm1 = true;
    for (double y : data.response) {
        if (y == 1.0) saw_pos = true;
        else if (y == -1.0) saw_neg = true;
        else all_pm1 = false;
    }
    data.kind = kind_hint;
    if (auto_detect_binary && kind_hint == ResponseKind::Continuous && all_pm1 && saw_pos &&
        saw_neg)
        data.kind = ResponseKind::Binary;
    if (data.kind == ResponseKind::Binary) {
        if (!all_pm1) throw DataError("binary response must take values in {-1,+1}");
        if (!saw_pos || !saw_neg)
            throw DataError("invalid labels: binary response is constant");
    }
    data.validate();
    return out;
}

} // namespace cartsplit
