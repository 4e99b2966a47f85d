#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "concal/types.hpp"

namespace concal {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last) throw InputError("non-numeric value '" + s + "' at " + where);
    return v;
}

// Tab unless the header has none and does have a comma.
inline char detect_delimiter(const std::string& header) {
    if (header.find('\t') != std::string::npos) return '\t';
    return header.find(',') != std::string::npos ? ',' : '\t';
}

inline std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.push_back(line);
    }
    return lines;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

// Header row: a corner cell then attribute ids. Each further row: item id then values.
inline DataMatrix read_data(std::istream& in, const std::string& source = "input") {
    const auto lines = detail::read_lines(in);
    if (lines.empty()) throw InputError(source + ": empty file");
    const char delim = detail::detect_delimiter(lines.front());
    auto header = detail::split(lines.front(), delim);
    if (header.size() < 2) throw InputError(source + ": header needs an item-id column and at least one attribute");
    const std::size_t p = header.size() - 1;

    RowMatrix values(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(p));
    std::vector<std::string> items;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = detail::split(lines[r], delim);
        if (cells.size() != header.size())
            throw InputError(source + ": line " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                             " fields, expected " + std::to_string(header.size()));
        items.push_back(cells[0]);
        for (std::size_t m = 0; m < p; ++m)
            values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(m)) =
                detail::parse_double(cells[m + 1], source + " line " + std::to_string(r + 1));
    }
    header.erase(header.begin());
    DataMatrix data(std::move(values), std::move(items), std::move(header));
    data.validate();
    return data;
}

inline DataMatrix read_data_file(const std::string& path) {
    auto in = detail::open_input(path);
    return read_data(in, path);
}

// 17 significant digits, enough to parse back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Matrix>
void write_matrix(std::ostream& out, const Matrix& M, const std::vector<std::string>& row_ids,
                  const std::vector<std::string>& col_ids, const std::string& corner = "id") {
    out << corner;
    for (const auto& c : col_ids) out << '\t' << c;
    out << '\n';
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        out << row_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            out << '\t';
            if constexpr (std::is_floating_point_v<typename Matrix::Scalar>)
                out << format_double(static_cast<double>(M(i, j)));
            else
                out << M(i, j);
        }
        out << '\n';
    }
}

inline void write_data(std::ostream& out, const DataMatrix& data) {
    write_matrix(out, data.values, data.item_ids, data.attribute_ids);
}

inline void write_labels(std::ostream& out, const std::vector<std::string>& item_ids, const ClusterAssignment& z) {
    out << "id\tcluster\n";
    for (std::size_t i = 0; i < z.labels.size(); ++i) out << item_ids[i] << '\t' << z.labels[i] << '\n';
}

// Two columns (item id, label) with a header row, or a single column of labels.
inline ClusterAssignment read_labels(std::istream& in, const std::string& source = "labels") {
    const auto lines = detail::read_lines(in);
    if (lines.empty()) throw InputError(source + ": empty file");
    const char delim = detail::detect_delimiter(lines.front());
    const std::size_t width = detail::split(lines.front(), delim).size();
    if (width > 2) throw InputError(source + ": expected one or two columns");

    std::vector<int> raw;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto cells = detail::split(lines[r], delim);
        if (cells.size() != width) throw InputError(source + ": line " + std::to_string(r + 1) + " is ragged");
        const std::string& cell = cells.back();
        int v = 0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
            if (r == 0) continue;  // header
            throw InputError(source + ": non-integer label '" + cell + "' on line " + std::to_string(r + 1));
        }
        raw.push_back(v);
    }
    if (raw.empty()) throw InputError(source + ": no labels");
    return ClusterAssignment::from_labels(raw);
}

inline ClusterAssignment read_labels_file(const std::string& path) {
    auto in = detail::open_input(path);
    return read_labels(in, path);
}

// Per-attribute z-scores (sample sd). Constant attributes are centred only.
inline void standardize(DataMatrix& data) {
    const Eigen::Index n = data.values.rows();
    for (Eigen::Index m = 0; m < data.values.cols(); ++m) {
        auto col = data.values.col(m);
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = n > 1 ? std::sqrt(col.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
        if (sd > 0.0) col /= sd;
    }
}

}  // namespace concal
