#pragma once

// Delimited-text data files: a header row of column names followed by
// numeric rows. Copula-scale input is validated and clamped into the open
// unit interval; observation-scale input is mapped to ranks/(n+1) per
// column.

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vineclust/core.hpp"
#include "vineclust/stats.hpp"

namespace vineclust {

struct Dataset {
    Mat u;  // copula-scale data in (0,1)
    std::vector<std::string> names;
    std::string source;
    std::string scale;  // "u" or "x"
    int clamped = 0;    // u-scale cells moved off the boundary
};

namespace detail {

inline char sniff_delimiter(const std::string& header) {
    for (char c : {'\t', ',', ';'})
        if (header.find(c) != std::string::npos) return c;
    return ',';
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delim)) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        std::size_t s = 0;
        while (s < field.size() && field[s] == ' ') ++s;
        out.push_back(field.substr(s));
    }
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

}  // namespace detail

/// Reads a delimited file (comma, tab, or semicolon; header row required).
/// scale "u" expects values in [0,1] and clamps the boundary inward;
/// scale "x" rank-transforms each column to ranks/(n+1).
inline Dataset ingest_csv(const std::string& path, const std::string& scale = "u") {
    if (scale != "u" && scale != "x")
        throw data_error("ingest: scale must be 'u' or 'x', got '" + scale + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open data file " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file, header row required");
    const char delim = detail::sniff_delimiter(line);
    Dataset ds;
    ds.source = path;
    ds.scale = scale;
    ds.names = detail::split_fields(line, delim);
    const int d = static_cast<int>(ds.names.size());
    if (d < 1) throw data_error(path + ": header row has no columns");
    for (int j = 0; j < d; ++j)
        if (ds.names[j].empty())
            throw data_error(path + ": header column " + std::to_string(j + 1) + " is empty");

    std::vector<double> cells;
    int file_line = 1;
    while (std::getline(in, line)) {
        ++file_line;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_fields(line, delim);
        if (static_cast<int>(fields.size()) != d)
            throw data_error(path + ": line " + std::to_string(file_line) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(d));
        for (int j = 0; j < d; ++j) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[j], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != fields[j].size() || fields[j].empty() || !std::isfinite(v))
                throw data_error(path + ": line " + std::to_string(file_line) + ", column " +
                                 std::to_string(j + 1) + ": '" + fields[j] +
                                 "' is not a finite number");
            cells.push_back(v);
        }
    }
    const int n = static_cast<int>(cells.size()) / d;
    if (n < 1) throw data_error(path + ": no data rows");

    Mat x(n, d);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < d; ++j) x(r, j) = cells[static_cast<std::size_t>(r) * d + j];

    if (scale == "u") {
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < d; ++j) {
                const double v = x(r, j);
                if (v < 0.0 || v > 1.0)
                    throw data_error(path + ": line " + std::to_string(r + 2) + ", column " +
                                     std::to_string(j + 1) + ": value " + std::to_string(v) +
                                     " outside [0,1] on the copula scale");
                const double c = clamp_unit(v);
                if (c != v) ++ds.clamped;
                x(r, j) = c;
            }
        ds.u = std::move(x);
    } else {
        if (n < 2) throw data_error(path + ": rank transform needs at least 2 rows");
        ds.u = Mat(n, d);
        for (int j = 0; j < d; ++j) {
            const Vec col = x.col(j);
            if (col.maxCoeff() == col.minCoeff())
                throw data_error(path + ": column " + std::to_string(j + 1) + " ('" +
                                 ds.names[j] + "') is constant; rank transform is degenerate");
            ds.u.col(j) = average_ranks(col) / (n + 1.0);
        }
    }
    return ds;
}

/// Writes a comma-separated file with a header row, atomically. Values keep
/// round-trip precision, so equal matrices give byte-identical files.
inline std::string format_csv(const std::vector<std::string>& names, const Mat& data) {
    if (static_cast<Eigen::Index>(names.size()) != data.cols())
        throw data_error("format_csv: " + std::to_string(names.size()) + " names for " +
                         std::to_string(data.cols()) + " columns");
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data(r, j);
        out << '\n';
    }
    return out.str();
}

}  // namespace vineclust
