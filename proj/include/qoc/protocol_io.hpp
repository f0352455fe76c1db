#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoc/protocol.hpp"

namespace qoc {

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Column-oriented CSV writer: header row plus one row per sample, LF line
/// endings, full precision. All columns must have equal length.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw std::invalid_argument("write_csv: header/column count mismatch");
    for (const auto& col : columns)
        if (col.size() != columns.front().size())
            throw std::invalid_argument("write_csv: ragged columns");
    std::ofstream out(path, std::ios::binary);  // binary: keep LF on every platform
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << format_double(columns[c][r]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_protocol_csv(const std::string& path, const ControlProtocol& protocol) {
    validate_protocol(protocol);
    if (protocol.has_lambda())
        write_csv(path, {"t", "gamma", "lambda"},
                  {protocol.grid(), protocol.gamma, protocol.lambda});
    else
        write_csv(path, {"t", "gamma"}, {protocol.grid(), protocol.gamma});
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_field(const std::string& field, std::size_t row, const char* name) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != field.size() || field.empty())
        throw std::runtime_error("row " + std::to_string(row) + ": invalid " + name + " value '" +
                                 field + "'");
    return value;
}

}  // namespace detail

/// Read a protocol from CSV with header "t,gamma" or "t,gamma,lambda".
/// The grid must start at 0 and be uniform (relative tolerance 1e-9);
/// errors carry the 1-based row number (header is row 1).
inline ControlProtocol read_protocol_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);

    std::string line;
    std::size_t row = 0;
    std::vector<double> t, gamma, lambda;
    bool with_lambda = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_row(line);
        if (row == 1) {
            if (fields.size() == 2 && fields[0] == "t" && fields[1] == "gamma")
                with_lambda = false;
            else if (fields.size() == 3 && fields[0] == "t" && fields[1] == "gamma" &&
                     fields[2] == "lambda")
                with_lambda = true;
            else
                throw std::runtime_error("row 1: expected header 't,gamma' or 't,gamma,lambda'");
            continue;
        }
        const std::size_t expected = with_lambda ? 3 : 2;
        if (fields.size() != expected)
            throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                                     std::to_string(expected) + " fields, got " +
                                     std::to_string(fields.size()));
        t.push_back(detail::parse_field(fields[0], row, "t"));
        gamma.push_back(detail::parse_field(fields[1], row, "gamma"));
        if (with_lambda) lambda.push_back(detail::parse_field(fields[2], row, "lambda"));
    }
    if (row == 0) throw std::runtime_error("empty file: " + path);
    if (t.size() < 3)
        throw std::runtime_error("need at least 3 data rows, got " + std::to_string(t.size()));

    const double tau = t.back();
    if (!(tau > 0.0)) throw std::runtime_error("final time must be positive");
    if (std::abs(t.front()) > 1e-12 * tau)
        throw std::runtime_error("row 2: grid must start at t = 0");
    const double dt = tau / static_cast<double>(t.size() - 1);
    for (std::size_t k = 0; k < t.size(); ++k)
        if (std::abs(t[k] - static_cast<double>(k) * dt) > 1e-9 * tau)
            throw std::runtime_error("row " + std::to_string(k + 2) + ": grid is not uniform");

    return ControlProtocol(tau, std::move(gamma), std::move(lambda));
}

}  // namespace qoc
