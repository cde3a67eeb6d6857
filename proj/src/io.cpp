#include "fasm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <system_error>

namespace fasm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

bool parse_cell(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    if (cell == "nan" || cell == "NaN" || cell == "NAN") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (cell == "inf" || cell == "Inf" || cell == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (cell == "-inf" || cell == "-Inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    const char* first = cell.data();
    const char* last = first + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

CsvMatrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path.string() + "' for reading");

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) lines.push_back(line);
    }
    if (lines.empty()) throw io_error("'" + path.string() + "' contains no data");

    CsvMatrix result;
    std::size_t first_data = 0;

    // a header is any first line whose cells are not all numeric
    {
        const std::vector<std::string> cells = split_cells(lines[0]);
        bool all_numeric = true;
        double tmp;
        for (const std::string& c : cells) {
            if (!parse_cell(c, tmp)) {
                all_numeric = false;
                break;
            }
        }
        if (!all_numeric) {
            result.header = cells;
            first_data = 1;
            if (lines.size() == 1) throw io_error("'" + path.string() + "' has a header but no rows");
        }
    }

    const std::size_t rows = lines.size() - first_data;
    std::size_t cols = 0;
    for (std::size_t i = first_data; i < lines.size(); ++i) {
        const std::vector<std::string> cells = split_cells(lines[i]);
        if (i == first_data) {
            cols = cells.size();
            result.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (cells.size() != cols) {
            throw io_error("'" + path.string() + "' row " + std::to_string(i + 1) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            double v;
            if (!parse_cell(cells[j], v)) {
                throw io_error("'" + path.string() + "' row " + std::to_string(i + 1) + " column " +
                               std::to_string(j + 1) + ": cannot parse '" + cells[j] + "'");
            }
            result.values(static_cast<Eigen::Index>(i - first_data),
                          static_cast<Eigen::Index>(j)) = v;
        }
    }
    return result;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw io_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw io_error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " +
                       ec.message());
    }
}

void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header) {
    if (!header.empty() && static_cast<Eigen::Index>(header.size()) != values.cols())
        throw std::invalid_argument("write_csv_matrix: header width does not match columns");

    std::string out;
    out.reserve(static_cast<std::size_t>(values.size()) * 12 + 64);
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j) out += ',';
            out += header[j];
        }
        out += '\n';
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) out += ',';
            out += format_double(values(i, j));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace fasm
