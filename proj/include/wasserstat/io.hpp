#pragma once

#include <Eigen/Dense>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wasserstat/errors.hpp"
#include "wasserstat/linalg.hpp"

namespace wasserstat {

/// Formats a double with 17 significant digits (lossless round trip).
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Reads a headerless rectangular numeric CSV into an n×d matrix. Rows and
/// columns in error messages are 1-based.
inline MatrixXd read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("read_data_csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (start <= line.size()) {
      ++col;
      std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      while (first < last && (*first == ' ' || *first == '\t')) ++first;
      while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || first == last) {
        throw ParseError("read_data_csv: non-numeric field '" + std::string(first, last) + "' at " +
                             path + ":" + std::to_string(line_no) + " column " + std::to_string(col),
                         line_no, col);
      }
      row.push_back(value);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("read_data_csv: ragged row at " + path + ":" + std::to_string(line_no) +
                           " (expected " + std::to_string(rows.front().size()) + " fields, got " +
                           std::to_string(row.size()) + ")",
                       line_no, row.size());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("read_data_csv: empty file " + path);

  MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) out(i, j) = rows[i][j];
  return out;
}

/// Atomic file write: the content lands in a temporary sibling which is then
/// renamed over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out) throw InvalidInput("atomic_write: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

inline void write_data_csv(const std::string& path, const MatrixXd& data) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (j) out << ',';
      out << format_double(data(i, j));
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

/// Headered result table, written atomically with a fixed column order.
inline void write_table(const std::string& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw InvalidInput("write_table: row width " + std::to_string(row.size()) +
                         " does not match header width " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

}  // namespace wasserstat
