// CSV reading/writing for the numeric tables the tools exchange.
//
// All tables are headered CSV. Matrices use generated column names g0001,
// g0002, ...; response vectors use the single column y; partitions use
// predictor,community; coefficient panels use predictor,beta_k1..beta_kK.
// Indices are 1-based on disk and 0-based in memory. Values are written
// with enough digits to round-trip doubles exactly.
//
// Parse errors throw std::runtime_error carrying "path:line: message".

#pragma once

#include <cofu/eval_types.hpp>
#include <cofu/types.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace cofu {
namespace io {

namespace detail {

[[noreturn]] inline void fail(const std::string& path, std::size_t line,
                              const std::string& message) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + message);
}

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

inline double parse_double(const std::string& cell, const std::string& path,
                           std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    fail(path, line, "non-numeric cell '" + cell + "'");
  return value;
}

inline long parse_long(const std::string& cell, const std::string& path,
                       std::size_t line) {
  long value = 0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    fail(path, line, "non-integer cell '" + cell + "'");
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return in;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

inline std::string predictor_column_name(Index j) {
  // g0001-style, widening past four digits when p is large.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "g%04lld", static_cast<long long>(j + 1));
  return std::string(buf);
}

}  // namespace detail

/// Reads a headered numeric matrix. Every data row must match the header's
/// column count and every cell must parse as a double.
inline Matrix read_matrix(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) detail::fail(path, lineno, "missing header row");
  const std::size_t ncols = detail::split_csv_line(line).size();
  if (ncols == 0) detail::fail(path, lineno, "empty header row");

  std::vector<double> values;
  std::size_t nrows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != ncols)
      detail::fail(path, lineno,
                   "expected " + std::to_string(ncols) + " columns, got " +
                       std::to_string(cells.size()));
    for (const std::string& cell : cells)
      values.push_back(detail::parse_double(cell, path, lineno));
    ++nrows;
  }
  if (nrows == 0) detail::fail(path, lineno, "matrix has no data rows");

  Matrix out(static_cast<Index>(nrows), static_cast<Index>(ncols));
  std::size_t idx = 0;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = values[idx++];
  return out;
}

/// Writes a matrix with g0001-style predictor column names.
inline void write_matrix(const std::string& path, const Matrix& X) {
  std::ofstream out = detail::open_for_write(path);
  for (Index j = 0; j < X.cols(); ++j) {
    if (j > 0) out << ',';
    out << detail::predictor_column_name(j);
  }
  out << '\n';
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (j > 0) out << ',';
      out << detail::format_double(X(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Reads a single-column response file (header "y").
inline Vector read_vector(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) detail::fail(path, lineno, "missing header row");
  if (detail::split_csv_line(line).size() != 1)
    detail::fail(path, lineno, "expected a single column");

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != 1) detail::fail(path, lineno, "expected a single column");
    values.push_back(detail::parse_double(cells[0], path, lineno));
  }
  if (values.empty()) detail::fail(path, lineno, "response has no data rows");
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Index>(values.size()));
}

/// Writes a single-column response file.
inline void write_vector(const std::string& path, const Vector& y) {
  std::ofstream out = detail::open_for_write(path);
  out << "y\n";
  for (Index i = 0; i < y.size(); ++i)
    out << detail::format_double(y(i)) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Reads a partition table (predictor,community; both 1-based on disk).
/// Rows may appear in any order but must cover predictors 1..p exactly once,
/// and community ids must form a gap-free range starting at 1.
inline CommunityPartition read_partition(const std::string& path, Index p) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) detail::fail(path, lineno, "missing header row");
  if (detail::split_csv_line(line).size() != 2)
    detail::fail(path, lineno, "expected columns predictor,community");

  std::vector<Index> community(static_cast<std::size_t>(p), Index{-1});
  Index max_comm = -1;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != 2)
      detail::fail(path, lineno, "expected 2 columns, got " +
                                     std::to_string(cells.size()));
    const long pred = detail::parse_long(cells[0], path, lineno);
    const long comm = detail::parse_long(cells[1], path, lineno);
    if (pred < 1 || pred > static_cast<long>(p))
      detail::fail(path, lineno,
                   "predictor id " + std::to_string(pred) + " out of range 1.." +
                       std::to_string(p));
    if (comm < 1)
      detail::fail(path, lineno,
                   "unknown community id " + std::to_string(comm));
    const auto slot = static_cast<std::size_t>(pred - 1);
    if (community[slot] >= 0)
      detail::fail(path, lineno,
                   "duplicate predictor id " + std::to_string(pred));
    community[slot] = static_cast<Index>(comm - 1);
    max_comm = std::max(max_comm, static_cast<Index>(comm - 1));
    ++seen;
  }
  if (seen != static_cast<std::size_t>(p))
    detail::fail(path, lineno,
                 "partition covers " + std::to_string(seen) +
                     " predictors, expected " + std::to_string(p));
  try {
    return CommunityPartition(community, max_comm + 1);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

/// Writes a partition table (1-based ids on disk).
inline void write_partition(const std::string& path,
                            const CommunityPartition& partition) {
  std::ofstream out = detail::open_for_write(path);
  out << "predictor,community\n";
  for (Index j = 0; j < partition.p(); ++j)
    out << (j + 1) << ',' << (partition.community_of(j) + 1) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Reads a coefficient panel (predictor,beta_k1..beta_kK). The predictor
/// column must run 1..p in order.
inline CoefficientPanel read_panel(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) detail::fail(path, lineno, "missing header row");
  const std::size_t ncols = detail::split_csv_line(line).size();
  if (ncols < 2)
    detail::fail(path, lineno, "expected predictor plus at least one beta column");
  const std::size_t K = ncols - 1;

  std::vector<double> values;
  long expected = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != ncols)
      detail::fail(path, lineno,
                   "expected " + std::to_string(ncols) + " columns, got " +
                       std::to_string(cells.size()));
    const long pred = detail::parse_long(cells[0], path, lineno);
    if (pred != expected)
      detail::fail(path, lineno,
                   "predictor id " + std::to_string(pred) + ", expected " +
                       std::to_string(expected));
    ++expected;
    for (std::size_t k = 1; k < ncols; ++k)
      values.push_back(detail::parse_double(cells[k], path, lineno));
  }
  const auto p = static_cast<Index>(expected - 1);
  if (p == 0) detail::fail(path, lineno, "panel has no data rows");

  CoefficientPanel panel(p, static_cast<Index>(K));
  std::size_t idx = 0;
  for (Index i = 0; i < p; ++i)
    for (Index k = 0; k < panel.cols(); ++k) panel(i, k) = values[idx++];
  return panel;
}

/// Writes a coefficient panel.
inline void write_panel(const std::string& path, const CoefficientPanel& panel) {
  std::ofstream out = detail::open_for_write(path);
  out << "predictor";
  for (Index k = 0; k < panel.cols(); ++k) out << ",beta_k" << (k + 1);
  out << '\n';
  for (Index i = 0; i < panel.rows(); ++i) {
    out << (i + 1);
    for (Index k = 0; k < panel.cols(); ++k)
      out << ',' << detail::format_double(panel(i, k));
    out << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Writes a binary effect-indicator table (predictor,effect_k1..effect_kK).
inline void write_effects(const std::string& path, const BoolGrid& effects) {
  std::ofstream out = detail::open_for_write(path);
  out << "predictor";
  for (Index k = 0; k < effects.cols(); ++k) out << ",effect_k" << (k + 1);
  out << '\n';
  for (Index i = 0; i < effects.rows(); ++i) {
    out << (i + 1);
    for (Index k = 0; k < effects.cols(); ++k)
      out << ',' << (effects(i, k) ? 1 : 0);
    out << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Reads an effect-indicator table; cells must be 0 or 1.
inline BoolGrid read_effects(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) detail::fail(path, lineno, "missing header row");
  const std::size_t ncols = detail::split_csv_line(line).size();
  if (ncols < 2)
    detail::fail(path, lineno,
                 "expected predictor plus at least one effect column");

  std::vector<bool> values;
  long expected = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != ncols)
      detail::fail(path, lineno,
                   "expected " + std::to_string(ncols) + " columns, got " +
                       std::to_string(cells.size()));
    const long pred = detail::parse_long(cells[0], path, lineno);
    if (pred != expected)
      detail::fail(path, lineno,
                   "predictor id " + std::to_string(pred) + ", expected " +
                       std::to_string(expected));
    ++expected;
    for (std::size_t k = 1; k < ncols; ++k) {
      const long v = detail::parse_long(cells[k], path, lineno);
      if (v != 0 && v != 1)
        detail::fail(path, lineno, "indicator cell must be 0 or 1, got " +
                                       std::to_string(v));
      values.push_back(v == 1);
    }
  }
  const auto p = static_cast<Index>(expected - 1);
  if (p == 0) detail::fail(path, lineno, "effect table has no data rows");

  BoolGrid grid(p, static_cast<Index>(ncols - 1));
  std::size_t idx = 0;
  for (Index i = 0; i < p; ++i)
    for (Index k = 0; k < grid.cols(); ++k) grid(i, k) = values[idx++];
  return grid;
}

/// Writes commonality labels: one row per (community, adjacent dataset pair),
/// pair k meaning datasets k and k+1, common in {0,1}. Ids 1-based on disk.
inline void write_commonality(const std::string& path, const BoolGrid& common) {
  std::ofstream out = detail::open_for_write(path);
  out << "community,pair,common\n";
  for (Index l = 0; l < common.rows(); ++l)
    for (Index k = 0; k < common.cols(); ++k)
      out << (l + 1) << ',' << (k + 1) << ',' << (common(l, k) ? 1 : 0) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Reads commonality labels for L communities and K−1 adjacent pairs.
inline BoolGrid read_commonality(const std::string& path, Index L,
                                 Index pairs) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) detail::fail(path, lineno, "missing header row");
  if (detail::split_csv_line(line).size() != 3)
    detail::fail(path, lineno, "expected columns community,pair,common");

  BoolGrid grid = BoolGrid::Constant(L, pairs, false);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(L, pairs,
                                                                   false);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != 3)
      detail::fail(path, lineno, "expected 3 columns, got " +
                                     std::to_string(cells.size()));
    const long comm = detail::parse_long(cells[0], path, lineno);
    const long pair = detail::parse_long(cells[1], path, lineno);
    const long flag = detail::parse_long(cells[2], path, lineno);
    if (comm < 1 || comm > static_cast<long>(L))
      detail::fail(path, lineno, "unknown community id " + std::to_string(comm));
    if (pair < 1 || pair > static_cast<long>(pairs))
      detail::fail(path, lineno, "pair id " + std::to_string(pair) +
                                     " out of range 1.." + std::to_string(pairs));
    if (flag != 0 && flag != 1)
      detail::fail(path, lineno,
                   "common must be 0 or 1, got " + std::to_string(flag));
    if (seen(comm - 1, pair - 1))
      detail::fail(path, lineno, "duplicate (community,pair) row");
    seen(comm - 1, pair - 1) = true;
    grid(comm - 1, pair - 1) = flag == 1;
  }
  if (!seen.all())
    detail::fail(path, lineno, "missing (community,pair) rows");
  return grid;
}

}  // namespace io
}  // namespace cofu
