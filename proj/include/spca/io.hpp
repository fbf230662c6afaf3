#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spca/types.hpp"

namespace spca {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest-safe round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw io_error(where + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, const std::string& where) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw io_error(where + ": not an integer: '" + std::string(s) + "'");
  return v;
}

inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrix CSV: first line "d,n", then d rows of n comma-separated values.

inline void write_matrix(std::ostream& out, const Matrix& M) {
  out << M.rows() << ',' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

inline Matrix read_matrix(std::istream& in, const std::string& where = "matrix") {
  std::string line;
  if (!detail::next_line(in, line)) throw io_error(where + ": missing 'd,n' header");
  const auto head = detail::split(line, ',');
  if (head.size() != 2) throw io_error(where + ": header must be 'd,n', got '" + line + "'");
  const long long d = detail::parse_int(head[0], where);
  const long long n = detail::parse_int(head[1], where);
  if (d < 0 || n < 0) throw io_error(where + ": negative dimensions");
  Matrix M(d, n);
  for (long long i = 0; i < d; ++i) {
    if (!detail::next_line(in, line)) throw io_error(where + ": expected " + std::to_string(d) + " rows, got " + std::to_string(i));
    const auto cells = detail::split(line, ',');
    if (static_cast<long long>(cells.size()) != n)
      throw io_error(where + ": row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) + " values, expected " + std::to_string(n));
    for (long long j = 0; j < n; ++j) M(i, j) = detail::parse_double(cells[j], where);
  }
  return M;
}

inline void save_matrix(const std::string& path, const Matrix& M) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_matrix(out, M);
  if (!out) throw io_error("write failed: '" + path + "'");
}

inline Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  return read_matrix(in, path);
}

// ---------------------------------------------------------------------------
// Model file:
//   k=<int>
//   p=<float>
//   eta=<float>
//   c=<float>
//   <U in matrix CSV format>
//   <one line of n comma-separated weights>

struct ModelFile {
  Index k = 0;
  double p = 0.0;
  double eta = 0.0;
  double c = 0.0;
  Matrix U;
  Vector weights;
};

inline void write_model(std::ostream& out, const ModelFile& m) {
  out << "k=" << m.k << '\n';
  out << "p=" << format_double(m.p) << '\n';
  out << "eta=" << format_double(m.eta) << '\n';
  out << "c=" << format_double(m.c) << '\n';
  write_matrix(out, m.U);
  for (Index i = 0; i < m.weights.size(); ++i) {
    if (i > 0) out << ',';
    out << format_double(m.weights[i]);
  }
  out << '\n';
}

inline ModelFile read_model(std::istream& in, const std::string& where = "model") {
  ModelFile m;
  std::string line;
  auto header = [&](const char* key) {
    if (!detail::next_line(in, line)) throw io_error(where + ": missing '" + key + "=' line");
    const auto t = detail::trim(line);
    const auto eq = t.find('=');
    if (eq == std::string_view::npos || detail::trim(t.substr(0, eq)) != key)
      throw io_error(where + ": expected '" + key + "=<value>', got '" + line + "'");
    return t.substr(eq + 1);
  };
  m.k = static_cast<Index>(detail::parse_int(header("k"), where));
  m.p = detail::parse_double(header("p"), where);
  m.eta = detail::parse_double(header("eta"), where);
  m.c = detail::parse_double(header("c"), where);
  m.U = read_matrix(in, where);
  if (m.U.cols() != m.k) throw io_error(where + ": k=" + std::to_string(m.k) + " but U has " + std::to_string(m.U.cols()) + " columns");
  if (!detail::next_line(in, line)) throw io_error(where + ": missing weights line");
  const auto cells = detail::split(line, ',');
  m.weights.resize(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) m.weights[static_cast<Index>(i)] = detail::parse_double(cells[i], where);
  return m;
}

inline void save_model(const std::string& path, const ModelFile& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_model(out, m);
  if (!out) throw io_error("write failed: '" + path + "'");
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  return read_model(in, path);
}

}  // namespace spca
