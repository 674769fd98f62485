#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "curplus/types.hpp"

namespace curplus {

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Reads the banner and positions the stream at the size line.
inline void read_mm_banner(std::istream& in, const std::string& want_format) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("matrix market: empty stream");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lowercase(object) != "matrix")
    throw std::runtime_error("matrix market: bad banner: " + line);
  if (lowercase(format) != want_format)
    throw std::runtime_error("matrix market: expected " + want_format +
                             " format, got " + format);
  if (lowercase(field) != "real")
    throw std::runtime_error("matrix market: only real field supported");
  if (lowercase(symmetry) != "general")
    throw std::runtime_error("matrix market: only general symmetry supported");
  // Skip comment lines.
  while (in.peek() == '%') std::getline(in, line);
}

}  // namespace detail

/// Matrix Market dense array format, column-major values.
inline Matrix read_matrix_market_array(std::istream& in) {
  detail::read_mm_banner(in, "array");
  Index n = 0, m = 0;
  if (!(in >> n >> m) || n <= 0 || m <= 0)
    throw std::runtime_error("matrix market: bad array size line");
  Matrix M(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i)
      if (!(in >> M(i, j)))
        throw std::runtime_error("matrix market: truncated array data");
  if (!all_finite(M))
    throw std::runtime_error("matrix market: non-finite entry in array data");
  return M;
}

inline void write_matrix_market_array(const Matrix& M, std::ostream& out) {
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << " " << M.cols() << "\n";
  out << std::setprecision(17);
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) out << M(i, j) << "\n";
}

/// Matrix Market coordinate format; 1-based on disk, 0-based in memory.
inline ObservationSet read_matrix_market_coord(std::istream& in) {
  detail::read_mm_banner(in, "coordinate");
  Index n = 0, m = 0, nnz = 0;
  if (!(in >> n >> m >> nnz) || n <= 0 || m <= 0 || nnz < 0)
    throw std::runtime_error("matrix market: bad coordinate size line");
  std::vector<Observation> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v))
      throw std::runtime_error("matrix market: truncated coordinate data");
    entries.push_back({i - 1, j - 1, v});
  }
  return ObservationSet(n, m, std::move(entries));
}

inline void write_matrix_market_coord(const ObservationSet& obs,
                                      std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << obs.rows() << " " << obs.cols() << " " << obs.size() << "\n";
  out << std::setprecision(17);
  for (const auto& e : obs.entries())
    out << (e.row + 1) << " " << (e.col + 1) << " " << e.value << "\n";
}

/// Headerless CSV, one matrix row per line.
inline Matrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("csv: cannot parse cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: empty input");
  Matrix M(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  if (!all_finite(M)) throw std::runtime_error("csv: non-finite entry");
  return M;
}

inline void write_csv(const Matrix& M, std::ostream& out) {
  out << std::setprecision(17);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ",";
      out << M(i, j);
    }
    out << "\n";
  }
}

// File-path conveniences. Format chosen by extension: .mtx/.mm -> Matrix
// Market array, anything else -> CSV.

inline bool has_mm_extension(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) return false;
  const auto ext = detail::lowercase(path.substr(dot));
  return ext == ".mtx" || ext == ".mm";
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

inline Matrix load_matrix(const std::string& path) {
  auto in = open_input(path);
  return has_mm_extension(path) ? read_matrix_market_array(in) : read_csv(in);
}

inline void save_matrix(const Matrix& M, const std::string& path) {
  auto out = open_output(path);
  if (has_mm_extension(path))
    write_matrix_market_array(M, out);
  else
    write_csv(M, out);
}

inline ObservationSet load_observations(const std::string& path) {
  auto in = open_input(path);
  return read_matrix_market_coord(in);
}

inline void save_observations(const ObservationSet& obs,
                              const std::string& path) {
  auto out = open_output(path);
  write_matrix_market_coord(obs, out);
}

}  // namespace curplus
