// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lapkit/operator_core.hpp"

namespace lapkit::io {

enum class MMFormat { coordinate, array };
enum class MMField { real, complex, integer, pattern };
enum class MMSymmetry { general, symmetric, hermitian, skew_symmetric };

struct MatrixMarketHeader {
  MMFormat format = MMFormat::coordinate;
  MMField field = MMField::real;
  MMSymmetry symmetry = MMSymmetry::general;
};

struct MatrixMarketData {
  MatrixMarketHeader header;
  SparseCMatrix matrix;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] inline void fail(int line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "Matrix Market line " + std::to_string(line) + ": " + what);
}

inline MatrixMarketHeader parse_banner(const std::string& line) {
  std::istringstream ss(line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") fail(1, "missing %%MatrixMarket banner");
  if (lower(object) != "matrix") fail(1, "only 'matrix' objects are supported");
  MatrixMarketHeader h;
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format == "coordinate") h.format = MMFormat::coordinate;
  else if (format == "array") h.format = MMFormat::array;
  else fail(1, "unknown format '" + format + "'");
  if (field == "real" || field == "double") h.field = MMField::real;
  else if (field == "complex") h.field = MMField::complex;
  else if (field == "integer") h.field = MMField::integer;
  else if (field == "pattern") h.field = MMField::pattern;
  else fail(1, "unknown field '" + field + "'");
  if (symmetry == "general") h.symmetry = MMSymmetry::general;
  else if (symmetry == "symmetric") h.symmetry = MMSymmetry::symmetric;
  else if (symmetry == "hermitian") h.symmetry = MMSymmetry::hermitian;
  else if (symmetry == "skew-symmetric") h.symmetry = MMSymmetry::skew_symmetric;
  else fail(1, "unknown symmetry '" + symmetry + "'");
  if (h.field == MMField::pattern && h.format == MMFormat::array) fail(1, "pattern arrays are invalid");
  if (h.symmetry == MMSymmetry::hermitian && h.field != MMField::complex) {
    fail(1, "hermitian symmetry requires the complex field");
  }
  return h;
}

inline cplx read_value(std::istringstream& ss, MMField field, int line) {
  double re = 1.0, im = 0.0;
  if (field != MMField::pattern) {
    if (!(ss >> re)) fail(line, "missing value");
    if (field == MMField::complex && !(ss >> im)) fail(line, "missing imaginary part");
  }
  return {re, im};
}

}  // namespace detail

/// Reads a Matrix Market stream. Symmetric, Hermitian and skew-symmetric
/// storage is expanded to the full matrix.
inline MatrixMarketData read_matrix_market(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) detail::fail(1, "empty input");
  ++line_no;
  MatrixMarketData out;
  out.header = detail::parse_banner(line);
  const auto& h = out.header;

  // Skip comments and blank lines up to the size line.
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    break;
  }
  std::istringstream size_line(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols)) detail::fail(line_no, "bad size line");
  if (h.format == MMFormat::coordinate && !(size_line >> nnz)) detail::fail(line_no, "missing nnz");
  if (rows <= 0 || cols <= 0 || nnz < 0) detail::fail(line_no, "nonpositive dimensions");
  if (h.symmetry != MMSymmetry::general && rows != cols) {
    detail::fail(line_no, "symmetric storage requires a square matrix");
  }

  std::vector<Eigen::Triplet<cplx>> triplets;
  const auto push = [&](long i, long j, cplx v) {
    triplets.emplace_back(i, j, v);
    if (i == j) return;
    switch (h.symmetry) {
      case MMSymmetry::general: break;
      case MMSymmetry::symmetric: triplets.emplace_back(j, i, v); break;
      case MMSymmetry::hermitian: triplets.emplace_back(j, i, std::conj(v)); break;
      case MMSymmetry::skew_symmetric: triplets.emplace_back(j, i, -v); break;
    }
  };

  const auto next_data_line = [&](std::istringstream& ss) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '%') continue;
      ss = std::istringstream(line);
      return true;
    }
    return false;
  };

  std::istringstream ss;
  if (h.format == MMFormat::coordinate) {
    for (long k = 0; k < nnz; ++k) {
      if (!next_data_line(ss)) detail::fail(line_no, "expected " + std::to_string(nnz) + " entries");
      long i = 0, j = 0;
      if (!(ss >> i >> j)) detail::fail(line_no, "bad coordinate entry");
      if (i < 1 || i > rows || j < 1 || j > cols) detail::fail(line_no, "index out of range");
      if (h.symmetry != MMSymmetry::general && j > i) {
        detail::fail(line_no, "upper-triangle entry in symmetric storage");
      }
      push(i - 1, j - 1, detail::read_value(ss, h.field, line_no));
    }
  } else {
    // Column-major; symmetric kinds list the lower triangle only (strictly
    // lower for skew-symmetric).
    for (long j = 0; j < cols; ++j) {
      long i0 = 0;
      if (h.symmetry == MMSymmetry::symmetric || h.symmetry == MMSymmetry::hermitian) i0 = j;
      if (h.symmetry == MMSymmetry::skew_symmetric) i0 = j + 1;
      for (long i = i0; i < rows; ++i) {
        if (!next_data_line(ss)) detail::fail(line_no, "array ended early");
        const cplx v = detail::read_value(ss, h.field, line_no);
        if (v != cplx(0.0)) push(i, j, v);
      }
    }
  }
  out.matrix = SparseCMatrix(rows, cols);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  return out;
}

inline MatrixMarketData read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open Matrix Market file '" + path + "'");
  return read_matrix_market(in);
}

/// Writes a complex general matrix with 17 significant digits.
inline void write_matrix_market(std::ostream& out, const CMatrix& m,
                                MMFormat format = MMFormat::coordinate) {
  char buf[96];
  out << "%%MatrixMarket matrix " << (format == MMFormat::coordinate ? "coordinate" : "array")
      << " complex general\n";
  if (format == MMFormat::coordinate) {
    long nnz = 0;
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i)
        if (m(i, j) != cplx(0.0)) ++nnz;
    out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) {
        if (m(i, j) == cplx(0.0)) continue;
        std::snprintf(buf, sizeof buf, "%ld %ld %.16e %.16e\n", static_cast<long>(i + 1),
                      static_cast<long>(j + 1), m(i, j).real(), m(i, j).imag());
        out << buf;
      }
    }
  } else {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.16e %.16e\n", m(i, j).real(), m(i, j).imag());
        out << buf;
      }
    }
  }
}

/// Loads a Hermitian operator; coordinate files keep sparse storage.
inline HermitianOperator load_operator(const std::string& path) {
  const MatrixMarketData d = read_matrix_market_file(path);
  if (d.header.format == MMFormat::coordinate) return HermitianOperator::from_sparse(d.matrix);
  return HermitianOperator(CMatrix(d.matrix));
}

inline Rigging load_rigging(const std::string& path) {
  return Rigging(CMatrix(read_matrix_market_file(path).matrix));
}

}  // namespace lapkit::io
