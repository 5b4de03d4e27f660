#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lpsi/rational.hpp"

namespace lpsi {

template <class S>
using Matrix = std::vector<std::vector<S>>;

/// Row-reduces a copy of m and returns its rank. Exact for Rational.
template <class S>
std::size_t matrix_rank(Matrix<S> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c] == S(0)) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[rank], m[pivot]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r != rank && m[r][c] != S(0)) {
        const S f = m[r][c] / m[rank][c];
        for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

/// Solves A x = b when the solution is unique; nullopt if inconsistent or
/// underdetermined. A may have more rows than columns.
template <class S>
std::optional<std::vector<S>> solve_unique(Matrix<S> a, std::vector<S> b) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == S(0)) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[rank], a[pivot]);
    std::swap(b[rank], b[pivot]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r != rank && a[r][c] != S(0)) {
        const S f = a[r][c] / a[rank][c];
        for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
        b[r] -= f * b[rank];
      }
    }
    pivot_col.push_back(c);
    ++rank;
  }
  if (rank < cols) return std::nullopt;
  for (std::size_t r = rank; r < rows; ++r) {
    if (b[r] != S(0)) return std::nullopt;
  }
  std::vector<S> x(cols, S(0));
  for (std::size_t r = 0; r < rank; ++r) x[pivot_col[r]] = b[r] / a[r][pivot_col[r]];
  return x;
}

}  // namespace lpsi
