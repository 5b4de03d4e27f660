#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "lpsi/errors.hpp"
#include "lpsi/rational.hpp"

namespace lpsi {

enum class LPStatus { optimal, infeasible, unbounded };

template <class S>
struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  std::vector<S> x;
  S objective = S(0);
};

namespace detail {

template <class S>
constexpr S lp_eps() {
  if constexpr (is_exact_scalar_v<S>) {
    return S(0);
  } else {
    return S(1e-9);
  }
}

}  // namespace detail

/// Dense two-phase simplex over free variables. Pivoting is Bland's rule
/// throughout, so runs are deterministic and, over Rational, exact and
/// cycle-free. Intended for desk-scale problems; no attempt at sparsity.
template <class S>
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t nvars) : nvars_(nvars), objective_(nvars, S(0)) {}

  void minimize(std::vector<S> c) { objective_ = std::move(c); }

  void add_eq(std::vector<S> a, S b) { rows_.push_back({std::move(a), std::move(b), 0}); }
  void add_ge(std::vector<S> a, S b) { rows_.push_back({std::move(a), std::move(b), 1}); }
  void add_le(std::vector<S> a, S b) { rows_.push_back({std::move(a), std::move(b), -1}); }

  std::size_t num_vars() const { return nvars_; }

  LPSolution<S> solve() const {
    const S eps = detail::lp_eps<S>();
    const std::size_t m = rows_.size();
    if (m == 0) {
      LPSolution<S> sol;
      sol.status = LPStatus::optimal;
      sol.x.assign(nvars_, S(0));
      bool free_descent = false;
      for (const auto& c : objective_) {
        if (!(c == S(0))) free_descent = true;
      }
      if (free_descent) sol.status = LPStatus::unbounded;
      return sol;
    }
    // Columns: x+ (nvars), x- (nvars), slacks (one per inequality), then
    // artificials (one per row). RHS kept separately.
    std::size_t nslack = 0;
    for (const auto& r : rows_) {
      if (r.kind != 0) ++nslack;
    }
    const std::size_t nx = 2 * nvars_;
    const std::size_t ncols = nx + nslack + m;
    std::vector<std::vector<S>> t(m, std::vector<S>(ncols + 1, S(0)));
    std::size_t slack = 0;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = rows_[r];
      for (std::size_t j = 0; j < nvars_; ++j) {
        t[r][j] = row.a[j];
        t[r][nvars_ + j] = -row.a[j];
      }
      if (row.kind == 1) {
        t[r][nx + slack++] = S(-1);  // a.x - s = b
      } else if (row.kind == -1) {
        t[r][nx + slack++] = S(1);  // a.x + s = b
      }
      t[r][ncols] = row.b;
      if (t[r][ncols] < S(0)) {
        for (auto& v : t[r]) v = -v;
      }
      t[r][nx + nslack + r] = S(1);  // artificial
    }

    std::vector<std::size_t> basis(m);
    for (std::size_t r = 0; r < m; ++r) basis[r] = nx + nslack + r;

    // Phase 1: minimize the artificial sum.
    std::vector<S> cost(ncols, S(0));
    for (std::size_t j = nx + nslack; j < ncols; ++j) cost[j] = S(1);
    if (!run_simplex(t, basis, cost, nx + nslack + m, eps)) {
      throw InternalError("simplex: phase 1 unbounded");
    }
    S art_sum = S(0);
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] >= nx + nslack) art_sum += t[r][ncols];
    }
    if (art_sum > eps) return {LPStatus::infeasible, {}, S(0)};

    // Pivot leftover artificials out; a row with no eligible column is
    // redundant and can be neutralized in place.
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < nx + nslack) continue;
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < nx + nslack; ++j) {
        if (!(t[r][j] == S(0)) && abs_value(t[r][j]) > eps) {
          enter = j;
          break;
        }
      }
      if (enter == ncols) {
        for (auto& v : t[r]) v = S(0);
        continue;
      }
      pivot(t, basis, r, enter);
    }

    // Phase 2 with artificials frozen.
    std::vector<S> cost2(ncols, S(0));
    for (std::size_t j = 0; j < nvars_; ++j) {
      cost2[j] = objective_[j];
      cost2[nvars_ + j] = -objective_[j];
    }
    if (!run_simplex(t, basis, cost2, nx + nslack, eps)) {
      return {LPStatus::unbounded, {}, S(0)};
    }

    std::vector<S> full(ncols, S(0));
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < ncols) full[basis[r]] = t[r][ncols];
    }
    LPSolution<S> sol;
    sol.status = LPStatus::optimal;
    sol.x.resize(nvars_);
    for (std::size_t j = 0; j < nvars_; ++j) sol.x[j] = full[j] - full[nvars_ + j];
    sol.objective = S(0);
    for (std::size_t j = 0; j < nvars_; ++j) sol.objective += objective_[j] * sol.x[j];
    return sol;
  }

 private:
  struct Row {
    std::vector<S> a;
    S b;
    int kind;  // 0 ==, 1 >=, -1 <=
  };

  static void pivot(std::vector<std::vector<S>>& t, std::vector<std::size_t>& basis,
                    std::size_t prow, std::size_t pcol) {
    const std::size_t ncols = t[0].size();
    const S inv = S(1) / t[prow][pcol];
    for (std::size_t j = 0; j < ncols; ++j) t[prow][j] *= inv;
    t[prow][pcol] = S(1);
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (r == prow || t[r][pcol] == S(0)) continue;
      const S f = t[r][pcol];
      for (std::size_t j = 0; j < ncols; ++j) t[r][j] -= f * t[prow][j];
      t[r][pcol] = S(0);
    }
    basis[prow] = pcol;
  }

  /// Bland's rule simplex over columns [0, active_cols). Returns false on
  /// unboundedness.
  static bool run_simplex(std::vector<std::vector<S>>& t, std::vector<std::size_t>& basis,
                          const std::vector<S>& cost, std::size_t active_cols, const S& eps) {
    const std::size_t m = t.size();
    const std::size_t rhs = t[0].size() - 1;
    while (true) {
      // Reduced costs: c_j - c_B . B^-1 A_j, computed directly.
      std::size_t enter = active_cols;
      for (std::size_t j = 0; j < active_cols; ++j) {
        S red = cost[j];
        for (std::size_t r = 0; r < m; ++r) {
          if (cost[basis[r]] != S(0)) red -= cost[basis[r]] * t[r][j];
        }
        if (red < -eps) {
          enter = j;
          break;  // Bland: first eligible column
        }
      }
      if (enter == active_cols) return true;
      std::size_t leave = m;
      for (std::size_t r = 0; r < m; ++r) {
        if (t[r][enter] > eps) {
          if (leave == m) {
            leave = r;
          } else {
            const S cur = t[r][rhs] / t[r][enter];
            const S best = t[leave][rhs] / t[leave][enter];
            if (cur < best || (cur == best && basis[r] < basis[leave])) leave = r;
          }
        }
      }
      if (leave == m) return false;
      pivot(t, basis, leave, enter);
    }
  }

  std::size_t nvars_;
  std::vector<S> objective_;
  std::vector<Row> rows_;
};

}  // namespace lpsi
