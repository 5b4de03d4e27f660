#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "lpsi/dataset.hpp"
#include "lpsi/errors.hpp"
#include "lpsi/parallel.hpp"
#include "lpsi/prng.hpp"
#include "lpsi/relu_net.hpp"
#include "lpsi/simplex.hpp"
#include "lpsi/univariate.hpp"

namespace lpsi {

/// Brute-force validators. They certify solver output at desk scale and are
/// deliberately not performance-tuned.
struct OracleConfig {
  int grid_resolution = 20;  // per alpha coordinate
  int restarts = 100;
  std::uint64_t seed = 1;
  int l0_piece_cap = 10;
};

// ---------------------------------------------------------------------------
// Dense alpha-grid search over the characterized family
// ---------------------------------------------------------------------------

template <class S>
struct GridOracleResult {
  double cost = 0.0;
  CPWLFunction<S> f;
};

namespace oracle_detail {

constexpr int kGridRunCap = 6;  // cap on m-1; the grid has (g+1)^(m-1) points

inline double slope_sequence_cost(const std::vector<double>& slopes, double p) {
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < slopes.size(); ++t) {
    const double d = std::abs(slopes[t + 1] - slopes[t]);
    if (d != 0.0) total += std::pow(d, p);
  }
  return total;
}

}  // namespace oracle_detail

/// Exhaustive grid over alpha in {0, 1/g, ..., 1}^(m-1) per run, interior
/// points included. The grid contains the cube vertices, so its minimum can
/// never exceed the solver cost by more than roundoff, and by concavity it
/// never undercuts it.
template <class S>
GridOracleResult<S> alpha_grid_oracle(const Dataset1D<S>& d, double p, const OracleConfig& cfg) {
  const auto sp = slope_profile(d);
  GridOracleResult<S> out;
  const bool straight =
      d.size() == 2 ||
      std::all_of(sp.curvatures.begin(), sp.curvatures.end(), [](int c) { return c == 0; });
  if (straight) {
    out.f = CPWLFunction<S>::line(d.x(0) - S(1), d.y(0) - sp.slopes[0], sp.slopes[0]);
    return out;
  }
  const auto sk = skeleton(d);
  double total = 0.0;
  for (const auto& k : sk.forced_knots) {
    total += std::pow(std::abs(to_double(k.slope_change)), p);
  }
  const int g = cfg.grid_resolution;
  std::vector<std::vector<S>> best_u;
  for (const auto& run : sk.free_runs) {
    if (run.m - 1 > oracle_detail::kGridRunCap) {
      throw ResourceError("alpha_grid_oracle: run with m-1 = " + std::to_string(run.m - 1) +
                          " exceeds grid cap " + std::to_string(oracle_detail::kGridRunCap));
    }
    const int len = run.m - 1;
    std::uint64_t count = 1;
    for (int j = 0; j < len; ++j) count *= (g + 1);

    std::vector<double> s(run.m + 2);
    for (int t = 0; t < run.m + 2; ++t) s[t] = to_double(sp.slopes[run.start - 1 + t]);

    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_idx = 0;
    std::vector<double> slopes(run.m + 1);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      std::uint64_t rem = idx;
      slopes[0] = s[0];
      for (int j = 0; j < len; ++j) {
        const double a = static_cast<double>(rem % (g + 1)) / g;
        rem /= (g + 1);
        slopes[j + 1] = (1.0 - a) * s[j + 1] + a * s[j + 2];
      }
      slopes[run.m] = s[run.m + 1];
      const double c = oracle_detail::slope_sequence_cost(slopes, p);
      if (c < best) {
        best = c;
        best_idx = idx;
      }
    }
    total += best;

    std::vector<S> u(len);
    std::uint64_t rem = best_idx;
    for (int j = 0; j < len; ++j) {
      const int steps = static_cast<int>(rem % (g + 1));
      rem /= (g + 1);
      const S a = S(steps) / S(g);
      u[j] = (S(1) - a) * sp.slopes[run.start + j] + a * sp.slopes[run.start + j + 1];
    }
    best_u.push_back(std::move(u));
  }
  out.cost = total;
  out.f = detail::assemble(d, sk, best_u);
  return out;
}

// ---------------------------------------------------------------------------
// Random-restart search over raw network parameters
// ---------------------------------------------------------------------------

struct RestartOracleResult {
  double cost = 0.0;
  ReLUNet1D<double> net;
};

namespace oracle_detail {

/// Gaussian elimination with partial pivoting; false when near-singular.
inline bool dense_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double v = b[r];
    for (std::size_t k = r + 1; k < n; ++k) v -= a[r][k] * x[k];
    x[r] = v / a[r][r];
  }
  return true;
}

/// Interpolating network for fixed knot sites: solve the square system for
/// skip (a, c) plus the N-2 output weights, then price the path norm. No
/// magnitude thresholding: tiny weights are charged, which can only
/// overstate the cost.
struct KnotCostModel {
  const Dataset1D<double>& d;

  double operator()(const std::vector<double>& knots, double p,
                    std::vector<double>* theta_out = nullptr) const {
    const std::size_t n = d.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i][0] = d.x(i);
      a[i][1] = 1.0;
      for (std::size_t j = 0; j < knots.size(); ++j) {
        a[i][2 + j] = std::max(0.0, d.x(i) - knots[j]);
      }
      b[i] = d.y(i);
    }
    std::vector<double> theta;
    if (!dense_solve(std::move(a), std::move(b), theta)) {
      return std::numeric_limits<double>::infinity();
    }
    double cost = 0.0;
    for (std::size_t j = 2; j < theta.size(); ++j) {
      const double v = std::abs(theta[j]);
      if (v != 0.0) cost += std::pow(v, p);
    }
    if (theta_out) *theta_out = std::move(theta);
    return cost;
  }
};

template <class F>
double golden_section(double lo, double hi, int probes, const F& f) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < probes; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace oracle_detail

/// Generic probe over the raw parameterization: random knot sites, linear
/// interpolation solve, 200 steps of coordinate descent with golden-section
/// line search. Used only as a "never beats the solver" witness.
template <class S>
RestartOracleResult random_restart_oracle(const Dataset1D<S>& dd, double p,
                                          const OracleConfig& cfg) {
  Dataset1D<double> d = [&]() -> Dataset1D<double> {
    if constexpr (is_exact_scalar_v<S>) {
      return to_float_dataset(dd);
    } else {
      return dd;
    }
  }();
  const std::size_t n = d.size();
  const std::size_t k = n - 2;
  oracle_detail::KnotCostModel model{d};

  RestartOracleResult out;
  if (k == 0) {
    const double slope = (d.y(1) - d.y(0)) / (d.x(1) - d.x(0));
    out.net.skip_a = slope;
    out.net.skip_c = d.y(0) - slope * d.x(0);
    return out;
  }

  struct Attempt {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<double> knots;
  };
  std::vector<Attempt> attempts(cfg.restarts);
  parallel_for(cfg.restarts, [&](std::size_t rix) {
    Rng rng = Rng::derive(cfg.seed, rix);
    std::vector<double> knots(k);
    for (auto& t : knots) t = rng.uniform(d.x(0), d.x(n - 1));
    std::sort(knots.begin(), knots.end());
    double cost = model(knots, p);
    std::vector<double> trial = knots;
    for (int it = 0; it < 200; ++it) {
      const std::size_t j = it % k;
      const double lo = j == 0 ? d.x(0) : knots[j - 1];
      const double hi = j + 1 == k ? d.x(n - 1) : knots[j + 1];
      if (!(hi > lo)) continue;
      const double cand = oracle_detail::golden_section(lo, hi, 14, [&](double t) {
        trial = knots;
        trial[j] = t;
        return model(trial, p);
      });
      trial = knots;
      trial[j] = cand;
      const double c = model(trial, p);
      if (c < cost) {
        cost = c;
        knots = trial;
      }
    }
    attempts[rix] = {cost, std::move(knots)};
  });

  std::size_t winner = 0;
  for (std::size_t r = 1; r < attempts.size(); ++r) {
    if (attempts[r].cost < attempts[winner].cost) winner = r;
  }
  out.cost = attempts[winner].cost;
  std::vector<double> theta;
  if (std::isfinite(out.cost)) {
    model(attempts[winner].knots, p, &theta);
    out.net.skip_a = theta[0];
    out.net.skip_c = theta[1];
    for (std::size_t j = 0; j < k; ++j) {
      out.net.neurons.push_back({1.0, -attempts[winner].knots[j], theta[2 + j]});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition + linear-feasibility l0 oracle
// ---------------------------------------------------------------------------

namespace oracle_detail {

/// Feasibility of one chain of consecutive non-empty pieces. Each piece's
/// line interpolates its points; consecutive lines must meet inside the data
/// gap separating their groups. "Meets inside [lo, hi]" is
/// D(lo) * D(hi) <= 0 for the linear difference D, a two-way disjunction per
/// junction, resolved by DFS over sign branches with an exact LP over the
/// free (one-point-piece) slopes. Gaps of consecutive junctions are ordered,
/// so knot ordering is automatic.
class SubchainChecker {
 public:
  explicit SubchainChecker(const Dataset1D<Rational>& d) : d_(d) {}

  /// bounds: point-index boundaries b0 < b1 < ... < bq; piece j holds points
  /// [b_j, b_{j+1}). All pieces non-empty. Collinearity of multi-point
  /// pieces must hold (checked here as well).
  bool feasible(const std::vector<int>& bounds) {
    const int q = static_cast<int>(bounds.size()) - 1;
    struct Piece {
      bool fixed = false;
      Rational slope, intercept;
      int anchor = -1;
      int var = -1;
    };
    std::vector<Piece> pieces(q);
    int nvars = 0;
    for (int j = 0; j < q; ++j) {
      const int lo = bounds[j], hi = bounds[j + 1];
      if (hi - lo >= 2) {
        const Rational m = (d_.y(hi - 1) - d_.y(lo)) / (d_.x(hi - 1) - d_.x(lo));
        for (int t = lo + 1; t < hi - 1; ++t) {
          if (d_.y(t) - d_.y(lo) != m * (d_.x(t) - d_.x(lo))) return false;
        }
        pieces[j] = {true, m, d_.y(lo) - m * d_.x(lo), -1, -1};
      } else {
        pieces[j].anchor = lo;
        pieces[j].var = nvars++;
      }
    }

    // Affine form of piece j's value at x over the free slopes:
    // out[0..nvars-1] coefficients, out[nvars] constant.
    auto value_at = [&](int j, const Rational& x) {
      std::vector<Rational> form(nvars + 1, Rational(0));
      if (pieces[j].fixed) {
        form[nvars] = pieces[j].slope * x + pieces[j].intercept;
      } else {
        form[pieces[j].var] = x - d_.x(pieces[j].anchor);
        form[nvars] = d_.y(pieces[j].anchor);
      }
      return form;
    };

    struct Junction {
      std::vector<Rational> at_lo, at_hi;  // affine forms of D at the gap ends
      bool has_vars = false;
    };
    std::vector<Junction> branchy;
    for (int j = 0; j + 1 < q; ++j) {
      const Rational lo = d_.x(bounds[j + 1] - 1);
      const Rational hi = d_.x(bounds[j + 1]);
      Junction J;
      J.at_lo = value_at(j, lo);
      J.at_hi = value_at(j, hi);
      const auto n_lo = value_at(j + 1, lo);
      const auto n_hi = value_at(j + 1, hi);
      for (int v = 0; v <= nvars; ++v) {
        J.at_lo[v] -= n_lo[v];
        J.at_hi[v] -= n_hi[v];
      }
      for (int v = 0; v < nvars; ++v) {
        if (J.at_lo[v] != 0 || J.at_hi[v] != 0) J.has_vars = true;
      }
      if (!J.has_vars) {
        if (sign_of(J.at_lo[nvars]) * sign_of(J.at_hi[nvars]) > 0) return false;
      } else {
        branchy.push_back(std::move(J));
      }
    }
    if (branchy.empty()) return true;

    std::vector<std::vector<Rational>> rows;  // each: coeffs..., const; meaning row >= 0
    return branch(branchy, 0, rows, nvars);
  }

 private:
  static bool lp_feasible(const std::vector<std::vector<Rational>>& rows, int nvars) {
    LinearProgram<Rational> lp(nvars);
    for (const auto& r : rows) {
      std::vector<Rational> a(r.begin(), r.begin() + nvars);
      lp.add_ge(std::move(a), -r[nvars]);
    }
    return lp.solve().status == LPStatus::optimal;
  }

  template <class Junctions>
  bool branch(const Junctions& junctions, std::size_t at, std::vector<std::vector<Rational>>& rows,
              int nvars) {
    if (!lp_feasible(rows, nvars)) return false;
    if (at == junctions.size()) return true;
    const auto& J = junctions[at];
    for (int s : {+1, -1}) {
      std::vector<Rational> r1 = J.at_lo, r2 = J.at_hi;
      for (auto& v : r1) v *= s;
      for (auto& v : r2) v *= -s;
      rows.push_back(std::move(r1));
      rows.push_back(std::move(r2));
      if (branch(junctions, at + 1, rows, nvars)) return true;
      rows.pop_back();
      rows.pop_back();
    }
    return false;
  }

  const Dataset1D<Rational>& d_;
};

}  // namespace oracle_detail

/// Smallest k for which some assignment of the points to k+1 consecutive
/// (possibly empty) affine pieces is feasible. Independent of the structural
/// characterization: pure combinatorial search over partitions plus exact
/// linear feasibility. An empty piece is always routable through a
/// non-degenerate gap (pick the line through the two junction targets), so
/// empties split the feasibility check into independent subchains.
template <class S>
int partition_lp_l0_oracle(const Dataset1D<S>& dd, const OracleConfig& cfg) {
  const Dataset1D<Rational> d = [&]() -> Dataset1D<Rational> {
    if constexpr (is_exact_scalar_v<S>) {
      return dd;
    } else {
      std::vector<Rational> xs, ys;
      for (std::size_t i = 0; i < dd.size(); ++i) {
        xs.push_back(rational_from_double(dd.x(i)));
        ys.push_back(rational_from_double(dd.y(i)));
      }
      return Dataset1D<Rational>(std::move(xs), std::move(ys));
    }
  }();
  const int n = static_cast<int>(d.size());
  if (n > 12) throw ResourceError("partition_lp_l0_oracle: N > 12");

  // max_piece[i]: longest collinear stretch of consecutive points from i.
  std::vector<int> max_piece(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    int len = std::min(2, n - i);
    if (n - i >= 2) {
      const Rational m = (d.y(i + 1) - d.y(i)) / (d.x(i + 1) - d.x(i));
      int j = i + 2;
      while (j < n && d.y(j) - d.y(i) == m * (d.x(j) - d.x(i))) ++j;
      len = j - i;
    } else {
      len = n - i;
    }
    max_piece[i] = len;
  }
  // min_pieces[i]: fewest pieces covering points i..n-1 (greedy is optimal
  // for interval covering).
  std::vector<int> min_pieces(n + 1, 0);
  for (int i = n - 1; i >= 0; --i) min_pieces[i] = 1 + min_pieces[i + max_piece[i]];

  oracle_detail::SubchainChecker checker(d);
  std::map<std::vector<int>, bool> memo;
  auto subchain_ok = [&](const std::vector<int>& bounds) {
    if (bounds.size() <= 2) return true;  // single piece: collinearity held by construction
    auto it = memo.find(bounds);
    if (it != memo.end()) return it->second;
    const bool ok = checker.feasible(bounds);
    memo.emplace(bounds, ok);
    return ok;
  };

  // DFS over compositions of n into `pieces` ordered parts (empty allowed),
  // checking subchains of consecutive non-empty pieces as they close.
  struct Search {
    int n;
    int pieces;
    const std::vector<int>& max_piece;
    const std::vector<int>& min_pieces;
    decltype(subchain_ok)& check;

    bool go(int piece, int consumed, std::vector<int>& open_bounds) {
      if (piece == pieces) {
        if (consumed != n) return false;
        return open_bounds.empty() || check(open_bounds);
      }
      if (min_pieces[consumed] > pieces - piece) return false;
      // Empty piece: closes the open subchain.
      if (open_bounds.empty() || check(open_bounds)) {
        std::vector<int> saved;
        saved.swap(open_bounds);
        if (go(piece + 1, consumed, open_bounds)) return true;
        saved.swap(open_bounds);
      }
      const int longest = std::min(max_piece[consumed], n - consumed);
      for (int take = 1; take <= longest; ++take) {
        if (open_bounds.empty()) open_bounds.push_back(consumed);
        open_bounds.push_back(consumed + take);
        if (go(piece + 1, consumed + take, open_bounds)) return true;
        open_bounds.pop_back();
        if (open_bounds.size() == 1) open_bounds.clear();
      }
      return false;
    }
  };

  const int cap = std::min(cfg.l0_piece_cap, n - 2);
  for (int k = min_pieces[0] - 1; k <= cap; ++k) {
    std::vector<int> open;
    Search search{n, k + 1, max_piece, min_pieces, subchain_ok};
    if (search.go(0, 0, open)) return k;
  }
  if (cap < n - 2) {
    throw ResourceError("partition_lp_l0_oracle: piece cap exceeded, lower bound = " +
                        std::to_string(cap + 1));
  }
  throw InternalError("partition_lp_l0_oracle: no interpolant found up to N-2 knots");
}

}  // namespace lpsi
