#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lpsi/cpwl.hpp"
#include "lpsi/dataset.hpp"
#include "lpsi/errors.hpp"
#include "lpsi/parallel.hpp"
#include "lpsi/rational.hpp"
#include "lpsi/slope_profile.hpp"

namespace lpsi {

// ---------------------------------------------------------------------------
// Structural skeleton
// ---------------------------------------------------------------------------

/// Everything the data forces: knots at lone curvature points, the single
/// knot inside each m == 1 pair bracket, and the base line. Only the
/// interiors of m >= 2 runs stay undetermined.
template <class S>
struct Skeleton {
  SlopeProfile<S> profile;
  RunDecomposition decomposition;
  std::vector<Knot<S>> forced_knots;
  std::vector<CurvatureRun> free_runs;  // m >= 2
};

/// x-coordinate where the lines through (x1,y1) with slope m1 and (x2,y2)
/// with slope m2 meet. Requires m1 != m2.
template <class S>
S line_intersection_x(const S& x1, const S& y1, const S& m1, const S& x2, const S& y2,
                      const S& m2) {
  return (y2 - y1 + m1 * x1 - m2 * x2) / (m1 - m2);
}

template <class S>
Skeleton<S> skeleton(const Dataset1D<S>& d) {
  Skeleton<S> sk;
  sk.profile = slope_profile(d);
  sk.decomposition = decompose_runs(sk.profile);
  const auto& s = sk.profile.slopes;
  for (int p : sk.decomposition.isolated_points) {
    sk.forced_knots.push_back({d.x(p), s[p] - s[p - 1]});
  }
  for (const auto& r : sk.decomposition.runs) {
    if (r.m == 1) {
      const int a = r.start;
      const S loc = line_intersection_x(d.x(a), d.y(a), s[a - 1], d.x(a + 1), d.y(a + 1), s[a + 1]);
      sk.forced_knots.push_back({loc, s[a + 1] - s[a - 1]});
    } else {
      sk.free_runs.push_back(r);
    }
  }
  return sk;
}

// ---------------------------------------------------------------------------
// Run geometry and cost curves
// ---------------------------------------------------------------------------

/// Deduped slope sequence across a run bracket together with the data point
/// each segment passes through. Consecutive equal slopes collapse to one
/// segment spanning both points (their knot is elided).
template <class S>
struct RunGeometry {
  std::vector<S> slopes;
  std::vector<int> anchors;
};

/// u holds the m-1 intermediate slopes; u[j] must lie between
/// slopes[start+j] and slopes[start+j+1].
template <class S>
RunGeometry<S> run_geometry(const CurvatureRun& run, const std::vector<S>& u,
                            const SlopeProfile<S>& sp) {
  RunGeometry<S> g;
  const int a = run.start;
  const int b = run.start + run.m;
  g.slopes.reserve(run.m + 1);
  g.anchors.reserve(run.m + 1);
  auto push = [&](const S& slope, int anchor) {
    if (!g.slopes.empty() && g.slopes.back() == slope) return;
    g.slopes.push_back(slope);
    g.anchors.push_back(anchor);
  };
  push(sp.slopes[a - 1], a);
  for (int j = 0; j < run.m - 1; ++j) push(u[j], a + j + 1);
  push(sp.slopes[b], b);
  return g;
}

template <class S>
std::vector<Knot<S>> run_knots(const RunGeometry<S>& g, const Dataset1D<S>& d) {
  std::vector<Knot<S>> knots;
  knots.reserve(g.slopes.size());
  for (std::size_t t = 0; t + 1 < g.slopes.size(); ++t) {
    const int p1 = g.anchors[t], p2 = g.anchors[t + 1];
    const S loc = line_intersection_x(d.x(p1), d.y(p1), g.slopes[t], d.x(p2), d.y(p2),
                                      g.slopes[t + 1]);
    knots.push_back({loc, g.slopes[t + 1] - g.slopes[t]});
  }
  return knots;
}

/// Positive slope-change magnitudes of one candidate; its cost as a function
/// of p is the generalized Dirichlet polynomial sum b_i^p.
struct CostCurve {
  std::vector<double> magnitudes;

  double value(double p) const {
    double total = 0.0;
    for (double b : magnitudes) total += std::pow(b, p);
    return total;
  }
  int knot_count() const { return static_cast<int>(magnitudes.size()); }
};

/// Binary corner of the per-run cube; alpha[j] == 1 picks the right bracket
/// slope for u_{j+1}. Empty for m == 1 runs.
struct VertexChoice {
  int run_index = -1;
  std::vector<std::uint8_t> alpha;
};

template <class S>
std::vector<S> vertex_slopes(const CurvatureRun& run, const std::vector<std::uint8_t>& alpha,
                             const SlopeProfile<S>& sp) {
  std::vector<S> u(run.m - 1);
  for (int j = 0; j < run.m - 1; ++j) {
    u[j] = alpha[j] ? sp.slopes[run.start + j + 1] : sp.slopes[run.start + j];
  }
  return u;
}

template <class S>
std::vector<S> exact_magnitudes(const RunGeometry<S>& g) {
  std::vector<S> mags;
  mags.reserve(g.slopes.size());
  for (std::size_t t = 0; t + 1 < g.slopes.size(); ++t) {
    mags.push_back(abs_value(S(g.slopes[t + 1] - g.slopes[t])));
  }
  return mags;
}

template <class S>
CostCurve run_cost_curve(const CurvatureRun& run, const std::vector<std::uint8_t>& alpha,
                         const SlopeProfile<S>& sp) {
  const auto g = run_geometry(run, vertex_slopes(run, alpha, sp), sp);
  CostCurve c;
  for (const auto& m : exact_magnitudes(g)) c.magnitudes.push_back(std::abs(to_double(m)));
  return c;
}

namespace detail {

inline std::vector<std::uint8_t> alpha_bits(std::uint64_t index, int len) {
  std::vector<std::uint8_t> a(len);
  for (int j = 0; j < len; ++j) a[j] = (index >> (len - 1 - j)) & 1u;  // alpha_1 is the MSB
  return a;
}

constexpr double kTieRelTol = 1e-12;
constexpr int kRunEnumCap = 30;  // per-run cap on m-1 (2^(m-1) vertices)

}  // namespace detail

struct RunSolve {
  VertexChoice winner;
  double cost = 0.0;
  bool unique = true;
  std::vector<VertexChoice> ties;  // all co-optimal vertices incl. winner when not unique
};

/// Enumerates the 2^(m-1) vertices (minimizers of the strictly concave
/// per-run cost are vertices), returns the lexicographically smallest of the
/// cost ties.
template <class S>
RunSolve solve_run(const CurvatureRun& run, double p, const SlopeProfile<S>& sp,
                   int run_index = -1) {
  if (run.m - 1 > detail::kRunEnumCap) {
    throw ResourceError("solve_run: run with m-1 = " + std::to_string(run.m - 1) +
                        " exceeds enumeration cap " + std::to_string(detail::kRunEnumCap));
  }
  const int len = run.m - 1;
  const std::uint64_t count = 1ull << len;
  auto vertex_cost = [&](std::uint64_t idx) {
    return run_cost_curve(run, detail::alpha_bits(idx, len), sp).value(p);
  };

  double best = std::numeric_limits<double>::infinity();
  if (count <= 2048) {
    for (std::uint64_t i = 0; i < count; ++i) best = std::min(best, vertex_cost(i));
  } else {
    const std::size_t chunks = 64;
    std::vector<double> local(chunks, std::numeric_limits<double>::infinity());
    parallel_for(chunks, [&](std::size_t c) {
      const std::uint64_t lo = count * c / chunks, hi = count * (c + 1) / chunks;
      for (std::uint64_t i = lo; i < hi; ++i) local[c] = std::min(local[c], vertex_cost(i));
    });
    for (double v : local) best = std::min(best, v);
  }

  RunSolve rs;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double c = vertex_cost(i);
    if (c - best <= detail::kTieRelTol * best) {
      rs.ties.push_back({run_index, detail::alpha_bits(i, len)});
    }
  }
  rs.winner = rs.ties.front();
  rs.cost = run_cost_curve(run, rs.winner.alpha, sp).value(p);
  rs.unique = rs.ties.size() == 1;
  if (rs.unique) rs.ties.clear();
  return rs;
}

// ---------------------------------------------------------------------------
// Full solve
// ---------------------------------------------------------------------------

template <class S>
struct SolveResult {
  CPWLFunction<S> f;
  std::vector<VertexChoice> choices;  // one per free run
  PathNormReport cost_report;
  bool unique = true;
  std::vector<VertexChoice> ties;
};

namespace detail {

template <class S>
CPWLFunction<S> assemble(const Dataset1D<S>& d, const Skeleton<S>& sk,
                         const std::vector<std::vector<S>>& run_u) {
  std::vector<Knot<S>> knots = sk.forced_knots;
  for (std::size_t r = 0; r < sk.free_runs.size(); ++r) {
    const auto g = run_geometry(sk.free_runs[r], run_u[r], sk.profile);
    for (auto& k : run_knots(g, d)) knots.push_back(k);
  }
  const S anchor_x = d.x(0) - S(1);
  const S base = sk.profile.slopes[0];
  const S anchor_y = d.y(0) - base * (d.x(0) - anchor_x);
  return CPWLFunction<S>(anchor_x, anchor_y, base, std::move(knots));
}

template <class S>
bool all_collinear(const SlopeProfile<S>& sp) {
  for (int c : sp.curvatures) {
    if (c != 0) return false;
  }
  return true;
}

}  // namespace detail

/// Minimum-V_p interpolant of the data for p in (0,1): forced skeleton plus
/// the winning vertex of every free run.
template <class S>
SolveResult<S> solve(const Dataset1D<S>& d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("solve: p must lie in (0,1)");
  SolveResult<S> out;
  const auto sp = slope_profile(d);
  if (d.size() == 2 || detail::all_collinear(sp)) {
    out.f = CPWLFunction<S>::line(d.x(0) - S(1), d.y(0) - sp.slopes[0], sp.slopes[0]);
    out.cost_report = report(out.f, p);
    return out;
  }
  const auto sk = skeleton(d);
  std::vector<std::vector<S>> run_u;
  for (std::size_t r = 0; r < sk.free_runs.size(); ++r) {
    RunSolve rs = solve_run(sk.free_runs[r], p, sk.profile, static_cast<int>(r));
    run_u.push_back(vertex_slopes(sk.free_runs[r], rs.winner.alpha, sk.profile));
    out.choices.push_back(rs.winner);
    if (!rs.unique) {
      out.unique = false;
      for (auto& t : rs.ties) out.ties.push_back(t);
    }
  }
  out.f = detail::assemble(d, sk, run_u);
  out.cost_report = report(out.f, p);
  return out;
}

/// Fewest knots over the characterized family (which contains a global
/// minimizer). Per run the minimum is ceil((m+1)/2); the enumerated value is
/// cross-checked against that closed form.
template <class S>
std::pair<int, CPWLFunction<S>> min_l0(const Dataset1D<S>& d) {
  const auto sp = slope_profile(d);
  if (d.size() == 2 || detail::all_collinear(sp)) {
    return {0, CPWLFunction<S>::line(d.x(0) - S(1), d.y(0) - sp.slopes[0], sp.slopes[0])};
  }
  const auto sk = skeleton(d);
  int total = static_cast<int>(sk.forced_knots.size());
  std::vector<std::vector<S>> run_u;
  for (const auto& run : sk.free_runs) {
    if (run.m - 1 > detail::kRunEnumCap) {
      throw ResourceError("min_l0: run exceeds enumeration cap");
    }
    const int len = run.m - 1;
    int best = run.m + 1;
    std::vector<std::uint8_t> best_alpha;
    for (std::uint64_t i = 0; i < (1ull << len); ++i) {
      auto alpha = detail::alpha_bits(i, len);
      const int k = run_cost_curve(run, alpha, sp).knot_count();
      if (k < best) {
        best = k;
        best_alpha = std::move(alpha);
      }
    }
    if (best != (run.m + 2) / 2) {
      throw InternalError("min_l0: enumerated run minimum disagrees with ceil((m+1)/2)");
    }
    total += best;
    run_u.push_back(vertex_slopes(run, best_alpha, sp));
  }
  return {total, detail::assemble(d, sk, run_u)};
}

// ---------------------------------------------------------------------------
// Critical threshold p*
// ---------------------------------------------------------------------------

struct PstarCrossing {
  int run_index = -1;
  std::vector<std::uint8_t> winner_alpha, other_alpha;
  double p = 1.0;
};

struct PstarTie {
  int run_index = -1;
  std::vector<std::uint8_t> winner_alpha, other_alpha;
};

struct PstarDiagnostics {
  std::vector<PstarCrossing> crossings;      // every sign change found, not just the first
  std::vector<PstarTie> permanent_ties;      // identical magnitude multisets
};

namespace detail {

// Smallest root of sum(other^p) - sum(winner^p) in a bracket, to 1e-10.
inline double bisect_crossing(const std::vector<double>& winner, const std::vector<double>& other,
                              double lo, double hi) {
  auto g = [&](double p) {
    double v = 0.0;
    for (double b : other) v += std::pow(b, p);
    for (double b : winner) v -= std::pow(b, p);
    return v;
  };
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Data-dependent threshold below which the V_p winner is a sparsest
/// interpolant: per run the p->0+ winner (fewest knots, then cost at 1e-6,
/// then lex) is compared against every other vertex; differences of Dirichlet
/// cost curves have finitely many roots, so a sign scan over a p-grid plus
/// bisection isolates the first crossing. Returns 1 when nothing ever
/// crosses, in particular when no three consecutive points share a curvature
/// sign.
template <class S>
double compute_pstar(const Dataset1D<S>& d, int grid = 512, PstarDiagnostics* diag = nullptr) {
  const auto sp = slope_profile(d);
  if (d.size() == 2 || detail::all_collinear(sp)) return 1.0;
  const auto sk = skeleton(d);
  if (sk.free_runs.empty()) return 1.0;

  double pstar = 1.0;
  for (std::size_t r = 0; r < sk.free_runs.size(); ++r) {
    const auto& run = sk.free_runs[r];
    if (run.m - 1 > detail::kRunEnumCap) throw ResourceError("compute_pstar: run exceeds cap");
    const int len = run.m - 1;
    const std::uint64_t count = 1ull << len;

    struct Candidate {
      std::vector<std::uint8_t> alpha;
      std::vector<S> exact_mags;   // sorted
      std::vector<double> mags;
      int knots;
      double near_zero_cost;
    };
    std::vector<Candidate> cand(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      Candidate c;
      c.alpha = detail::alpha_bits(i, len);
      auto g = run_geometry(run, vertex_slopes(run, c.alpha, sp), sp);
      c.exact_mags = exact_magnitudes(g);
      std::sort(c.exact_mags.begin(), c.exact_mags.end());
      for (const auto& m : c.exact_mags) c.mags.push_back(std::abs(to_double(m)));
      c.knots = static_cast<int>(c.mags.size());
      c.near_zero_cost = 0.0;
      for (double b : c.mags) c.near_zero_cost += std::pow(b, 1e-6);
      cand[i] = std::move(c);
    }

    std::uint64_t w = 0;
    for (std::uint64_t i = 1; i < count; ++i) {
      if (cand[i].knots < cand[w].knots ||
          (cand[i].knots == cand[w].knots && cand[i].near_zero_cost < cand[w].near_zero_cost)) {
        w = i;
      }
    }

    for (std::uint64_t i = 0; i < count; ++i) {
      if (i == w) continue;
      // Cancel shared magnitudes exactly; what remains decides the crossing.
      std::vector<double> wm, om;
      {
        const auto& a = cand[w].exact_mags;
        const auto& b = cand[i].exact_mags;
        std::size_t ia = 0, ib = 0;
        while (ia < a.size() && ib < b.size()) {
          if (a[ia] == b[ib]) {
            ++ia;
            ++ib;
          } else if (a[ia] < b[ib]) {
            wm.push_back(std::abs(to_double(a[ia++])));
          } else {
            om.push_back(std::abs(to_double(b[ib++])));
          }
        }
        for (; ia < a.size(); ++ia) wm.push_back(std::abs(to_double(a[ia])));
        for (; ib < b.size(); ++ib) om.push_back(std::abs(to_double(b[ib])));
      }
      if (wm.empty() && om.empty()) {
        if (diag) diag->permanent_ties.push_back({static_cast<int>(r), cand[w].alpha, cand[i].alpha});
        continue;
      }
      auto g = [&](double p) {
        double v = 0.0;
        for (double b : om) v += std::pow(b, p);
        for (double b : wm) v -= std::pow(b, p);
        return v;
      };
      double prev = 1e-6;
      double gprev = g(prev);
      bool first_for_pair = true;
      for (int k = 1; k <= grid; ++k) {
        const double pk = static_cast<double>(k) / (grid + 1);
        const double gk = g(pk);
        if (gprev >= 0.0 && gk < 0.0) {
          const double root = detail::bisect_crossing(wm, om, prev, pk);
          if (diag) {
            diag->crossings.push_back({static_cast<int>(r), cand[w].alpha, cand[i].alpha, root});
          }
          if (first_for_pair) pstar = std::min(pstar, root);
          first_for_pair = false;
        }
        prev = pk;
        gprev = gk;
      }
    }
  }
  return pstar;
}

// ---------------------------------------------------------------------------
// Independent verification
// ---------------------------------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;

  void add(std::string name, bool pass, std::string detail = "") {
    all_pass = all_pass && pass;
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
};

/// Checks a candidate interpolant against everything the characterization
/// guarantees, without consulting the solver's own run choices.
template <class S>
VerifyReport verify(const Dataset1D<S>& d, const CPWLFunction<S>& f, double /*p*/ = 0.5) {
  VerifyReport rep;
  const std::size_t n = d.size();
  const auto sp = slope_profile(d);

  {
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = std::abs(to_double(S(f(d.x(i)) - d.y(i))));
      const double tol = is_exact_scalar_v<S> ? 0.0 : 1e-10 * std::max(1.0, std::abs(to_double(d.y(i))));
      worst = std::max(worst, resid);
      ok = ok && resid <= tol;
    }
    std::ostringstream os;
    os << "max residual " << worst;
    rep.add("interpolation", ok, os.str());
  }

  rep.add("knot_count", f.knot_count() <= n - 2,
          std::to_string(f.knot_count()) + " knots vs N-2 = " + std::to_string(n - 2));

  {
    bool ok = true;
    for (const auto& k : f.knots()) {
      if (k.location < d.x(1) || k.location > d.x(n - 2)) ok = false;
    }
    rep.add("knot_range", ok, "knots within [x_2, x_{N-1}]");
  }

  {
    double expect = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      expect += std::abs(to_double(S(sp.slopes[i] - sp.slopes[i - 1])));
    }
    const double v1 = vp_cost(f, 1.0);
    const bool ok = std::abs(v1 - expect) <= 1e-9 * std::max(1.0, expect);
    std::ostringstream os;
    os << "V_1 = " << v1 << " expected " << expect;
    rep.add("v1_identity", ok, os.str());
  }

  {
    double max_slope = 0.0;
    for (const auto& s : sp.slopes) max_slope = std::max(max_slope, std::abs(to_double(s)));
    const double lip = f.lipschitz();
    rep.add("lipschitz", lip <= max_slope + 1e-12 * std::max(1.0, max_slope),
            "Lipschitz " + std::to_string(lip) + " vs max slope " + std::to_string(max_slope));
  }

  if (n >= 3) {
    const auto dec = decompose_runs(sp);
    bool ok = true;
    for (const auto& region : dec.linear_regions) {
      for (const auto& k : f.knots()) {
        if (d.x(region.first) < k.location && k.location < d.x(region.second)) ok = false;
      }
    }
    rep.add("forced_linear", ok, "no knots strictly inside forced-linear regions");

    bool brackets_ok = true;
    const auto piece_slopes = f.piece_slopes();
    const auto& knots = f.knots();
    for (const auto& run : dec.runs) {
      const int a = run.start, b = run.start + run.m;
      // Incoming piece sits strictly left of x_a, outgoing strictly right of
      // x_b; knots may land exactly on either bracket endpoint.
      std::size_t first_piece = 0;
      while (first_piece < knots.size() && knots[first_piece].location < d.x(a)) ++first_piece;
      std::size_t last_piece = first_piece;
      while (last_piece < knots.size() && !(knots[last_piece].location > d.x(b))) ++last_piece;
      const double tol = is_exact_scalar_v<S> ? 0.0 : 1e-9;
      auto close = [&](const S& u, const S& v) {
        return std::abs(to_double(S(u - v))) <=
               tol * std::max(1.0, std::abs(to_double(v)));
      };
      if (!close(piece_slopes[first_piece], sp.slopes[a - 1])) brackets_ok = false;
      if (!close(piece_slopes[last_piece], sp.slopes[b])) brackets_ok = false;
      // Greedy bracket containment for the intermediate slopes.
      int j = 1;
      for (std::size_t t = first_piece + 1; t < last_piece; ++t) {
        const S& u = piece_slopes[t];
        bool placed = false;
        while (j <= run.m - 1) {
          const S& lo = sp.slopes[a + j - 1];
          const S& hi = sp.slopes[a + j];
          const S lo2 = lo < hi ? lo : hi;
          const S hi2 = lo < hi ? hi : lo;
          if (!(u < lo2) && !(u > hi2)) {
            placed = true;
            ++j;
            break;
          }
          ++j;
        }
        if (!placed) brackets_ok = false;
      }
    }
    rep.add("bracket_slopes", brackets_ok, "run slopes within their secant brackets");
  }

  return rep;
}

}  // namespace lpsi
