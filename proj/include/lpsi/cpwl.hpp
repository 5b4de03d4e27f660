#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lpsi/errors.hpp"
#include "lpsi/rational.hpp"

namespace lpsi {

template <class S>
struct Knot {
  S location;
  S slope_change;
};

namespace detail {

// Canonical representation keeps only genuine breakpoints. Exact scalars
// elide exact zeros; floats elide |c| <= 1e-14 * max|c|.
template <class S>
void canonicalize_knots(std::vector<Knot<S>>& knots) {
  std::stable_sort(knots.begin(), knots.end(),
                   [](const Knot<S>& a, const Knot<S>& b) { return a.location < b.location; });
  std::vector<Knot<S>> merged;
  merged.reserve(knots.size());
  for (auto& k : knots) {
    if (!merged.empty() && merged.back().location == k.location) {
      merged.back().slope_change += k.slope_change;
    } else {
      merged.push_back(k);
    }
  }
  if constexpr (is_exact_scalar_v<S>) {
    std::erase_if(merged, [](const Knot<S>& k) { return k.slope_change == 0; });
  } else {
    S max_abs = 0;
    for (const auto& k : merged) max_abs = std::max<S>(max_abs, abs_value(k.slope_change));
    const S cutoff = max_abs * 1e-14;
    std::erase_if(merged, [&](const Knot<S>& k) { return abs_value(k.slope_change) <= cutoff; });
  }
  knots = std::move(merged);
}

}  // namespace detail

/// Continuous piecewise-linear function: an affine part anchored left of all
/// breakpoints plus ordered slope changes.
///
///   f(x) = anchor_y + base_slope * (x - anchor_x) + sum_k c_k * (x - u_k)_+
template <class S>
class CPWLFunction {
 public:
  CPWLFunction() : anchor_x_(0), anchor_y_(0), base_slope_(0) {}

  CPWLFunction(S anchor_x, S anchor_y, S base_slope, std::vector<Knot<S>> knots)
      : anchor_x_(std::move(anchor_x)),
        anchor_y_(std::move(anchor_y)),
        base_slope_(std::move(base_slope)),
        knots_(std::move(knots)) {
    detail::canonicalize_knots(knots_);
  }

  static CPWLFunction line(S x0, S y0, S slope) {
    return CPWLFunction(std::move(x0), std::move(y0), std::move(slope), {});
  }

  S operator()(const S& x) const {
    S value = anchor_y_ + base_slope_ * (x - anchor_x_);
    for (const auto& k : knots_) {
      if (k.location < x) {
        value += k.slope_change * (x - k.location);
      } else {
        break;
      }
    }
    return value;
  }

  const std::vector<Knot<S>>& knots() const { return knots_; }
  const S& anchor_x() const { return anchor_x_; }
  const S& anchor_y() const { return anchor_y_; }
  const S& base_slope() const { return base_slope_; }
  std::size_t knot_count() const { return knots_.size(); }

  /// Slopes of the knot_count()+1 affine pieces, left to right.
  std::vector<S> piece_slopes() const {
    std::vector<S> slopes;
    slopes.reserve(knots_.size() + 1);
    S s = base_slope_;
    slopes.push_back(s);
    for (const auto& k : knots_) {
      s += k.slope_change;
      slopes.push_back(s);
    }
    return slopes;
  }

  double lipschitz() const {
    double best = 0.0;
    for (const auto& s : piece_slopes()) best = std::max(best, std::abs(to_double(s)));
    return best;
  }

  bool operator==(const CPWLFunction& other) const {
    if (knots_.size() != other.knots_.size()) return false;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (knots_[i].location != other.knots_[i].location) return false;
      if (knots_[i].slope_change != other.knots_[i].slope_change) return false;
    }
    // Same breakpoints; identical iff the affine parts agree anywhere left of
    // the first knot.
    if (base_slope_ != other.base_slope_) return false;
    return (*this)(anchor_x_) == other(anchor_x_);
  }

 private:
  S anchor_x_, anchor_y_, base_slope_;
  std::vector<Knot<S>> knots_;
};

/// p-variation of the derivative: sum |c_k|^p for p in (0,1], knot count at
/// p = 0.
template <class S>
double vp_cost(const CPWLFunction<S>& f, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("vp_cost: p must lie in [0,1]");
  if (p == 0.0) return static_cast<double>(f.knot_count());
  double total = 0.0;
  for (const auto& k : f.knots()) total += std::pow(std::abs(to_double(k.slope_change)), p);
  return total;
}

struct PathNormReport {
  double p = 0.0;
  double lp_cost = 0.0;
  double l1_cost = 0.0;
  int l0_count = 0;
  double lipschitz = 0.0;
};

template <class S>
PathNormReport report(const CPWLFunction<S>& f, double p) {
  PathNormReport r;
  r.p = p;
  r.lp_cost = vp_cost(f, p);
  r.l1_cost = vp_cost(f, 1.0);
  r.l0_count = static_cast<int>(f.knot_count());
  r.lipschitz = f.lipschitz();
  return r;
}

}  // namespace lpsi
