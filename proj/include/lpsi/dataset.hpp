#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lpsi/errors.hpp"
#include "lpsi/rational.hpp"

namespace lpsi {

/// Labeled 1-D points sorted by abscissa. Duplicate abscissae are rejected at
/// construction; the original row order is remembered for provenance.
template <class S>
class Dataset1D {
 public:
  Dataset1D(std::vector<S> xs, std::vector<S> ys) {
    if (xs.size() != ys.size()) throw ValidationError("x/y length mismatch");
    if (xs.size() < 2) throw ValidationError("need at least 2 points");
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    was_sorted_ = std::is_sorted(order.begin(), order.end());
    x_.reserve(xs.size());
    y_.reserve(ys.size());
    for (std::size_t k : order) {
      x_.push_back(xs[k]);
      y_.push_back(ys[k]);
    }
    for (std::size_t i = 1; i < x_.size(); ++i) {
      if (!(x_[i - 1] < x_[i])) {
        throw ValidationError("duplicate abscissa at input rows " +
                              std::to_string(order[i - 1] + 1) + " and " +
                              std::to_string(order[i] + 1));
      }
    }
  }

  std::size_t size() const { return x_.size(); }
  const std::vector<S>& x() const { return x_; }
  const std::vector<S>& y() const { return y_; }
  const S& x(std::size_t i) const { return x_[i]; }
  const S& y(std::size_t i) const { return y_[i]; }
  /// False when the loader had to reorder the input rows.
  bool was_sorted() const { return was_sorted_; }

 private:
  std::vector<S> x_, y_;
  bool was_sorted_ = true;
};

template <class S, class T>
Dataset1D<S> convert_dataset(const Dataset1D<T>& d) {
  std::vector<S> xs, ys;
  xs.reserve(d.size());
  ys.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    xs.push_back(S(d.x(i)));
    ys.push_back(S(d.y(i)));
  }
  return Dataset1D<S>(std::move(xs), std::move(ys));
}

inline Dataset1D<double> to_float_dataset(const Dataset1D<Rational>& d) {
  std::vector<double> xs, ys;
  xs.reserve(d.size());
  ys.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    xs.push_back(to_double(d.x(i)));
    ys.push_back(to_double(d.y(i)));
  }
  return Dataset1D<double>(std::move(xs), std::move(ys));
}

}  // namespace lpsi
