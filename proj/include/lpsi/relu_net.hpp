#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "lpsi/cpwl.hpp"
#include "lpsi/rational.hpp"

namespace lpsi {

/// x -> out_weight * (weight * x + bias)_+
template <class S>
struct Neuron1D {
  S weight;
  S bias;
  S out_weight;
};

/// Single-hidden-layer scalar ReLU network with a skip connection:
///   f(x) = sum_k v_k (w_k x + b_k)_+ + a x + c
template <class S>
struct ReLUNet1D {
  std::vector<Neuron1D<S>> neurons;
  S skip_a = S(0);
  S skip_c = S(0);

  S operator()(const S& x) const {
    S value = skip_a * x + skip_c;
    for (const auto& n : neurons) {
      S pre = n.weight * x + n.bias;
      if (pre > S(0)) value += n.out_weight * pre;
    }
    return value;
  }

  /// sum_k |w_k v_k|^p
  double path_norm(double p) const {
    double total = 0.0;
    for (const auto& n : neurons) {
      const double t = std::abs(to_double(n.weight) * to_double(n.out_weight));
      if (t != 0.0) total += std::pow(t, p);
    }
    return total;
  }
};

/// Canonical network: one neuron per knot, |w_k| = 1, activation sites
/// pairwise distinct, skip connection carrying the base affine part.
template <class S>
ReLUNet1D<S> to_network(const CPWLFunction<S>& f) {
  ReLUNet1D<S> net;
  net.skip_a = f.base_slope();
  net.skip_c = f.anchor_y() - f.base_slope() * f.anchor_x();
  net.neurons.reserve(f.knot_count());
  for (const auto& k : f.knots()) {
    net.neurons.push_back({S(1), S(-k.location), k.slope_change});
  }
  return net;
}

/// Collapses a network to its canonical CPWL form. Neurons sharing an
/// activation site merge; by |a+b|^p <= |a|^p + |b|^p the merge never
/// increases the path norm for any p in (0,1].
template <class S>
CPWLFunction<S> from_network(const ReLUNet1D<S>& net) {
  S affine_a = net.skip_a;
  S affine_c = net.skip_c;
  std::vector<Knot<S>> knots;
  knots.reserve(net.neurons.size());
  for (const auto& n : net.neurons) {
    if (n.weight == S(0)) {
      // Constant contribution v * (b)_+.
      if (n.bias > S(0)) affine_c += n.out_weight * n.bias;
      continue;
    }
    if (n.out_weight == S(0)) continue;
    const S site = -n.bias / n.weight;
    const S change = n.out_weight * abs_value(n.weight);
    if (n.weight < S(0)) {
      // v (w x + b)_+ = v (w x + b) + |w| v (x - site)_+
      affine_a += n.out_weight * n.weight;
      affine_c += n.out_weight * n.bias;
    }
    knots.push_back({site, change});
  }
  S anchor_x = S(0);
  if (!knots.empty()) {
    anchor_x = std::min_element(knots.begin(), knots.end(),
                                [](const Knot<S>& a, const Knot<S>& b) {
                                  return a.location < b.location;
                                })
                   ->location -
               S(1);
  }
  const S anchor_y = affine_a * anchor_x + affine_c;
  return CPWLFunction<S>(anchor_x, anchor_y, affine_a, std::move(knots));
}

}  // namespace lpsi
