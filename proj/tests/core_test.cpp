#include <cmath>
#include <stdexcept>

#include "gtest/gtest.h"
#include "lpsi/cpwl.hpp"
#include "lpsi/dataset.hpp"
#include "lpsi/prng.hpp"
#include "lpsi/relu_net.hpp"
#include "test_support.hpp"

namespace lpsi {
namespace {

using testing::kOnePlusSqrtTwo;
using testing::kSqrtThreePlusTwo;

CPWLFunction<double> random_cpwl(Rng& rng, int max_knots = 8) {
  const int k = static_cast<int>(rng.below(max_knots + 1));
  std::vector<Knot<double>> knots;
  double loc = rng.uniform(-2.0, -1.0);
  for (int i = 0; i < k; ++i) {
    loc += rng.uniform(0.05, 1.0);
    double c = rng.uniform(-3.0, 3.0);
    if (std::abs(c) < 0.05) c = 0.5;
    knots.push_back({loc, c});
  }
  return CPWLFunction<double>(rng.uniform(-5.0, -3.0), rng.gaussian(), rng.gaussian(),
                              std::move(knots));
}

TEST(CPWLEval, AffineIdentity) {
  const auto f = CPWLFunction<double>::line(0.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(f(5.0), 5.0);
  EXPECT_EQ(f.knot_count(), 0u);
}

TEST(CPWLEval, TwoKnotHat) {
  const CPWLFunction<double> f(0.0, 0.0, 0.0, {{0.0, 1.0}, {1.0, -2.0}});
  EXPECT_DOUBLE_EQ(f(2.0), 0.0);
  EXPECT_DOUBLE_EQ(f(1.0), 1.0);
  EXPECT_DOUBLE_EQ(f(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f(-1.0), 0.0);
}

TEST(CPWLEval, MatchesConvertedNetworkEverywhere) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_cpwl(rng);
    const auto net = to_network(f);
    for (int i = 0; i < 20; ++i) {
      const double x = rng.uniform(-8.0, 8.0);
      const double fx = f(x);
      EXPECT_LE(std::abs(fx - net(x)), 1e-12 * (1.0 + std::abs(fx)));
    }
  }
}

TEST(VpCost, DirectFormula) {
  const CPWLFunction<double> f(0.0, 0.0, 0.0, {{1.0, 3.0}, {2.0, -4.0}});
  EXPECT_NEAR(vp_cost(f, 0.5), kSqrtThreePlusTwo, 1e-12);
  EXPECT_DOUBLE_EQ(vp_cost(f, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(vp_cost(CPWLFunction<double>::line(0, 0, 2.0), 0.7), 0.0);
  EXPECT_THROW(vp_cost(f, 1.5), std::domain_error);
  EXPECT_THROW(vp_cost(f, -0.1), std::domain_error);
}

TEST(VpCost, ZeroPLimit) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Knot<double>> knots;
    const int k = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < k; ++i) {
      knots.push_back({static_cast<double>(i), (rng.uniform01() < 0.5 ? -1 : 1) *
                                                   rng.uniform(0.5, 5.0)});
    }
    const CPWLFunction<double> f(-1.0, 0.0, 0.0, std::move(knots));
    EXPECT_NEAR(vp_cost(f, 1e-6), vp_cost(f, 0.0), 0.01 * vp_cost(f, 0.0));
  }
}

TEST(ToNetwork, StraightLine) {
  const auto net = to_network(CPWLFunction<double>::line(0.0, 1.0, 2.5));
  EXPECT_TRUE(net.neurons.empty());
  EXPECT_DOUBLE_EQ(net.skip_a, 2.5);
  EXPECT_DOUBLE_EQ(net(3.0), 1.0 + 2.5 * 3.0);
}

TEST(ToNetwork, HatMapsKnotsToNeurons) {
  const CPWLFunction<double> f(0.0, 0.0, 0.0, {{0.0, 1.0}, {1.0, -2.0}});
  const auto net = to_network(f);
  ASSERT_EQ(net.neurons.size(), 2u);
  EXPECT_DOUBLE_EQ(net.neurons[0].out_weight, 1.0);
  EXPECT_DOUBLE_EQ(net.neurons[1].out_weight, -2.0);
  EXPECT_DOUBLE_EQ(net.neurons[0].weight, 1.0);
  EXPECT_DOUBLE_EQ(net.neurons[1].weight, 1.0);
}

TEST(ToNetwork, PathNormMatchesVpCost) {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_cpwl(rng);
    const auto net = to_network(f);
    for (int i = 0; i < 20; ++i) {
      const double p = rng.uniform(0.05, 1.0);
      EXPECT_NEAR(net.path_norm(p), vp_cost(f, p), 1e-12 * (1.0 + vp_cost(f, p)));
    }
  }
}

TEST(FromNetwork, AbsoluteValueDecomposition) {
  // (x)_+ + (-x)_+ = |x|: one knot at 0 with slope change 2.
  ReLUNet1D<double> net;
  net.neurons = {{1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}};
  const auto f = from_network(net);
  ASSERT_EQ(f.knot_count(), 1u);
  EXPECT_DOUBLE_EQ(f.knots()[0].location, 0.0);
  EXPECT_DOUBLE_EQ(f.knots()[0].slope_change, 2.0);
  for (double x : {-2.0, -0.5, 0.0, 0.3, 4.0}) EXPECT_NEAR(f(x), std::abs(x), 1e-14);
}

TEST(FromNetwork, RoundTrip) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = random_cpwl(rng);
    const auto g = from_network(to_network(f));
    ASSERT_EQ(g.knot_count(), f.knot_count());
    for (std::size_t i = 0; i < f.knot_count(); ++i) {
      EXPECT_DOUBLE_EQ(g.knots()[i].location, f.knots()[i].location);
      EXPECT_DOUBLE_EQ(g.knots()[i].slope_change, f.knots()[i].slope_change);
    }
    for (int i = 0; i < 10; ++i) {
      const double x = rng.uniform(-10.0, 10.0);
      EXPECT_NEAR(g(x), f(x), 1e-11 * (1.0 + std::abs(f(x))));
    }
  }
}

TEST(FromNetwork, MergingNeverIncreasesCost) {
  Rng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    ReLUNet1D<double> net;
    const int sites = 1 + static_cast<int>(rng.below(3));
    std::vector<double> site_pos(sites);
    for (auto& s : site_pos) s = rng.uniform(-2.0, 2.0);
    const int k = 2 + static_cast<int>(rng.below(5));
    for (int i = 0; i < k; ++i) {
      const double site = site_pos[rng.below(sites)];
      const double w = (rng.uniform01() < 0.5 ? -1 : 1) * rng.uniform(0.2, 2.0);
      net.neurons.push_back({w, -w * site, rng.gaussian()});
    }
    const auto f = from_network(net);
    for (double p : {0.3, 0.7, 1.0}) {
      EXPECT_LE(vp_cost(f, p), net.path_norm(p) + 1e-12);
    }
  }
}

TEST(Report, HatFunction) {
  const CPWLFunction<double> f(0.0, 0.0, 0.0, {{0.0, 1.0}, {1.0, -2.0}});
  const auto r = report(f, 0.5);
  EXPECT_EQ(r.l0_count, 2);
  EXPECT_DOUBLE_EQ(r.l1_cost, 3.0);
  EXPECT_NEAR(r.lp_cost, kOnePlusSqrtTwo, 1e-12);
  EXPECT_DOUBLE_EQ(r.lipschitz, 1.0);
}

TEST(Report, Line) {
  const auto r = report(CPWLFunction<double>::line(0.0, 0.0, -3.5), 0.5);
  EXPECT_EQ(r.l0_count, 0);
  EXPECT_DOUBLE_EQ(r.lipschitz, 3.5);
}

TEST(Report, LipschitzMatchesDenseGridOracle) {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_cpwl(rng);
    double grid_max = 0.0;
    const double lo = -6.0, hi = 6.0;
    const int steps = 4000;
    double prev = f(lo);
    for (int i = 1; i <= steps; ++i) {
      const double x = lo + (hi - lo) * i / steps;
      const double cur = f(x);
      grid_max = std::max(grid_max, std::abs(cur - prev) / ((hi - lo) / steps));
      prev = cur;
    }
    EXPECT_NEAR(report(f, 0.5).lipschitz, grid_max, 1e-6 * (1.0 + grid_max));
  }
}

TEST(Canonicalization, MergesAndElides) {
  const CPWLFunction<double> f(0.0, 0.0, 1.0, {{1.0, 2.0}, {1.0, -2.0}, {2.0, 3.0}});
  ASSERT_EQ(f.knot_count(), 1u);
  EXPECT_DOUBLE_EQ(f.knots()[0].location, 2.0);

  const CPWLFunction<Rational> g(Rational(0), Rational(0), Rational(1),
                                 {{Rational(1), Rational(1, 3)},
                                  {Rational(1), Rational(-1, 3)},
                                  {Rational(2), Rational(5)}});
  ASSERT_EQ(g.knot_count(), 1u);
  EXPECT_EQ(g.knots()[0].location, Rational(2));
}

TEST(Dataset, RejectsDuplicatesAndSorts) {
  EXPECT_THROW(Dataset1D<double>({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), ValidationError);
  EXPECT_THROW(Dataset1D<double>({0.0}, {1.0}), ValidationError);
  const Dataset1D<double> d({2.0, 0.0, 1.0}, {20.0, 0.0, 10.0});
  EXPECT_FALSE(d.was_sorted());
  EXPECT_DOUBLE_EQ(d.x(0), 0.0);
  EXPECT_DOUBLE_EQ(d.y(2), 20.0);
}

TEST(Rational, DecimalParsing) {
  EXPECT_EQ(*parse_decimal("0.05"), Rational(1, 20));
  EXPECT_EQ(*parse_decimal("-12.5e-1"), Rational(-5, 4));
  EXPECT_EQ(*parse_decimal("3E2"), Rational(300));
  EXPECT_FALSE(parse_decimal("abc").has_value());
  EXPECT_FALSE(parse_decimal("1.2.3").has_value());
  EXPECT_EQ(to_fraction_string(Rational(-5, 10)), "-1/2");
  EXPECT_EQ(to_fraction_string(Rational(7)), "7");
  EXPECT_EQ(*parse_fraction("-1/2"), Rational(-1, 2));
}

// Evaluation in exact mode is exact: conversion equivalence with zero
// tolerance.
TEST(ExactMode, EvalEquivalenceIsExact) {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Knot<Rational>> knots;
    Rational loc(-3);
    const int k = 1 + static_cast<int>(rng.below(5));
    for (int i = 0; i < k; ++i) {
      loc += Rational(1 + static_cast<int>(rng.below(5)), 3);
      knots.push_back({loc, Rational(static_cast<int>(rng.below(11)) - 5, 7)});
    }
    const CPWLFunction<Rational> f(Rational(-5), Rational(1, 3), Rational(2, 5), std::move(knots));
    const auto net = to_network(f);
    const auto g = from_network(net);
    for (int i = 0; i < 50; ++i) {
      const Rational x(static_cast<int>(rng.below(200)) - 100, 7);
      EXPECT_EQ(f(x), net(x));
      EXPECT_EQ(f(x), g(x));
    }
  }
}

}  // namespace
}  // namespace lpsi
