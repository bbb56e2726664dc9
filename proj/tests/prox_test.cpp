#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "asyspcd/prox.hpp"
#include "oracles.hpp"

using namespace asyspcd;

TEST(Prox, CoordinateExamples) {
  // 1/2 (u - 3)^2 + |u| is minimized at u = 2.
  EXPECT_EQ(prox_coordinate(Regularizer::l1(1.0), 3.0, 1.0), 2.0);
  EXPECT_NEAR(oracle::grid_prox(Regularizer::l1(1.0), 3.0, 1.0, -5, 5, 10000), 2.0,
              1e-3);
  EXPECT_EQ(prox_coordinate(Regularizer::zero(), -7.5, 3.0), -7.5);
  EXPECT_EQ(prox_coordinate(Regularizer::box(0.0, INFINITY), -2.0, 0.7), 0.0);
  EXPECT_EQ(prox_coordinate(Regularizer::box(-1.0, 1.0), 4.0, 0.0), 1.0);
}

TEST(Prox, SoftThresholdTieGoesToZero) {
  EXPECT_EQ(prox_coordinate(Regularizer::l1(2.0), 1.0, 0.5), 0.0);
  EXPECT_EQ(prox_coordinate(Regularizer::l1(2.0), -1.0, 0.5), 0.0);
}

TEST(Prox, RejectsNegativeKappa) {
  EXPECT_THROW(prox_coordinate(Regularizer::l1(1.0), 1.0, -0.1),
               std::invalid_argument);
  EXPECT_THROW(prox_full(Regularizer::zero(), std::vector<double>{1.0}, -1.0),
               std::invalid_argument);
}

TEST(Prox, RegularizerValidation) {
  EXPECT_THROW(Regularizer::l1(-1.0), std::invalid_argument);
  EXPECT_THROW(Regularizer::box(1.0, 0.0), std::invalid_argument);
  EXPECT_NO_THROW(Regularizer::box(-INFINITY, INFINITY));
}

TEST(Prox, FullExamples) {
  const std::vector<double> y{3.0, -0.5, 0.0};
  EXPECT_EQ(prox_full(Regularizer::l1(1.0), y, 1.0), (std::vector<double>{2, 0, 0}));
  EXPECT_EQ(prox_full(Regularizer::zero(), y, 5.0), y);
  EXPECT_EQ(prox_full(Regularizer::l1(0.0), y, 9.0), y);
}

TEST(Prox, RegularizerEncodingRoundTrip) {
  for (const auto& r : {Regularizer::zero(), Regularizer::l1(47.015760009535995),
                        Regularizer::box(-INFINITY, 2.5), Regularizer::box(0, INFINITY)})
    EXPECT_EQ(parse_regularizer(format_regularizer(r)), r);
  EXPECT_EQ(format_regularizer(Regularizer::box(0, INFINITY)), "box:0:inf");
  EXPECT_THROW(parse_regularizer("l2:1"), std::invalid_argument);
  EXPECT_THROW(parse_regularizer("l1:abc"), std::invalid_argument);
  EXPECT_THROW(parse_regularizer("box:1"), std::invalid_argument);
}

namespace {

Regularizer random_regularizer(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  switch (kind(rng)) {
    case 0:
      return Regularizer::zero();
    case 1:
      return Regularizer::l1(std::abs(uni(rng)));
    default: {
      double a = uni(rng), b = uni(rng);
      if (a > b) std::swap(a, b);
      return Regularizer::box(a, b);
    }
  }
}

}  // namespace

TEST(ProxProperty, Nonexpansive) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_real_distribution<double> kappa(0.0, 4.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto reg = random_regularizer(rng);
    const std::size_t n = 1 + trial % 8;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = normal(rng);
    }
    const double k = kappa(rng);
    const auto px = prox_full(reg, x, k);
    const auto py = prox_full(reg, y, k);
    double dp = 0.0, d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dp += (px[i] - py[i]) * (px[i] - py[i]);
      d += (x[i] - y[i]) * (x[i] - y[i]);
    }
    ASSERT_LE(std::sqrt(dp), std::sqrt(d) + 1e-12);
  }
}

TEST(ProxProperty, OptimalityAndGridDominance) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> vdist(-5.0, 5.0);
  std::uniform_real_distribution<double> kdist(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto reg = random_regularizer(rng);
    const double v = vdist(rng);
    const double k = kdist(rng);
    const double u = prox_coordinate(reg, v, k);

    // 0 in (u - v) + k dg(u), by case analysis.
    switch (reg.kind) {
      case Regularizer::Kind::Zero:
        EXPECT_EQ(u, v);
        break;
      case Regularizer::Kind::L1: {
        const double t = k * reg.lambda;
        if (u > 0) {
          EXPECT_NEAR(u - v + t, 0.0, 1e-12);
        } else if (u < 0) {
          EXPECT_NEAR(u - v - t, 0.0, 1e-12);
        } else {
          EXPECT_LE(std::abs(v), t + 1e-12);
        }
        break;
      }
      case Regularizer::Kind::Box:
        EXPECT_GE(u, reg.lo);
        EXPECT_LE(u, reg.hi);
        if (u > reg.lo && u < reg.hi) {
          EXPECT_EQ(u, v);
        }
        if (u == reg.lo && reg.lo < reg.hi) {
          EXPECT_LE(v, u);
        }
        if (u == reg.hi && reg.lo < reg.hi) {
          EXPECT_GE(v, u);
        }
        break;
    }

    const double best = oracle::scalar_prox_objective(reg, u, v, k);
    for (int g = 0; g <= 1000; ++g) {
      const double cand = -8.0 + 16.0 * g / 1000.0;
      EXPECT_LE(best, oracle::scalar_prox_objective(reg, cand, v, k) + 1e-12);
    }
  }
}

TEST(ProxProperty, BoxIsIdempotent) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double a = uni(rng), b = uni(rng);
    if (a > b) std::swap(a, b);
    const auto reg = Regularizer::box(a, b);
    const double once = prox_coordinate(reg, uni(rng), 1.0);
    EXPECT_EQ(prox_coordinate(reg, once, 1.0), once);
  }
}
