#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "spca/self_paced.hpp"

namespace {

using spca::optimal_weight;
using spca::regularizer_value;
using big = boost::multiprecision::cpp_dec_float_50;

// Regularizer evaluated in 50-digit arithmetic.
big reference_f(big w, big eta) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  const big shift = exp(-1 / eta);
  big out = -(w + shift) * log(w + shift) - w / eta;
  if (w < 1) out -= (1 - w) * log(1 - w);
  return out;
}

// Grid-search argmax of w*l + f(w, eta) over w in [0, 1].
double grid_argmax(double ell, double eta, double step) {
  const auto n = static_cast<long>(std::llround(1.0 / step));
  double best_w = 0.0;
  double best = -INFINITY;
  for (long i = 0; i <= n; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(n);
    const double v = w * ell + regularizer_value(w, eta);
    if (v > best) {
      best = v;
      best_w = w;
    }
  }
  return best_w;
}

TEST(Regularizer, ZeroWeightUnitAge) {
  const double expected = static_cast<double>(reference_f(big(0), big(1)));
  EXPECT_NEAR(expected, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(regularizer_value(0.0, 1.0), expected, 1e-15);
  EXPECT_NEAR(regularizer_value(0.0, 1.0), 0.367879441171442, 1e-12);
}

TEST(Regularizer, FullWeightUsesLimit) {
  const double expected = -(1 + std::exp(-2.0)) * std::log(1 + std::exp(-2.0)) - 2.0;
  EXPECT_NEAR(regularizer_value(1.0, 0.5), expected, 1e-14);
  EXPECT_NEAR(static_cast<double>(reference_f(big(1), big("0.5"))), expected, 1e-14);
  // continuity from the left
  EXPECT_NEAR(regularizer_value(1.0 - 1e-9, 0.5), expected, 1e-7);
}

TEST(Regularizer, VanishingAge) {
  EXPECT_EQ(regularizer_value(0.0, 1e-4), 0.0);
  EXPECT_NEAR(regularizer_value(0.0, 0.02), 0.0, 1e-19);
}

TEST(Regularizer, MatchesHighPrecisionOnGrid) {
  for (double eta : {0.05, 0.1, 0.5, 2.0}) {
    for (double w = 0.0; w <= 1.0; w += 0.0625) {
      const double ref = static_cast<double>(reference_f(big(w), big(eta)));
      EXPECT_NEAR(regularizer_value(w, eta), ref, 1e-13 * (1 + std::abs(ref))) << "w=" << w << " eta=" << eta;
    }
  }
}

TEST(Regularizer, DomainErrors) {
  EXPECT_THROW(regularizer_value(-0.01, 1.0), spca::invalid_argument);
  EXPECT_THROW(regularizer_value(1.01, 1.0), spca::invalid_argument);
  EXPECT_THROW(regularizer_value(0.5, 0.0), spca::invalid_argument);
  EXPECT_THROW(regularizer_value(0.5, -1.0), spca::invalid_argument);
}

TEST(OptimalWeight, ZeroFidelityIsExactlyZero) {
  for (double eta : {0.01, 0.1, 1.0, 100.0}) EXPECT_EQ(optimal_weight(0.0, eta), 0.0);
}

TEST(OptimalWeight, AtInflection) {
  const double expected = (1 - std::exp(-5.0)) / 2;
  EXPECT_NEAR(expected, 0.496631, 1e-6);
  EXPECT_NEAR(optimal_weight(5.0, 0.2), expected, 1e-15);
  EXPECT_NEAR(grid_argmax(5.0, 0.2, 1e-6), expected, 1e-5);
}

TEST(OptimalWeight, LargeFidelitySaturates) {
  EXPECT_NEAR(optimal_weight(1000.0, 0.1), 1.0, 1e-9);
  EXPECT_TRUE(std::isfinite(optimal_weight(1e308, 0.1)));
  EXPECT_LE(optimal_weight(1e6, 0.1), 1.0);
}

TEST(OptimalWeight, OverflowBranchIsContinuous) {
  const double eta = 0.1;
  const double edge = 30.0 + 1.0 / eta;
  const double below = optimal_weight(std::nextafter(edge, 0.0), eta);
  const double above = optimal_weight(std::nextafter(edge, 100.0), eta);
  EXPECT_NEAR(below, above, 1e-15);
  EXPECT_LE(below, above);
}

TEST(OptimalWeight, DomainErrors) {
  EXPECT_THROW(optimal_weight(-1e-12, 1.0), spca::invalid_argument);
  EXPECT_THROW(optimal_weight(1.0, 0.0), spca::invalid_argument);
}

TEST(OptimalWeight, MatchesGridSearch) {
  // Coarse ell grid here; the acceptance suite runs the full 20 x 5 grid.
  for (double eta : {0.05, 0.2, 1.0}) {
    for (double ell : {0.0, 3.0, 9.0, 20.0}) {
      EXPECT_NEAR(optimal_weight(ell, eta), grid_argmax(ell, eta, 1e-6), 1e-4) << "ell=" << ell << " eta=" << eta;
    }
  }
}

TEST(OptimalWeight, StationarityOfSubproblem) {
  // d/dw [w l + f(w)] = l - 1/eta + log((1 - w) / (w + e^{-1/eta})) vanishes at w*.
  for (double eta : {0.1, 0.3, 1.0}) {
    for (double ell = 0.5; ell < 25; ell += 1.5) {
      const double w = optimal_weight(ell, eta);
      if (w > 1 - 1e-12) continue;
      const double g = ell - 1 / eta + std::log((1 - w) / (w + std::exp(-1 / eta)));
      // log(1 - w) inherits an absolute error of about eps / (1 - w)
      const double tol = 1e-8 + 4 * std::numeric_limits<double>::epsilon() / (1 - w);
      EXPECT_NEAR(g, 0.0, tol) << "ell=" << ell << " eta=" << eta;
    }
  }
}

TEST(OptimalWeight, NondecreasingAndBelowOne) {
  for (double eta : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    double prev = optimal_weight(0.0, eta);
    for (int i = 1; i <= 200000; ++i) {
      const double ell = i * 2.5e-4;  // [0, 50]
      const double w = optimal_weight(ell, eta);
      ASSERT_GE(w, prev) << "ell=" << ell << " eta=" << eta;
      ASSERT_GE(w, 0.0);
      if (ell < 30) ASSERT_LT(w, 1.0);
      prev = w;
    }
  }
}

TEST(OptimalWeight, InflectionAtInverseAge) {
  for (double eta : {0.1, 0.2, 0.5}) {
    const double h = 1e-2;
    auto second = [&](double l) {
      return (optimal_weight(l + h, eta) - 2 * optimal_weight(l, eta) + optimal_weight(l - h, eta)) / (h * h);
    };
    const double t = 1.0 / eta;
    double sign_change_at = -1;
    for (double l = 0.5; l < 3 * t; l += h) {
      if (second(l) > 0 && second(l + h) <= 0) {
        sign_change_at = l;
        break;
      }
    }
    EXPECT_NEAR(sign_change_at, t, 2 * h) << "eta=" << eta;
  }
}

TEST(OptimalWeight, LargerAgeAdmitsFaster) {
  for (double ell = 0.25; ell < 30; ell += 0.25) {
    EXPECT_GE(optimal_weight(ell, 0.5), optimal_weight(ell, 0.2));
    EXPECT_GE(optimal_weight(ell, 0.2), optimal_weight(ell, 0.1));
  }
}

}  // namespace
