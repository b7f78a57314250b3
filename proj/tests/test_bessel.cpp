#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reconnect2d/bessel.hpp"

using namespace reconnect2d;

TEST(Bessel, KnownValues) {
  EXPECT_NEAR(bessel_k0(1.0), 0.421024438240708, 1e-12);
  EXPECT_NEAR(bessel_k0(0.1), 2.427069024702017, 1e-12);
  EXPECT_NEAR(bessel_k1(0.1), 9.853844780870606, 1e-11);
  EXPECT_THROW(bessel_k0(0.0), DomainError);
  EXPECT_THROW(bessel_k1(-1.0), DomainError);
}

TEST(Bessel, MatchesSeriesOracleSmallArguments) {
  for (int i = 0; i <= 600; ++i) {
    const double r = 1e-6 * std::pow(2.0 / 1e-6, i / 600.0);
    EXPECT_NEAR(bessel_k0(r) / oracle::k0_series(r), 1.0, 1e-9) << r;
    EXPECT_NEAR(bessel_k1(r) / oracle::k1_series(r), 1.0, 1e-9) << r;
  }
}

TEST(Bessel, MatchesIntegralOracleWholeRange) {
  for (int i = 0; i <= 300; ++i) {
    const double r = 1e-3 * std::pow(30.0 / 1e-3, i / 300.0);
    EXPECT_NEAR(bessel_k0(r) / oracle::k_integral(0, r), 1.0, 1e-9) << r;
    EXPECT_NEAR(bessel_k1(r) / oracle::k_integral(1, r), 1.0, 1e-9) << r;
  }
}

TEST(Bessel, AsymptoticRatioAtThirty) {
  // Leading correction of the asymptotic series is -1/(8r), about 4e-3 at r = 30.
  auto ratio = [](double r) { return bessel_k0(r) / (std::sqrt(std::numbers::pi / (2 * r)) * std::exp(-r)); };
  EXPECT_NEAR(ratio(30.0), 1.0 - 1.0 / 240 + 9.0 / (128 * 900), 1e-5);
  EXPECT_NEAR(ratio(200.0), 1.0, 1e-3);
  EXPECT_GT(bessel_k0(800.0), -1e-300);
}

TEST(Bessel, K1IsMinusDerivativeOfK0) {
  for (double r = 0.1; r <= 5.0; r += 0.05) {
    const double h = 1e-5 * r;
    const double d = (bessel_k0(r + h) - bessel_k0(r - h)) / (2 * h);
    EXPECT_NEAR(-d / bessel_k1(r), 1.0, 1e-6) << r;
  }
}

TEST(Gtilde, ValuesAndBound) {
  EXPECT_EQ(gtilde(0.0), 0.0);
  EXPECT_NEAR(gtilde(0.1), 2.427069024702017 + std::log(0.1) - std::log(2.0) + euler_gamma, 1e-12);
  EXPECT_NEAR(gtilde(0.1), 0.0085524160, 1e-9);
  EXPECT_LT(std::abs(gtilde(0.5)), 0.25 * std::abs(std::log(0.5)));
  EXPECT_THROW(gtilde(1.0), DomainError);
  EXPECT_THROW(gtilde(-0.1), DomainError);
  for (int i = 1; i <= 10000; ++i) {
    const double r = 0.5 * i / 10000.0;
    EXPECT_LE(std::abs(gtilde(r)), r * r * (1 + std::abs(std::log(r)))) << r;
  }
}

TEST(Gbar, TwoFormsAgree) {
  for (int i = 1; i < 1000; ++i) {
    const double r = i / 1000.0;
    const double a = -bessel_k0(r) - std::log(r);
    EXPECT_NEAR(gbar(r), a, 1e-12) << r;
  }
  EXPECT_NEAR(gbar(0.1), -0.1244837, 1e-6);
  EXPECT_NEAR(gbar(1e-9), -(std::numbers::ln2 - euler_gamma), 1e-12);
  EXPECT_NEAR(gbar(1.0), -0.421024438240708, 1e-12);
  EXPECT_THROW(gbar(0.0), DomainError);
}

TEST(KernelCalK, ValuesAndSymmetry) {
  const Vec2 a = kernel_calK({0.1, 0.0});
  EXPECT_NEAR(std::hypot(a[0], a[1]), (10.0 - 9.853844780870606) / (2 * std::numbers::pi), 1e-10);
  const Vec2 z = kernel_calK({0.0, 0.0});
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
  const Vec2 tiny = kernel_calK({1e-8, 0.0});
  EXPECT_LT(std::hypot(tiny[0], tiny[1]), 1e-6);
  for (Vec2 x : {Vec2{0.3, -0.7}, Vec2{2.5, 1.0}, Vec2{-0.01, 0.02}}) {
    const Vec2 k = kernel_calK(x), m = kernel_calK({-x[0], -x[1]});
    EXPECT_EQ(k[0], -m[0]);
    EXPECT_EQ(k[1], -m[1]);
    EXPECT_NEAR(k[0] * x[0] + k[1] * x[1], 0.0, 1e-17);
    EXPECT_LE(std::hypot(k[0], k[1]), 1.0);
  }
}
