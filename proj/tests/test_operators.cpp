#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "reconnect2d/operators.hpp"

using namespace reconnect2d;

namespace {

ScalarField random_field(const TorusGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g);
  for (auto& v : f.data) v = u(rng);
  return f;
}

double max_diff(const RealBuffer& a, const RealBuffer& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

ScalarField bump(const TorusGrid& g, double cx, double cy, double w, double amp = 1.0) {
  return ScalarField::sample(g, [&](double x, double y) {
    return amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (w * w));
  });
}

}  // namespace

TEST(Grid, SpacingAndLattice) {
  auto g = make_grid(64, 2 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(g.spacing(), 2 * std::numbers::pi / 64);
  for (int m = 0; m < 64; ++m) EXPECT_NEAR(g.wavenumber(m), g.lattice(m), 1e-12);
  EXPECT_DOUBLE_EQ(make_grid(16, 1.0).spacing(), 1.0 / 16);
  EXPECT_THROW(make_grid(63, 1.0), ConfigError);
  EXPECT_THROW(make_grid(8, 1.0), ConfigError);
  EXPECT_THROW(make_grid(64, 0.0), ConfigError);
  EXPECT_EQ(g.coord(32), 0.0);
  EXPECT_DOUBLE_EQ(g.coord(g.reflect(10)), -g.coord(10));
}

TEST(OpU, ZeroAndSingleMode) {
  auto g = make_grid(32, 2 * std::numbers::pi);
  auto v0 = op_U(ScalarField(g));
  EXPECT_EQ(max_abs(v0.x) + max_abs(v0.y), 0.0);
  auto f = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
  auto v = op_U(f);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      auto u = v.at(ix, iy);
      EXPECT_NEAR(u[0], 0.0, 1e-13);
      EXPECT_NEAR(u[1], -std::cos(g.coord(ix)), 1e-13);
    }
}

TEST(OpB, SingleModeSign) {
  // (I - Laplacian)^{-1} sin x1 = sin(x1)/2, and grad_perp = (-d2, d1) gives (0, cos(x1)/2).
  auto g = make_grid(32, 2 * std::numbers::pi);
  auto f = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
  auto v = op_B(f);
  for (int ix = 0; ix < g.n; ++ix) {
    auto u = v.at(ix, 5);
    EXPECT_NEAR(u[0], 0.0, 1e-13);
    EXPECT_NEAR(u[1], 0.5 * std::cos(g.coord(ix)), 1e-13);
  }
  auto s = op_S(f);
  for (int ix = 0; ix < g.n; ++ix) EXPECT_NEAR(s.at(ix, 3)[1], -0.5 * std::cos(g.coord(ix)), 1e-13);
}

TEST(OpU, MatchesDirectModeSum) {
  auto g = make_grid(32, 5.0);
  auto f = random_field(g, 7);
  auto v = op_U(f);
  auto ref = oracle::direct_mode_sum_velocity(f, [](double k2) { return -1.0 / k2; });
  double scale = 0.0, err = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    scale = std::max(scale, std::hypot(ref[k][0], ref[k][1]));
    err = std::max(err, std::hypot(v.x[k] - ref[k][0], v.y[k] - ref[k][1]));
  }
  EXPECT_LT(err / scale, 1e-6);
  auto vb = op_B(f);
  auto refb = oracle::direct_mode_sum_velocity(f, [](double k2) { return 1.0 / (1.0 + k2); });
  err = 0.0;
  scale = 0.0;
  for (std::size_t k = 0; k < refb.size(); ++k) {
    scale = std::max(scale, std::hypot(refb[k][0], refb[k][1]));
    err = std::max(err, std::hypot(vb.x[k] - refb[k][0], vb.y[k] - refb[k][1]));
  }
  EXPECT_LT(err / scale, 1e-6);
}

TEST(OpU, FreeSpaceMeanMatchesWholePlaneSum) {
  // Zero-mean pair of opposite bumps: its torus velocity carries a spurious
  // uniform drift proportional to the dipole moment; the free-space mean removes it.
  auto g = make_grid(128, 16.0);
  auto f = bump(g, -1.0, 0.5, 0.4);
  auto neg = bump(g, 1.0, 0.5, 0.4, -1.0);
  for (std::size_t k = 0; k < f.data.size(); ++k) f.data[k] += neg.data[k];
  auto vz = op_U(f, MeanFlow::Zero);
  auto vf = op_U(f, MeanFlow::FreeSpace);
  double err_zero = 0.0, err_free = 0.0, scale = 0.0;
  for (int ix : {40, 64, 80})
    for (int iy : {50, 70}) {
      const Vec2 x{g.coord(ix), g.coord(iy)};
      const Vec2 ref = oracle::free_space_velocity(f, x);
      scale = std::max(scale, std::hypot(ref[0], ref[1]));
      auto a = vz.at(ix, iy), b = vf.at(ix, iy);
      err_zero = std::max(err_zero, std::hypot(a[0] - ref[0], a[1] - ref[1]));
      err_free = std::max(err_free, std::hypot(b[0] - ref[0], b[1] - ref[1]));
    }
  EXPECT_GT(err_zero / scale, 5e-3);
  EXPECT_LT(err_free / scale, 0.2 * err_zero / scale);
}

TEST(OpB, ScreenedMeanFactor) {
  // Small box: the lattice sum tends to the integral of K0 outside one cell.
  for (double box : {0.05, 0.1}) {
    const int m = 2000;
    const double h = box / m;
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += std::cyl_bessel_k(0.0, std::hypot((i + 0.5) * h - box / 2, (j + 0.5) * h - box / 2));
    EXPECT_NEAR(screened_mean_factor(box), 1.0 - s * h * h / (2 * std::numbers::pi), 2e-3) << box;
  }
  // Large box: nearest images dominate.
  const double L = 12.0;
  const double near = 4 * std::cyl_bessel_k(0.0, L) + 4 * std::cyl_bessel_k(0.0, L * std::sqrt(2.0));
  EXPECT_NEAR(screened_mean_factor(L) / (L * L * near / (2 * std::numbers::pi)), 1.0, 1e-3);
  EXPECT_NEAR(screened_mean_factor(60.0), 0.0, 1e-20);
}

TEST(OpB, FreeSpaceMeanMatchesWholePlaneSum) {
  // The periodic images of a small dipole add a nearly uniform screened
  // velocity at the data; checked at the two bump centers.
  for (double box : {0.25, 1.0, 2.0}) {
    auto g = make_grid(128, box);
    const double c = box / 16.0;
    auto f = bump(g, -c, 0.5 * c, 0.4 * c);
    auto neg = bump(g, c, 0.5 * c, 0.4 * c, -1.0);
    for (std::size_t k = 0; k < f.data.size(); ++k) f.data[k] += neg.data[k];
    auto vz = op_B(f, MeanFlow::Zero);
    auto vf = op_B(f, MeanFlow::FreeSpace);
    double err_zero = 0.0, err_free = 0.0, scale = 0.0;
    for (int ix : {g.n / 2 - g.n / 16, g.n / 2 + g.n / 16}) {
      const int iy = g.n / 2 + g.n / 32;
      const Vec2 x{g.coord(ix), g.coord(iy)};
      const Vec2 ref = oracle::free_space_screened_velocity(f, x);
      scale = std::max(scale, std::hypot(ref[0], ref[1]));
      auto a = vz.at(ix, iy), b = vf.at(ix, iy);
      err_zero = std::max(err_zero, std::hypot(a[0] - ref[0], a[1] - ref[1]));
      err_free = std::max(err_free, std::hypot(b[0] - ref[0], b[1] - ref[1]));
    }
    EXPECT_GT(err_zero / scale, 5e-3) << box;
    EXPECT_LT(err_free / scale, 0.2 * err_zero / scale) << box;
  }
}

TEST(Operators, DivergenceFreeAndLinear) {
  auto g = make_grid(64, 7.0);
  auto f = random_field(g, 1), h = random_field(g, 2);
  for (auto v : {op_U(f), op_B(f), op_S(f)}) EXPECT_LT(max_abs(divergence(v).data), 1e-10 * max_abs(f.data));
  ScalarField comb(g);
  for (std::size_t k = 0; k < comb.data.size(); ++k) comb.data[k] = 2.0 * f.data[k] - 3.0 * h.data[k];
  auto a = op_U(comb), b = op_U(f), c = op_U(h);
  RealBuffer lx(a.x.size());
  for (std::size_t k = 0; k < lx.size(); ++k) lx[k] = 2.0 * b.x[k] - 3.0 * c.x[k];
  EXPECT_LT(max_diff(a.x, lx), 1e-12 * max_abs(a.x));
}

TEST(Operators, ScreenedBelowUnscreenedSpectrally) {
  for (double k2 : {1e-4, 0.1, 1.0, 50.0})
    EXPECT_LT(std::abs(symbol::screened(k2)), std::abs(symbol::inverse_laplacian(k2)));
}

TEST(Velocities, SingleModeRightScreened) {
  auto g = make_grid(32, 2 * std::numbers::pi);
  ScalarPair s{ScalarField::sample(g, [](double x, double) { return std::sin(x); }), ScalarField(g), 0.0};
  auto [vp, vm] = compute_velocities(s, {Handedness::Right, Screening::Screened});
  for (int ix = 0; ix < g.n; ++ix) {
    EXPECT_NEAR(vp.at(ix, 0)[0], 0.0, 1e-13);
    EXPECT_NEAR(vp.at(ix, 0)[1], -0.25 * std::cos(g.coord(ix)), 1e-13);
  }
  ScalarPair zero{ScalarField(g), ScalarField(g), 0.0};
  for (auto hand : {Handedness::Right, Handedness::Left})
    for (auto scr : {Screening::Screened, Screening::Unscreened}) {
      auto [a, b] = compute_velocities(zero, {hand, scr});
      EXPECT_EQ(max_abs(a.x) + max_abs(b.y), 0.0);
    }
}

TEST(Velocities, AlgebraicIdentities) {
  auto g = make_grid(64, 9.0);
  ScalarPair s{random_field(g, 3), random_field(g, 4), 0.0};
  ScalarField F = canonical_momentum(s), w(g);
  for (std::size_t k = 0; k < w.data.size(); ++k) w.data[k] = 0.5 * (s.plus.data[k] - s.minus.data[k]);
  const double tol = 1e-12 * (max_abs(s.plus.data) + max_abs(s.minus.data));

  auto [vp, vm] = compute_velocities(s, {Handedness::Right, Screening::Screened});
  auto BF = op_B(F), Uw = op_U(w);
  for (std::size_t k = 0; k < vp.x.size(); ++k) {
    EXPECT_NEAR(vp.x[k] - vm.x[k], 2 * BF.x[k], tol);
    EXPECT_NEAR(vp.y[k] + vm.y[k], 2 * Uw.y[k], tol);
  }

  auto [lp, lm] = compute_velocities(s, {Handedness::Left, Screening::Screened});
  auto Up = op_U(s.plus), Um = op_U(s.minus), SF = op_S(F);
  for (std::size_t k = 0; k < lp.x.size(); ++k) {
    EXPECT_NEAR(lp.x[k] - Up.x[k], -SF.x[k], tol);
    EXPECT_NEAR(-(lm.y[k] + Um.y[k]), -SF.y[k], tol);
  }

  auto [rp, rm] = compute_velocities(s, {Handedness::Right, Screening::Unscreened});
  auto [ep, em] = compute_velocities(s, {Handedness::Left, Screening::Unscreened});
  for (std::size_t k = 0; k < rp.x.size(); k += 7) {
    EXPECT_NEAR(rp.x[k], -Um.x[k], tol);
    EXPECT_NEAR(rm.y[k], Up.y[k], tol);
    EXPECT_NEAR(ep.y[k], Up.y[k], tol);
    EXPECT_NEAR(em.x[k], -Um.x[k], tol);
  }
}

TEST(Dealias, TwoThirdsRule) {
  auto g = make_grid(32, 1.0);
  const int nk = g.n / 2 + 1;
  Spectrum z(static_cast<std::size_t>(g.n) * nk, Complex(0.0));
  dealias(z, g);
  for (auto c : z) EXPECT_EQ(c, Complex(0.0));
  Spectrum one = z;
  one[1] = 1.0;                      // k = (1, 0)
  one[nk - 1] = 1.0;                 // |k1| = n/2
  one[static_cast<std::size_t>(11) * nk] = 1.0;  // |k2| = 11 > 32/3
  one[static_cast<std::size_t>(10) * nk + 10] = 1.0;
  dealias(one, g);
  EXPECT_EQ(one[1], Complex(1.0));
  EXPECT_EQ(one[nk - 1], Complex(0.0));
  EXPECT_EQ(one[static_cast<std::size_t>(11) * nk], Complex(0.0));
  EXPECT_EQ(one[static_cast<std::size_t>(10) * nk + 10], Complex(1.0));
}

// Kernel of a unit-mass discrete delta: bounded for S, logarithmically divergent
// core (growing max) for U.
TEST(Operators, KernelBoundednessUnderRefinement) {
  auto peak = [](int n, bool screened_sum) {
    auto g = make_grid(n, 8.0);
    ScalarField d(g);
    d(n / 2, n / 2) = 1.0 / g.cell_area();
    auto v = screened_sum ? op_S(d) : op_U(d);
    double m = 0.0;
    for (std::size_t k = 0; k < v.x.size(); ++k) m = std::max(m, std::hypot(v.x[k], v.y[k]));
    return m;
  };
  const double s128 = peak(128, true), s256 = peak(256, true), s512 = peak(512, true);
  EXPECT_LT(std::abs(s256 - s128) / s256, 0.05);
  EXPECT_LT(std::abs(s512 - s256) / s512, 0.05);
  const double u128 = peak(128, false), u512 = peak(512, false);
  EXPECT_GT(u512, 3.0 * u128);
}
