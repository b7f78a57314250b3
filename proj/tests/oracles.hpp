#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "reconnect2d/grid.hpp"

namespace oracle {

using reconnect2d::ScalarField;
using reconnect2d::TorusGrid;
using reconnect2d::Vec2;

// Biot-Savart velocity grad_perp(inverse Laplacian) f by a direct sum over all
// lattice modes, no FFT: f_hat by explicit DFT, then v(x) = sum i k_perp (-1/|k|^2) f_hat e^{ikx}.
// Nyquist modes are kept only through their real (cosine) part, matching a real field.
inline std::vector<Vec2> direct_mode_sum_velocity(const ScalarField& f, double (*mult)(double)) {
  const TorusGrid& g = f.grid;
  const int n = g.n;
  const double L = g.box;
  std::vector<std::complex<double>> fh(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::complex<double> s = 0.0;
      const double kx = 2 * std::numbers::pi * g.lattice(a) / L, ky = 2 * std::numbers::pi * g.lattice(b) / L;
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          s += f(ix, iy) * std::exp(std::complex<double>(0.0, -(kx * g.coord(ix) + ky * g.coord(iy))));
      fh[static_cast<std::size_t>(b) * n + a] = s / double(n * n);
    }
  std::vector<Vec2> v(static_cast<std::size_t>(n) * n, Vec2{0.0, 0.0});
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      std::complex<double> vx = 0.0, vy = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          if (a == 0 && b == 0) continue;
          const double kx = 2 * std::numbers::pi * g.lattice(a) / L, ky = 2 * std::numbers::pi * g.lattice(b) / L;
          const double dkx = (a == n / 2) ? 0.0 : kx, dky = (b == n / 2) ? 0.0 : ky;
          const auto e = fh[static_cast<std::size_t>(b) * n + a] *
                         std::exp(std::complex<double>(0.0, kx * g.coord(ix) + ky * g.coord(iy))) *
                         mult(kx * kx + ky * ky);
          vx += std::complex<double>(0.0, -dky) * e;
          vy += std::complex<double>(0.0, dkx) * e;
        }
      v[static_cast<std::size_t>(iy) * n + ix] = {vx.real(), vy.real()};
    }
  return v;
}

// Whole-plane Biot-Savart velocity of grid data at point x, midpoint quadrature
// with the self cell skipped: v = (1/2pi) sum (x - y)_perp / |x - y|^2 f(y) h^2.
inline Vec2 free_space_velocity(const ScalarField& f, const Vec2& x) {
  const TorusGrid& g = f.grid;
  double vx = 0.0, vy = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double w = f(ix, iy);
      if (w == 0.0) continue;
      const double dx = x[0] - g.coord(ix), dy = x[1] - g.coord(iy);
      const double r2 = dx * dx + dy * dy;
      if (r2 < 1e-24) continue;
      vx += -dy / r2 * w;
      vy += dx / r2 * w;
    }
  const double s = g.cell_area() / (2 * std::numbers::pi);
  return {vx * s, vy * s};
}

// Whole-plane velocity grad_perp (I - Laplacian)^{-1} f of grid data at x:
// v = -(1/2pi) sum K1(r)/r (x - y)_perp f(y) h^2, self cell skipped.
inline Vec2 free_space_screened_velocity(const ScalarField& f, const Vec2& x) {
  const TorusGrid& g = f.grid;
  double vx = 0.0, vy = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double w = f(ix, iy);
      if (w == 0.0) continue;
      const double dx = x[0] - g.coord(ix), dy = x[1] - g.coord(iy);
      const double r = std::hypot(dx, dy);
      if (r < 1e-12) continue;
      const double k = std::cyl_bessel_k(1.0, r) / r;
      vx += dy * k * w;
      vy += -dx * k * w;
    }
  const double s = g.cell_area() / (2 * std::numbers::pi);
  return {vx * s, vy * s};
}

// Ascending series with a fixed number of terms.
inline double k0_series(double r, int terms = 30) {
  const double q = r * r / 4;
  double t = 1.0, i0 = 1.0, tail = 0.0, h = 0.0;
  for (int k = 1; k < terms; ++k) {
    t *= q / (double(k) * k);
    h += 1.0 / k;
    i0 += t;
    tail += t * h;
  }
  return -(std::log(r / 2) + 0.57721566490153286061) * i0 + tail;
}

inline double k1_series(double r, int terms = 30) {
  const double q = r * r / 4, g = 0.57721566490153286061;
  double t = 1.0, i1 = 0.0, s = 0.0, h = 0.0;
  for (int k = 0; k < terms; ++k) {
    if (k > 0) {
      t *= q / (double(k) * (k + 1));
      h += 1.0 / k;
    }
    i1 += (r / 2) * t;
    s += t * (h + (h + 1.0 / (k + 1)) - 2 * g);
  }
  return 1.0 / r + std::log(r / 2) * i1 - (r / 4) * s;
}

// K_nu(r) = int_0^inf exp(-r cosh t) cosh(nu t) dt by the trapezoid rule, which
// converges geometrically for this integrand.
inline double k_integral(int nu, double r) {
  const double h = 1.0 / 64;
  double s = 0.5 * std::exp(-r);
  for (int j = 1; j < 20000; ++j) {
    const double t = j * h;
    const double term = std::exp(-r * std::cosh(t)) * std::cosh(nu * t);
    s += term;
    if (term < 1e-300 || (term < 1e-22 * s && t > 1)) break;
  }
  return s * h;
}

}  // namespace oracle
