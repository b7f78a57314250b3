#pragma once

#include <cmath>
#include <numbers>

#include "grid.hpp"

namespace reconnect2d {

inline constexpr double euler_gamma = 0.57721566490153286061;
// Largest radius at which gtilde is evaluated.
inline constexpr double gtilde_radius = 1.0;

namespace detail {

// Ascending series pieces around r = 0, valid (and used) for r <= 2.
struct SmallArgSeries {
  double i0, i1;        // I0, I1
  double k0_tail;       // sum_{k>=1} q^k H_k / (k!)^2, q = r^2/4
  double k1_tail;       // (r/4) sum_{k>=0} (H_k + H_{k+1} - 2 gamma) q^k / (k!(k+1)!)
  double i0_minus_one;  // I0 - 1 without cancellation
};

inline SmallArgSeries small_arg_series(double r) {
  const double q = 0.25 * r * r;
  SmallArgSeries s{1.0, 0.5 * r, 0.0, 0.0, 0.0};
  double t0 = 1.0;  // q^k/(k!)^2
  double t1 = 1.0;  // q^k/(k!(k+1)!)
  double hk = 0.0;
  s.k1_tail = (1.0 - 2.0 * euler_gamma);
  for (int k = 1; k < 60; ++k) {
    t0 *= q / (static_cast<double>(k) * k);
    t1 *= q / (static_cast<double>(k) * (k + 1));
    hk += 1.0 / k;
    s.i0_minus_one += t0;
    s.i1 += 0.5 * r * t1;
    s.k0_tail += t0 * hk;
    s.k1_tail += t1 * (2.0 * hk + 1.0 / (k + 1) - 2.0 * euler_gamma);
    if (t0 * hk < 1e-18 * s.k0_tail && t1 < 1e-18) break;
  }
  s.i0 = 1.0 + s.i0_minus_one;
  s.k1_tail *= 0.25 * r;
  return s;
}

// Steed's continued fraction (Temme's normalization) for K0, K1 at r >= 2.
inline void large_arg_k01(double r, double& k0, double& k1) {
  double b = 2.0 * (1.0 + r);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 10000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) break;
  }
  h *= a1;
  k0 = std::sqrt(std::numbers::pi / (2.0 * r)) * std::exp(-r) / s;
  k1 = k0 * (r + 0.5 - h) / r;
}

}  // namespace detail

inline double bessel_k0(double r) {
  if (!(r > 0.0)) throw DomainError("bessel_k0: r must be > 0");
  if (r <= 2.0) {
    const auto s = detail::small_arg_series(r);
    return -(std::log(0.5 * r) + euler_gamma) * s.i0 + s.k0_tail;
  }
  double k0, k1;
  detail::large_arg_k01(r, k0, k1);
  return k0;
}

inline double bessel_k1(double r) {
  if (!(r > 0.0)) throw DomainError("bessel_k1: r must be > 0");
  if (r <= 2.0) {
    const auto s = detail::small_arg_series(r);
    return 1.0 / r + std::log(0.5 * r) * s.i1 - s.k1_tail;
  }
  double k0, k1;
  detail::large_arg_k01(r, k0, k1);
  return k1;
}

// K0(r) + log r - log 2 + gamma, summed without the log cancellation.
inline double gtilde(double r) {
  if (r < 0.0 || !(r < gtilde_radius)) throw DomainError("gtilde: r must lie in [0, 1)");
  if (r == 0.0) return 0.0;
  const auto s = detail::small_arg_series(r);
  return -(std::log(0.5 * r) + euler_gamma) * s.i0_minus_one + s.k0_tail;
}

inline double gbar(double r) {
  if (!(r > 0.0)) throw DomainError("gbar: r must be > 0");
  // -K0 - log r = -(log 2 - gamma) - gtilde, without the log cancellation
  if (r < gtilde_radius) return -(std::numbers::ln2 - euler_gamma) - gtilde(r);
  return -bessel_k0(r) - std::log(r);
}

// 1/r - K1(r), cancellation-free near 0.
inline double k1_deficit(double r) {
  if (r <= 2.0) {
    const auto s = detail::small_arg_series(r);
    return s.k1_tail - std::log(0.5 * r) * s.i1;
  }
  return 1.0 / r - bessel_k1(r);
}

// Kernel of S = B + U: (1/2pi)(1/r - K1(r)) x_perp / r, zero at the origin.
inline Vec2 kernel_calK(const Vec2& x) {
  const double r = std::hypot(x[0], x[1]);
  if (r == 0.0) return {0.0, 0.0};
  const double a = k1_deficit(r) / (2.0 * std::numbers::pi * r);
  return {-a * x[1], a * x[0]};
}

}  // namespace reconnect2d
