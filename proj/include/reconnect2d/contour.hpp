#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "bessel.hpp"
#include "fft.hpp"
#include "geometry.hpp"

namespace reconnect2d {

enum class ContourMode { UnscreenedEuler, ScreenedLeft };

inline constexpr int min_contour_nodes = 64;
inline constexpr int reparam_every = 10;
inline constexpr double max_spacing_ratio = 3.0;

// Closed, counterclockwise node list; node j sits at alpha_j = 2 pi j / M.
// strength selects the sign of the self-induced log term (+1 plus, -1 minus).
struct PatchContour {
  Polygon nodes;
  int strength = 1;

  int size() const { return static_cast<int>(nodes.size()); }
};

struct ContourPairState {
  PatchContour plus{{}, 1};
  PatchContour minus{{}, -1};
  double time = 0.0;
  double R = 0.0;
  double d = 0.0;
  long step_count = 0;
};

inline double node_alpha(int j, int m) { return 2.0 * std::numbers::pi * j / m; }

inline PatchContour sample_contour(int m, int strength, const std::function<Point(double)>& z) {
  if (m < min_contour_nodes) throw ConfigError("contour.nodes: must be >= 64");
  PatchContour c{Polygon(m), strength};
  for (int j = 0; j < m; ++j) c.nodes[j] = z(node_alpha(j, m));
  return c;
}

inline std::vector<double> node_spacings(const Polygon& p) {
  std::vector<double> h(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) h[j] = std::abs(p[(j + 1) % p.size()] - p[j]);
  return h;
}

inline double spacing_ratio(const Polygon& p) {
  const auto h = node_spacings(p);
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  return *lo > 0.0 ? *hi / *lo : INFINITY;
}

namespace detail {

// Signed integer frequency of DFT slot k.
inline int frequency(int k, int m) { return k <= m / 2 ? k : k - m; }

// Multiply the DFT of the node list by mult(m) and transform back.
template <class Mult>
inline std::vector<Complex> fourier_multiply(const Polygon& z, Mult mult) {
  const int m = static_cast<int>(z.size());
  const auto& plan = fft_plan_1d(m);
  Spectrum a(z.begin(), z.end()), b(m);
  plan.forward(a.data(), b.data());
  for (int k = 0; k < m; ++k) b[k] *= mult(frequency(k, m)) / static_cast<double>(m);
  plan.backward(b.data(), a.data());
  return {a.begin(), a.end()};
}

inline std::vector<Complex> curve_derivative(const Polygon& z) {
  const int m = static_cast<int>(z.size());
  return fourier_multiply(z, [m](int k) { return 2 * k == m ? Complex(0.0) : Complex(0.0, k); });
}

// (1/2 pi) int log|e^{i alpha} - e^{i beta}| f'(beta) d beta = H f / 2.
inline std::vector<Complex> half_hilbert(const Polygon& z) {
  const int m = static_cast<int>(z.size());
  return fourier_multiply(z, [m](int k) {
    if (k == 0 || 2 * k == m) return Complex(0.0);
    return Complex(0.0, k > 0 ? -0.5 : 0.5);
  });
}

// (1/2 pi) int log|z(a) - z(b)| z'(b) db for every node of one curve, with the
// circular logarithm split off and handled spectrally.
inline std::vector<Complex> self_log_term(const Polygon& z, const std::vector<Complex>& dz) {
  const int m = static_cast<int>(z.size());
  auto out = half_hilbert(z);
  std::vector<double> chord(m);
  for (int k = 0; k < m; ++k) chord[k] = std::abs(2.0 * std::sin(std::numbers::pi * k / m));
  for (int j = 0; j < m; ++j) {
    Complex acc = std::log(std::abs(dz[j])) * dz[j];
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      acc += std::log(std::abs(z[j] - z[k]) / chord[(j - k + m) % m]) * dz[k];
    }
    out[j] += acc / static_cast<double>(m);
  }
  return out;
}

// (1/4 pi) int Gbar(|x - w(b)|) w'(b) db at each target x.
inline void add_screened_term(const Polygon& targets, const Polygon& w, const std::vector<Complex>& dw, double sign,
                              std::vector<Complex>& out) {
  const double s = sign / (2.0 * static_cast<double>(w.size()));
  const double at_zero = euler_gamma - std::numbers::ln2;  // limit of Gbar at 0+
  for (std::size_t j = 0; j < targets.size(); ++j) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double r = std::abs(targets[j] - w[k]);
      acc += (r > 0.0 ? gbar(r) : at_zero) * dw[k];
    }
    out[j] += s * acc;
  }
}

}  // namespace detail

struct NodeVelocities {
  std::vector<Complex> plus, minus;
};

inline void require_simple(const PatchContour& c, const char* which) {
  if (c.size() < 3) throw GeometryError(std::string(which) + ": fewer than 3 nodes");
  if (self_intersects(c.nodes)) throw GeometryError(std::string(which) + ": contour self-intersects");
}

inline NodeVelocities contour_velocity(const ContourPairState& s, ContourMode mode) {
  require_simple(s.plus, "plus");
  require_simple(s.minus, "minus");
  const auto dp = detail::curve_derivative(s.plus.nodes);
  const auto dm = detail::curve_derivative(s.minus.nodes);
  NodeVelocities v{detail::self_log_term(s.plus.nodes, dp), detail::self_log_term(s.minus.nodes, dm)};
  for (auto& x : v.plus) x *= static_cast<double>(s.plus.strength);
  for (auto& x : v.minus) x *= static_cast<double>(s.minus.strength);
  if (mode == ContourMode::ScreenedLeft) {
    for (auto [target, sign] : {std::pair{&s.plus, s.plus.strength}, std::pair{&s.minus, s.minus.strength}}) {
      auto& out = target == &s.plus ? v.plus : v.minus;
      detail::add_screened_term(target->nodes, s.plus.nodes, dp, sign, out);
      detail::add_screened_term(target->nodes, s.minus.nodes, dm, sign, out);
    }
  }
  return v;
}

// Equal-arclength redistribution. The curve is treated as the trigonometric
// interpolant of its nodes; node 0 stays fixed.
inline PatchContour reparametrize(const PatchContour& c) {
  const int m = c.size();
  if (m < 3) throw GeometryError("reparametrize: fewer than 3 nodes");
  const auto dz = detail::curve_derivative(c.nodes);
  Spectrum speed(m), zh(m), gh(m);
  for (int j = 0; j < m; ++j) speed[j] = std::abs(dz[j]);
  const auto& plan = fft_plan_1d(m);
  Spectrum zin(c.nodes.begin(), c.nodes.end());
  plan.forward(zin.data(), zh.data());
  plan.forward(speed.data(), gh.data());
  for (int k = 0; k < m; ++k) {
    zh[k] /= static_cast<double>(m);
    gh[k] /= static_cast<double>(m);
  }
  const double length = 2.0 * std::numbers::pi * gh[0].real();
  if (!(length > 0.0) || !std::isfinite(length)) throw GeometryError("reparametrize: degenerate curve");

  // Interpolants; the Nyquist slot is dropped.
  auto series = [&](const Spectrum& h, double a, bool integral) {
    Complex acc = integral ? Complex(h[0].real() * a) : h[0];
    for (int k = 1; k < m; ++k) {
      const int f = detail::frequency(k, m);
      if (2 * f == m) continue;
      const Complex e = std::polar(1.0, f * a);
      acc += integral ? h[k] * (e - 1.0) / Complex(0.0, f) : h[k] * e;
    }
    return acc;
  };

  std::vector<double> cum(m + 1, 0.0);
  for (int j = 0; j < m; ++j) cum[j + 1] = cum[j] + std::abs(c.nodes[(j + 1) % m] - c.nodes[j]);
  PatchContour out{Polygon(m), c.strength};
  out.nodes[0] = c.nodes[0];
  std::size_t seg = 0;
  for (int j = 1; j < m; ++j) {
    const double target = length * j / m;
    const double chord_target = cum[m] * j / m;
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] < chord_target) ++seg;
    const double frac = (chord_target - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
    double a = node_alpha(static_cast<int>(seg), m) + frac * 2.0 * std::numbers::pi / m;
    for (int it = 0; it < 30; ++it) {
      const double f = series(gh, a, true).real() - target;
      const double g = series(gh, a, false).real();
      if (!(g > 0.0)) break;
      const double step = f / g;
      a -= step;
      if (std::abs(step) < 1e-15) break;
    }
    out.nodes[j] = series(zh, a, false);
  }
  return out;
}

inline double max_node_speed(const NodeVelocities& v) {
  double m = 0.0;
  for (const auto* set : {&v.plus, &v.minus})
    for (auto x : *set) m = std::max(m, std::abs(x));
  return m;
}

inline double min_node_spacing(const ContourPairState& s) {
  const auto a = node_spacings(s.plus.nodes), b = node_spacings(s.minus.nodes);
  return std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
}

inline double contour_cfl_dt(const ContourPairState& s, ContourMode mode) {
  const double v = max_node_speed(contour_velocity(s, mode));
  return v > 0.0 ? 0.5 * min_node_spacing(s) / v : INFINITY;
}

// Classical RK4 on the node ODEs.
inline ContourPairState step_contours(const ContourPairState& s, double dt, ContourMode mode) {
  if (!(dt > 0.0)) throw StepSizeError("step_contours: dt must be > 0");
  const auto k1 = contour_velocity(s, mode);
  const double vmax = max_node_speed(k1);
  const double limit = vmax > 0.0 ? 0.5 * min_node_spacing(s) / vmax : INFINITY;
  if (dt > limit * (1.0 + 1e-12))
    throw StepSizeError("step_contours: dt = " + std::to_string(dt) + " exceeds limit " + std::to_string(limit));

  auto shifted = [&](const NodeVelocities& k, double h) {
    ContourPairState t = s;
    for (std::size_t j = 0; j < t.plus.nodes.size(); ++j) t.plus.nodes[j] += h * k.plus[j];
    for (std::size_t j = 0; j < t.minus.nodes.size(); ++j) t.minus.nodes[j] += h * k.minus[j];
    return t;
  };
  const auto k2 = contour_velocity(shifted(k1, 0.5 * dt), mode);
  const auto k3 = contour_velocity(shifted(k2, 0.5 * dt), mode);
  const auto k4 = contour_velocity(shifted(k3, dt), mode);
  ContourPairState next = s;
  for (std::size_t j = 0; j < next.plus.nodes.size(); ++j)
    next.plus.nodes[j] += dt / 6.0 * (k1.plus[j] + 2.0 * k2.plus[j] + 2.0 * k3.plus[j] + k4.plus[j]);
  for (std::size_t j = 0; j < next.minus.nodes.size(); ++j)
    next.minus.nodes[j] += dt / 6.0 * (k1.minus[j] + 2.0 * k2.minus[j] + 2.0 * k3.minus[j] + k4.minus[j]);
  next.time = s.time + dt;
  next.step_count = s.step_count + 1;
  for (const auto& c : {next.plus.nodes, next.minus.nodes})
    for (auto z : c)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw NumericAbort("step_contours: non-finite node at step " + std::to_string(next.step_count));
  if (next.step_count % reparam_every == 0) {
    for (auto* c : {&next.plus, &next.minus})
      if (spacing_ratio(c->nodes) > max_spacing_ratio) *c = reparametrize(*c);
  }
  return next;
}

// Rigidly rotating backgrounds: the 2:1 ellipse centered at d + 2R and the
// circle of radius R at the origin.
struct BackgroundState {
  double t = 0.0, R = 1.0, d = 0.0;
  PatchContour plus{{}, 1}, minus{{}, -1};

  Point z_plus(double a) const {
    const Point i(0.0, 1.0);
    return 0.5 * R * i * (3.0 * std::exp(-i * (4.0 / 9.0) * t) * std::exp(i * a) + std::exp(-i * a)) + (d + 2.0 * R);
  }
  Point z_minus(double a) const { return R * std::exp(Point(0.0, a - 0.5 * t)); }
};

inline BackgroundState analytic_background(double t, double R, double d, int m = 512) {
  if (!(R > 0.0)) throw ConfigError("init.params.R: must be > 0");
  BackgroundState b{t, R, d};
  b.plus = sample_contour(m, 1, [&](double a) { return b.z_plus(a); });
  b.minus = sample_contour(m, -1, [&](double a) { return b.z_minus(a); });
  return b;
}

struct OverlapResult {
  bool overlap = false;
  double area = 0.0;
};

inline OverlapResult contours_overlap(const PatchContour& a, const PatchContour& b) {
  std::size_t crossings = 0;
  const double area = intersection_area(a.nodes, b.nodes, &crossings);
  return {crossings > 0 || area > 0.0, area};
}

namespace detail {

// Parameter of the point of curve z nearest to p: coarse scan, then golden
// section on the bracketing interval.
template <class Curve>
inline double nearest_parameter(const Curve& z, Point p, int samples) {
  const double two_pi = 2.0 * std::numbers::pi;
  double best = 0.0, bd = INFINITY;
  for (int k = 0; k < samples; ++k) {
    const double a = two_pi * k / samples;
    const double dd = std::abs(z(a) - p);
    if (dd < bd) {
      bd = dd;
      best = a;
    }
  }
  double lo = best - two_pi / samples, hi = best + two_pi / samples;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = std::abs(z(x1) - p), f2 = std::abs(z(x2) - p);
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = std::abs(z(x1) - p);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = std::abs(z(x2) - p);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

struct PerturbationNorm {
  double sup = 0.0;        // max |zeta|
  double sup_slope = 0.0;  // max |divided difference of zeta|
};

// zeta = (z - Z) / R with Z sampled at the node parameters shifted so node 0
// matches its nearest point on the background curve.
inline PerturbationNorm perturbation_norm(const ContourPairState& s, const BackgroundState& b, double R) {
  if (b.plus.size() != s.plus.size() || b.minus.size() != s.minus.size())
    throw ConfigError("perturbation_norm: node counts of state and background differ");
  PerturbationNorm out;
  auto one = [&](const PatchContour& c, auto curve) {
    const int m = c.size();
    const double a0 = detail::nearest_parameter(curve, c.nodes[0], 4 * m);
    std::vector<Point> zeta(m);
    for (int j = 0; j < m; ++j) zeta[j] = (c.nodes[j] - curve(a0 + node_alpha(j, m))) / R;
    const double da = 2.0 * std::numbers::pi / m;
    for (int j = 0; j < m; ++j) {
      out.sup = std::max(out.sup, std::abs(zeta[j]));
      out.sup_slope = std::max(out.sup_slope, std::abs(zeta[(j + 1) % m] - zeta[j]) / da);
    }
  };
  one(s.plus, [&](double a) { return b.z_plus(a); });
  one(s.minus, [&](double a) { return b.z_minus(a); });
  return out;
}

}  // namespace reconnect2d
