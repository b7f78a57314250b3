#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <numbers>
#include <string>
#include <vector>

#include "contour.hpp"
#include "diagnostics.hpp"
#include "point_vortex.hpp"
#include "solver.hpp"

namespace reconnect2d {

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};
using Checklist = std::vector<HypothesisCheck>;

inline void require(const Checklist& checks) {
  for (const auto& c : checks)
    if (!c.passed) throw HypothesisError(c.name + " failed: " + c.detail);
}

// Radial plateau bump: a smoothed disk indicator with a slight parabolic cap so
// the peak is a single nondegenerate maximum. The `level` contour sits exactly
// at `radius`.
struct BumpProfile {
  double radius = 0.0;
  double step_center = 0.0;
  double width = 0.0;
  double cap = 0.0;
  double norm = 1.0;

  double cutoff() const { return step_center + 7.0 * width; }
  double operator()(double r) const {
    if (r >= cutoff()) return 0.0;
    const double q = r / radius;
    return (1.0 - cap * q * q) * 0.5 * std::erfc((r - step_center) / width) / norm;
  }
};

inline BumpProfile make_bump_profile(double radius, double width, double cap = 0.05,
                                     double level = default_support_fraction) {
  if (!(radius > 0.0)) throw ConfigError("init.params: bump radius must be > 0");
  if (!(width > 0.0) || width >= radius) throw ConfigError("init.params.width: must lie in (0, radius)");
  if (!(cap >= 0.0) || cap >= 0.5) throw ConfigError("init.params.cap: must lie in [0, 0.5)");
  BumpProfile b{radius, 0.0, width, cap, 1.0};
  double lo = 0.0, hi = radius;
  for (int it = 0; it < 200; ++it) {
    b.step_center = 0.5 * (lo + hi);
    b.norm = 0.5 * std::erfc(-b.step_center / width);
    (b(radius) > level ? hi : lo) = b.step_center;
  }
  if (b(radius) > 2.0 * level || b.step_center <= 2.0 * width)
    throw ConfigError("init.params.width: too wide for the bump radius");
  return b;
}

inline const double merger_bump_radius = std::sqrt(2.0 / std::numbers::pi);

struct SmoothMergerParams {
  double scale = 1.0;      // blob centers at (+-2, +-2) * scale
  double amplitude = 1.0;  // sup |tau+|
  double width = 0.06;     // transition width of the plateau edge
  double cap = 0.05;
  double eps = 1.0;  // data are tau(x / eps)
};

// sigma+ = -B(x - c) + B(x - c') with c' = (-c1, c2); sigma-(x1, x2) = sigma+(x1, -x2).
inline ScalarPair smooth_merger_data(const TorusGrid& g, const SmoothMergerParams& p) {
  if (!(p.scale > 0.0)) throw ConfigError("init.params.scale: must be > 0");
  if (!(p.eps > 0.0) || p.eps > 1.0) throw ConfigError("init.params.eps: must lie in (0, 1]");
  const BumpProfile b = make_bump_profile(merger_bump_radius, p.width, p.cap);
  const double c = 2.0 * p.scale, e = p.eps, a = p.amplitude;
  auto blob = [&](double x, double y) { return b(std::hypot(x / e - c, y / e - c)); };
  auto plus = [&](double x, double y) { return a * (blob(-x, y) - blob(x, y)); };
  ScalarPair s;
  s.plus = ScalarField::sample(g, plus);
  s.minus = ScalarField::sample(g, [&](double x, double y) { return plus(x, -y); });
  return s;
}

// Numerical checklist for the four data properties of the right-handed merger
// theorem, evaluated on tau (lengths rescaled by 1/eps).
inline Checklist smooth_merger_checks(const ScalarPair& s, double eps = 1.0,
                                      double support_fraction = default_support_fraction) {
  const auto& g = s.plus.grid;
  const int n = g.n, half = n / 2;
  const double area_unit = g.cell_area() / (eps * eps);
  const double theta = support_fraction * max_abs(s.plus.data);
  Checklist out;

  double max_q = -1.0, leak = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double v = s.plus(ix, iy);
      if (ix > half && iy > half) max_q = std::max({max_q, v, s.minus(ix, iy)});
      if (iy <= half) leak = std::max(leak, std::abs(v));
    }
  out.push_back({"property 1 (sign in Q, upper half-plane support)", max_q <= 0.0 && leak <= theta,
                 "max in Q = " + std::to_string(max_q) + ", max |sigma+| at x2 <= 0: " + std::to_string(leak)});

  double sup = 0.0, supp_area = 0.0, core_area = 0.0;
  for (int iy = half + 1; iy < n; ++iy)
    for (int ix = half + 1; ix < n; ++ix) {
      const double v = s.plus(ix, iy);
      sup = std::max(sup, std::abs(v));
      if (std::abs(v) > theta) supp_area += area_unit;
      if (v <= -0.5) core_area += area_unit;
    }
  const Vec2 e = quadrant_moments(s.plus);
  const double e1 = e[0] / (eps * eps * eps), e2 = e[1] / (eps * eps * eps);
  const bool p2 = std::abs(sup - 1.0) <= 1e-3 && std::abs(supp_area - 2.0) <= 0.02 * 2.0 && std::abs(e1) > 0.5 &&
                  std::abs(e2) > 0.5;
  out.push_back({"property 2 (unit sup, support area 2, |E_j| > 1/2)", p2,
                 "sup = " + std::to_string(sup) + ", area = " + std::to_string(supp_area) +
                     ", E = (" + std::to_string(e1) + ", " + std::to_string(e2) + ")"});

  const double plateau = supp_area - core_area;
  out.push_back({"property 3 (plateau, 0 < epsilon < 1)", plateau > 0.0 && plateau < 1.0,
                 "epsilon = " + std::to_string(plateau)});

  // Unique maximizer of |sigma+| in Q with a negative-definite discrete Hessian.
  int bx = -1, by = -1, ties = 0;
  for (int iy = half + 1; iy < n; ++iy)
    for (int ix = half + 1; ix < n; ++ix) {
      const double v = std::abs(s.plus(ix, iy));
      if (v == sup) {
        ++ties;
        bx = ix;
        by = iy;
      }
    }
  bool morse = ties == 1 && bx > half + 1 && by > half + 1 && bx < n - 1 && by < n - 1;
  std::string detail = "maximizers = " + std::to_string(ties);
  if (morse) {
    auto f = [&](int i, int j) { return std::abs(s.plus(i, j)); };
    const double hxx = f(bx + 1, by) - 2.0 * f(bx, by) + f(bx - 1, by);
    const double hyy = f(bx, by + 1) - 2.0 * f(bx, by) + f(bx, by - 1);
    const double hxy = 0.25 * (f(bx + 1, by + 1) - f(bx + 1, by - 1) - f(bx - 1, by + 1) + f(bx - 1, by - 1));
    morse = hxx < 0.0 && hxx * hyy - hxy * hxy > 0.0;
    detail += ", hessian = [" + std::to_string(hxx) + ", " + std::to_string(hxy) + "; " + std::to_string(hyy) + "]";
  }
  out.push_back({"property 4 (nondegenerate unique maximum)", morse, detail});
  return out;
}

struct EulerianScenario {
  std::string preset;
  SolverState initial;
  double dt = 0.0;  // 0: CFL-limited adaptive step
  double t_end = 1.0;
  double output_every = 0.1;
  double eps = 1.0;
  Checklist checks;
  std::map<std::string, double> params;
};

// Default box: eight diameters of one blob support.
inline double default_merger_box(const SmoothMergerParams& p) {
  return 8.0 * 2.0 * merger_bump_radius * p.eps;
}

inline EulerianScenario right_smooth_merger(const TorusGrid& g, SmoothMergerParams p = {}) {
  p.eps = 1.0;
  EulerianScenario sc;
  sc.preset = "right_smooth_merger";
  sc.initial.sigma = smooth_merger_data(g, p);
  sc.initial.variant = {Handedness::Right, Screening::Unscreened};
  sc.checks = smooth_merger_checks(sc.initial.sigma);
  require(sc.checks);
  sc.params = {{"scale", p.scale}, {"amplitude", p.amplitude}, {"width", p.width}, {"cap", p.cap}};
  return sc;
}

// Minimum number of cells across one blob support after rescaling.
inline constexpr double min_support_cells = 16.0;

inline void require_resolved(const TorusGrid& g, double eps) {
  const double cells = 2.0 * merger_bump_radius * eps / g.spacing();
  if (cells < min_support_cells)
    throw ConfigError("grid.n: blob support spans " + std::to_string(cells) + " cells at eps = " +
                      std::to_string(eps) + ", need >= 16");
}

// eps-rescaled merger data under the screened law. The grid is expected to be
// scaled with eps (box ~ eps) so the blob stays resolved.
inline EulerianScenario right_smooth_merger_screened(const TorusGrid& g, double eps, SmoothMergerParams p = {}) {
  if (!(eps > 0.0) || eps > 1.0) throw ConfigError("init.params.eps: must lie in (0, 1]");
  require_resolved(g, eps);
  p.eps = eps;
  EulerianScenario sc;
  sc.preset = "right_smooth_merger_screened";
  sc.eps = eps;
  sc.initial.sigma = smooth_merger_data(g, p);
  sc.initial.variant = {Handedness::Right, Screening::Screened};
  sc.checks = smooth_merger_checks(sc.initial.sigma, eps);
  require(sc.checks);
  sc.params = {{"scale", p.scale}, {"amplitude", p.amplitude}, {"width", p.width}, {"cap", p.cap}, {"eps", eps}};
  return sc;
}

// Smooth Eulerian analogue of the patch pair: sigma+ a mollified ellipse
// ((x - d - 2R)/R)^2 + (y/2R)^2 < 1, sigma- a mollified disk of radius R. The
// profile is an erfc step in the squared normalized radius q^2, so it has no
// kink at the center; the support level sits on the patch boundaries q = 1.
struct SmoothPatchParams {
  double R = 1.0;
  double d = 0.5;
  double width = 0.3;  // of the step, in q^2 units
};

struct QuadraticStep {
  double center = 0.0, width = 0.0, norm = 1.0;

  double operator()(double q2) const {
    const double z = (q2 - center) / width;
    return z > 7.0 ? 0.0 : 0.5 * std::erfc(z) / norm;
  }
};

inline QuadraticStep make_quadratic_step(double width, double level = default_support_fraction) {
  if (!(width > 0.0) || width >= 1.0) throw ConfigError("init.params.width: must lie in (0, 1)");
  QuadraticStep st{0.0, width, 1.0};
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    st.center = 0.5 * (lo + hi);
    st.norm = 0.5 * std::erfc(-st.center / width);
    (st(1.0) > level ? hi : lo) = st.center;
  }
  if (st(1.0) > 2.0 * level) throw ConfigError("init.params.width: too wide for the support level");
  return st;
}

inline ScalarPair smooth_patch_data(const TorusGrid& g, const SmoothPatchParams& p) {
  const QuadraticStep b = make_quadratic_step(p.width);
  const double cx = p.d + 2.0 * p.R;
  auto sq = [](double v) { return v * v; };
  ScalarPair s;
  s.plus = ScalarField::sample(g, [&](double x, double y) { return b(sq((x - cx) / p.R) + sq(y / (2.0 * p.R))); });
  s.minus = ScalarField::sample(g, [&](double x, double y) { return b((x * x + y * y) / (p.R * p.R)); });
  return s;
}

inline EulerianScenario left_patch_smooth(const TorusGrid& g, SmoothPatchParams p = {},
                                          Screening screening = Screening::Screened) {
  if (!(p.R > 0.0)) throw ConfigError("init.params.R: must be > 0");
  if (!(p.d > 0.25 * p.R && p.d < 0.75 * p.R)) throw ConfigError("init.params.d: must lie in (R/4, 3R/4)");
  if (p.d + 3.0 * p.R >= 0.5 * g.box || p.R >= 0.5 * g.box) throw ConfigError("grid.box: data support does not fit");
  EulerianScenario sc;
  sc.preset = "left_patch_smooth";
  sc.initial.sigma = smooth_patch_data(g, p);
  sc.initial.variant = {Handedness::Left, screening};
  const double ov = overlap_integral(sc.initial.sigma);
  sc.checks.push_back({"supports disjoint", ov == 0.0, "overlap = " + std::to_string(ov)});
  require(sc.checks);
  sc.params = {{"R", p.R}, {"d", p.d}, {"width", p.width}};
  return sc;
}

struct ContourScenario {
  std::string preset;
  ContourMode mode = ContourMode::ScreenedLeft;
  ContourPairState initial;
  double dt = 0.0;  // 0: CFL-limited
  double t_end = 1.0;
  double output_every = 0.1;
  Checklist checks;
  std::map<std::string, double> params;
};

// Overlap window of the analytic backgrounds: first time the closures meet and
// the first later time they separate again (nullopt if not within t_max).
struct TouchWindow {
  std::optional<double> first, last;
};

inline TouchWindow background_touch_window(double R, double d, double t_max, int m = 512, double tol = 1e-6) {
  auto touching = [&](double t) {
    const auto b = analytic_background(t, R, d, m);
    return contours_overlap(b.plus, b.minus).overlap;
  };
  auto refine = [&](double lo, double hi, bool lo_state) {
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (touching(mid) == lo_state ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  TouchWindow w;
  const double step = 1e-2;
  bool prev = touching(0.0);
  if (prev) w.first = 0.0;
  for (double t = step; t <= t_max + 1e-12; t += step) {
    const bool now = touching(t);
    if (!prev && now && !w.first) w.first = refine(t - step, t, false);
    if (prev && !now && w.first) {
      w.last = refine(t - step, t, true);
      break;
    }
    prev = now;
  }
  return w;
}

// Ellipse ((x - d - 2R)/R)^2 + (y/2R)^2 < 1 and the disk of radius R, both
// parametrized as the background at t = 0.
inline ContourScenario left_patch_merger(double R, double d, int m = 512, double max_R = 0.1) {
  if (!(R > 0.0) || R > max_R)
    throw ConfigError("init.params.R: must lie in (0, " + std::to_string(max_R) + "]");
  if (!(d > 0.25 * R && d < 0.75 * R)) throw ConfigError("init.params.d: must lie in (R/4, 3R/4)");
  const auto b = analytic_background(0.0, R, d, m);
  ContourScenario sc;
  sc.preset = "left_patch_merger";
  sc.mode = ContourMode::ScreenedLeft;
  sc.initial.plus = b.plus;
  sc.initial.minus = b.minus;
  sc.initial.R = R;
  sc.initial.d = d;
  const double gap = min_distance(b.plus.nodes, b.minus.nodes);
  const double node_err = 2.0 * R * (1.0 - std::cos(std::numbers::pi / m)) + 1e-12;
  sc.checks.push_back({"initial gap equals d", std::abs(gap - d) <= node_err,
                       "gap = " + std::to_string(gap) + ", d = " + std::to_string(d)});
  sc.checks.push_back({"contours simple and disjoint",
                       !self_intersects(b.plus.nodes) && !self_intersects(b.minus.nodes) &&
                           !contours_overlap(b.plus, b.minus).overlap,
                       ""});
  require(sc.checks);
  sc.t_end = 9.0 * std::numbers::pi / 4.0;
  sc.params = {{"R", R}, {"d", d}, {"max_R", max_R}};
  return sc;
}

// Single elliptical patch with semi-axes a (along x) and b (along y), evolved as
// 2D Euler; the minus slot carries a far-away small disk that never interacts in
// this mode.
inline ContourScenario kirchhoff_ellipse(double a, double b, int m = 512) {
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("init.params: semi-axes must be > 0");
  ContourScenario sc;
  sc.preset = "kirchhoff_ellipse";
  sc.mode = ContourMode::UnscreenedEuler;
  sc.initial.plus = sample_contour(m, 1, [&](double t) { return Point(a * std::cos(t), b * std::sin(t)); });
  const double far = 10.0 * std::max(a, b);
  sc.initial.minus = sample_contour(m, -1, [&](double t) { return far + 0.5 * std::min(a, b) * std::exp(Point(0, t)); });
  sc.initial.R = std::min(a, b);
  // Classical rigid rotation rate for unit vorticity.
  const double omega = a * b / ((a + b) * (a + b));
  sc.t_end = std::numbers::pi / omega;
  sc.params = {{"a", a}, {"b", b}};
  return sc;
}

struct PointVortexScenario {
  PointVortexState initial;
  double dt = 1e-3;
  double t_end = 0.0;
  double predicted_merger = 0.0;
};

inline PointVortexScenario point_vortex_preset(double x0, double y0, double dt = 1e-3) {
  PointVortexScenario sc;
  sc.initial = {x0, y0, 0.0};
  require_pv_quadrant(x0, y0);
  if (!(dt > 0.0)) throw ConfigError("time.dt: must be > 0");
  sc.dt = dt;
  sc.predicted_merger = pv_merger_time(x0, y0);
  sc.t_end = 1.1 * sc.predicted_merger;
  return sc;
}

inline const std::vector<double> default_nu_values = {1e-3, 1e-4, 1e-5};
inline const std::vector<double> default_eps_values = {0.25, 0.125, 0.0625};

inline std::vector<EulerianScenario> nu_sweep(const EulerianScenario& base,
                                              const std::vector<double>& nus = default_nu_values) {
  std::vector<EulerianScenario> out;
  for (double nu : nus) {
    if (!(nu >= 0.0)) throw ConfigError("model.nu_plus: must be >= 0");
    auto sc = base;
    sc.initial.nu_plus = sc.initial.nu_minus = nu;
    sc.params["nu"] = nu;
    out.push_back(std::move(sc));
  }
  return out;
}

// One screened scenario per eps on an n-point grid whose box is box1 * eps.
inline std::vector<EulerianScenario> eps_sweep(int n, double box1, const SmoothMergerParams& p,
                                               const std::vector<double>& epss = default_eps_values) {
  std::vector<EulerianScenario> out;
  for (double e : epss) out.push_back(right_smooth_merger_screened(make_grid(n, box1 * e), e, p));
  return out;
}

}  // namespace reconnect2d
