#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace reconnect2d {

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit: log of a non-positive value");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("fit: abscissae coincide");
  return (n * sxy - sx * sy) / den;
}

// Step-size policy of the Eulerian runs: a fixed dt, or with dt = 0 a fraction
// of the CFL limit refreshed every few steps. A step rejected by the CFL check
// is retried at half size and the halved step is kept.
class Stepper {
 public:
  static constexpr double safety = 0.8;
  static constexpr int refresh = 10;

  explicit Stepper(double dt = 0.0) : fixed_(dt) {
    if (!(dt >= 0.0)) throw ConfigError("time.dt: must be >= 0");
  }

  void advance(SolverState& s, double target, TracerSet* tracers = nullptr) {
    const double tol = 1e-12 * std::max(1.0, std::abs(target));
    while (s.sigma.time < target - tol) {
      if (fixed_ > 0.0) {
        if (dt_ == 0.0) dt_ = fixed_;
      } else if (dt_ == 0.0 || since_refresh_ >= refresh) {
        dt_ = safety * cfl_dt(s);
        since_refresh_ = 0;
      }
      const bool last = dt_ >= target - s.sigma.time;
      const double h = last ? target - s.sigma.time : dt_;
      try {
        s = step_rk4(s, h, tracers);
      } catch (const StepSizeError&) {
        dt_ = 0.5 * std::min(dt_, h);
        if (dt_ < 1e-14 * std::max(1.0, target)) throw NumericAbort("step size underflow at t = " + std::to_string(s.sigma.time));
        continue;
      }
      if (last) s.sigma.time = target;
      ++since_refresh_;
      ++steps_;
    }
  }

  double dt() const { return dt_; }
  long steps() const { return steps_; }

 private:
  double fixed_;
  double dt_ = 0.0;
  int since_refresh_ = 0;
  long steps_ = 0;
};

inline double periodic_distance(const Vec2& a, const Vec2& b, double box) {
  double dx = a[0] - b[0], dy = a[1] - b[1];
  if (box > 0.0) {
    dx -= box * std::round(dx / box);
    dy -= box * std::round(dy / box);
  }
  return std::hypot(dx, dy);
}

// Markers inside the upper-right plus blob of the merger data: its center and
// three rings at 1/4, 1/2, 3/4 of the support radius.
inline TracerSet merger_tracers(const TorusGrid& g, const SmoothMergerParams& p) {
  const double c = 2.0 * p.scale * p.eps, rho = merger_bump_radius * p.eps;
  std::vector<Vec2> a{{c, c}};
  for (double f : {0.25, 0.5, 0.75})
    for (int k = 0; k < 8; ++k) {
      const double th = 2.0 * std::numbers::pi * k / 8;
      a.push_back({c + f * rho * std::cos(th), c + f * rho * std::sin(th)});
    }
  return TracerSet::from_labels(std::move(a), g.box);
}

// Two runs from the same data under two velocity laws.
struct PairRun {
  std::vector<double> t;
  std::vector<double> gap;        // max over species of ||a - b||_{L^p}
  std::vector<double> deviation;  // max over tracers of |X_a - X_b|, both species
  double final_gap() const { return gap.back(); }
  double max_deviation() const { return *std::max_element(deviation.begin(), deviation.end()); }
};

inline PairRun run_pair(const ScalarPair& data, ModelVariant a, ModelVariant b, double T, int samples, double p,
                        const TracerSet& tracers = {}, double dt = 0.0) {
  if (!(T > 0.0) || samples < 1) throw ConfigError("time.t_end: must be > 0");
  SolverState sa{data, a}, sb{data, b};
  TracerSet ta = tracers, tb = tracers;
  Stepper pa(dt), pb(dt);
  const bool track = !tracers.labels.empty();
  PairRun out;
  for (int k = 1; k <= samples; ++k) {
    const double t = T * k / samples;
    pa.advance(sa, t, track ? &ta : nullptr);
    pb.advance(sb, t, track ? &tb : nullptr);
    double gap = 0.0;
    for (int s = 0; s < 2; ++s) {
      const auto& fa = s == 0 ? sa.sigma.plus : sa.sigma.minus;
      const auto& fb = s == 0 ? sb.sigma.plus : sb.sigma.minus;
      ScalarField diff(fa.grid);
      for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] = fa.data[i] - fb.data[i];
      gap = std::max(gap, lp_norm(diff, p));
    }
    double dev = 0.0;
    for (std::size_t m = 0; track && m < ta.labels.size(); ++m) {
      dev = std::max(dev, periodic_distance(ta.plus[m], tb.plus[m], ta.box));
      dev = std::max(dev, periodic_distance(ta.minus[m], tb.minus[m], ta.box));
    }
    out.t.push_back(t);
    out.gap.push_back(gap);
    out.deviation.push_back(dev);
  }
  return out;
}

inline constexpr ModelVariant right_screened{Handedness::Right, Screening::Screened};
inline constexpr ModelVariant right_unscreened{Handedness::Right, Screening::Unscreened};

// Sup over tracers and sample times of |X - Y|, X advected by the screened and
// Y by the unscreened right-handed flow of the same data.
inline double lagrangian_deviation(const ScalarPair& data, const TracerSet& tracers, double T, int samples = 10) {
  if (tracers.labels.empty()) throw ConfigError("tracers: empty label set");
  return run_pair(data, right_screened, right_unscreened, T, samples, 2.0, tracers).max_deviation();
}

struct StabilityOptions {
  int n = 256;
  double box1 = 8.0;  // box at eps = 1; each run uses box1 * eps
  double T = 1.0;
  double p = 1.5;
  int samples = 4;
  double dt = 0.0;
  SmoothMergerParams data{};
};

struct StabilityStudy {
  std::vector<double> eps;
  std::vector<PairRun> runs;
  double slope = 0.0;            // of the L^p gap at T against eps
  double deviation_slope = 0.0;  // of the tracer deviation against eps
  std::vector<double> deviation_ratios;  // deviation(eps_i) / deviation(eps_{i+1})
};

inline void require_halving(const std::vector<double>& eps) {
  if (eps.size() < 3) throw ConfigError("sweep.values: need at least three eps values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || eps[i] > 1.0) throw ConfigError("sweep.values: eps must lie in (0, 1]");
    if (i > 0 && std::abs(eps[i] / eps[i - 1] - 0.5) > 1e-9)
      throw ConfigError("sweep.values: eps values must halve each time");
  }
}

// Screened against unscreened right-handed evolution of the same eps-scaled
// merger data, for each eps.
inline StabilityStudy stability_gap(const std::vector<double>& eps, const StabilityOptions& o = {}) {
  if (!(o.p > 1.0 && o.p < 2.0)) throw ConfigError("stability: p must lie in (1, 2)");
  require_halving(eps);
  StabilityStudy st;
  std::vector<double> finals, devs;
  for (double e : eps) {
    const auto g = make_grid(o.n, o.box1 * e);
    require_resolved(g, e);
    SmoothMergerParams p = o.data;
    p.eps = e;
    const auto data = smooth_merger_data(g, p);
    st.eps.push_back(e);
    st.runs.push_back(run_pair(data, right_screened, right_unscreened, o.T, o.samples, o.p, merger_tracers(g, p), o.dt));
    finals.push_back(st.runs.back().final_gap());
    devs.push_back(st.runs.back().max_deviation());
  }
  st.slope = loglog_slope(st.eps, finals);
  st.deviation_slope = loglog_slope(st.eps, devs);
  for (std::size_t i = 0; i + 1 < devs.size(); ++i) st.deviation_ratios.push_back(devs[i] / devs[i + 1]);
  return st;
}

struct InviscidStudy {
  std::vector<double> nu;
  std::vector<double> l2_gap, l1_gap;           // at T
  std::vector<std::vector<double>> l2_history;  // per nu, at the sample times
  double order_l2 = 0.0, order_l1 = 0.0;
};

// Resistive runs against the ideal run from the same data. All runs share one
// fixed step so the gap is not polluted by differing time grids.
inline InviscidStudy inviscid_order(const EulerianScenario& base, const std::vector<double>& nus, double T,
                                    int samples = 4) {
  if (nus.size() < 3) throw ConfigError("sweep.values: need at least three nu values");
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (!(nus[i] > 0.0)) throw ConfigError("sweep.values: nu must be > 0");
    if (i > 0 && std::abs(nus[i - 1] / nus[i] - 10.0) > 1e-6)
      throw ConfigError("sweep.values: nu values must decrease by decades");
  }
  if (!(T > 0.0)) throw ConfigError("time.t_end: must be > 0");
  SolverState ref = base.initial;
  ref.nu_plus = ref.nu_minus = 0.0;
  const double dt = base.dt > 0.0 ? base.dt : 0.5 * cfl_dt(ref);
  std::vector<SolverState> refs;
  Stepper sr(dt);
  for (int k = 1; k <= samples; ++k) {
    sr.advance(ref, T * k / samples);
    refs.push_back(ref);
  }
  InviscidStudy st;
  for (double nu : nus) {
    SolverState s = base.initial;
    s.nu_plus = s.nu_minus = nu;
    Stepper sv(dt);
    std::vector<double> hist;
    double l1 = 0.0;
    for (int k = 1; k <= samples; ++k) {
      sv.advance(s, T * k / samples);
      double l2 = 0.0;
      l1 = 0.0;
      for (int q = 0; q < 2; ++q) {
        const auto& a = q == 0 ? s.sigma.plus : s.sigma.minus;
        const auto& b = q == 0 ? refs[k - 1].sigma.plus : refs[k - 1].sigma.minus;
        ScalarField diff(a.grid);
        for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] = a.data[i] - b.data[i];
        l2 = std::max(l2, lp_norm(diff, 2));
        l1 = std::max(l1, lp_norm(diff, 1));
      }
      hist.push_back(l2);
    }
    st.nu.push_back(nu);
    st.l2_gap.push_back(hist.back());
    st.l1_gap.push_back(l1);
    st.l2_history.push_back(std::move(hist));
  }
  st.order_l2 = loglog_slope(st.nu, st.l2_gap);
  st.order_l1 = loglog_slope(st.nu, st.l1_gap);
  return st;
}

// Contour stepping at a fraction of the node CFL limit, halving on rejection.
inline ContourPairState contour_step(const ContourPairState& s, ContourMode mode, double dt_fixed, double max_dt,
                                     double* used = nullptr) {
  double dt = dt_fixed > 0.0 ? dt_fixed : 0.8 * contour_cfl_dt(s, mode);
  dt = std::min(dt, max_dt);
  for (;;) {
    try {
      auto next = step_contours(s, dt, mode);
      if (used) *used = dt;
      return next;
    } catch (const StepSizeError&) {
      dt *= 0.5;
      if (dt < 1e-14) throw NumericAbort("contour step size underflow at t = " + std::to_string(s.time));
    }
  }
}

struct KirchhoffStudy {
  std::vector<double> t, angle, residual, area;
  double omega = 0.0;          // mean angular velocity of the fitted major axis
  double omega_spread = 0.0;   // (max - min) / |mean| of the per-interval rates
  double max_residual = 0.0;   // relative to the minor semi-axis
  double area_drift = 0.0;     // relative
  static constexpr double paper_rate = 4.0 / 9.0;
};

// Tracks the moment-fitted ellipse of the plus contour over the scenario's run.
inline KirchhoffStudy kirchhoff_rotation(const ContourScenario& sc, int samples = 40) {
  if (samples < 2) throw ConfigError("time.output_every: need at least two samples");
  KirchhoffStudy st;
  ContourPairState s = sc.initial;
  const double R = sc.initial.R;
  auto record = [&] {
    const auto fit = fit_ellipse(s.plus.nodes);
    double a = fit.angle;
    if (!st.angle.empty()) a += std::numbers::pi * std::round((st.angle.back() - a) / std::numbers::pi);
    st.t.push_back(s.time);
    st.angle.push_back(a);
    st.residual.push_back(fit.residual(s.plus.nodes) / R);
    st.area.push_back(shoelace_area(s.plus.nodes));
  };
  record();
  for (int k = 1; k <= samples; ++k) {
    const double target = sc.t_end * k / samples;
    while (s.time < target - 1e-12) s = contour_step(s, sc.mode, sc.dt, target - s.time);
    s.time = target;
    record();
  }
  std::vector<double> rates;
  for (std::size_t i = 1; i < st.t.size(); ++i)
    rates.push_back((st.angle[i] - st.angle[i - 1]) / (st.t[i] - st.t[i - 1]));
  st.omega = (st.angle.back() - st.angle.front()) / (st.t.back() - st.t.front());
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  st.omega_spread = (*hi - *lo) / std::abs(st.omega);
  st.max_residual = *std::max_element(st.residual.begin(), st.residual.end());
  for (double a : st.area) st.area_drift = std::max(st.area_drift, std::abs(a / st.area.front() - 1.0));
  return st;
}

struct PatchMergerStudy {
  std::vector<double> t, overlap_area, sup_zeta, sup_slope;
  std::optional<double> first_touch;  // bisected to touch_tol
  double t_stop = 0.0;
  std::string stop_reason;
  TouchWindow background;  // of the analytic backgrounds, extrapolated past t_stop
  bool disjoint_at_start = false;
  bool background_disjoint_at_end = false;
  double max_sup_zeta = 0.0;
  static constexpr double touch_tol = 1e-3;
  static constexpr double stop_fraction = 0.1;
};

// Runs the patch scenario until the contours overlap by more than 10% of the
// smaller patch area, the node spacing degenerates, or t_end.
inline PatchMergerStudy patch_merger_run(const ContourScenario& sc,
                                         const std::function<void(const ContourPairState&)>& on_step = {}) {
  PatchMergerStudy st;
  ContourPairState s = sc.initial;
  const double R = s.R, d = s.d;
  const int m = s.plus.size();
  const double patch_area = std::min(std::abs(shoelace_area(s.plus.nodes)), std::abs(shoelace_area(s.minus.nodes)));
  auto measure = [&](const ContourPairState& c) {
    const auto ov = contours_overlap(c.plus, c.minus);
    const auto pn = perturbation_norm(c, analytic_background(c.time, R, d, m), R);
    st.t.push_back(c.time);
    st.overlap_area.push_back(ov.area);
    st.sup_zeta.push_back(pn.sup);
    st.sup_slope.push_back(pn.sup_slope);
    st.max_sup_zeta = std::max(st.max_sup_zeta, pn.sup);
    return ov;
  };
  st.disjoint_at_start = !measure(s).overlap;
  st.stop_reason = "t_end";
  while (s.time < sc.t_end - 1e-12) {
    ContourPairState next;
    double dt = 0.0;
    try {
      next = contour_step(s, sc.mode, sc.dt, sc.t_end - s.time, &dt);
    } catch (const GeometryError& e) {
      st.stop_reason = std::string("node spacing degenerate: ") + e.what();
      break;
    }
    const bool before = !st.overlap_area.empty() && st.overlap_area.back() > 0.0;
    const auto ov = measure(next);
    if (on_step) on_step(next);
    if (!st.first_touch && ov.overlap && !before) {
      double lo = 0.0, hi = dt;
      while (hi - lo > PatchMergerStudy::touch_tol) {
        const double mid = 0.5 * (lo + hi);
        const auto probe = step_contours(s, mid, sc.mode);
        (contours_overlap(probe.plus, probe.minus).overlap ? hi : lo) = mid;
      }
      st.first_touch = s.time + 0.5 * (lo + hi);
    }
    s = std::move(next);
    if (ov.area > PatchMergerStudy::stop_fraction * patch_area) {
      st.stop_reason = "overlap above 10% of patch area";
      break;
    }
    if (self_intersects(s.plus.nodes) || self_intersects(s.minus.nodes)) {
      st.stop_reason = "contour no longer simple";
      break;
    }
  }
  st.t_stop = s.time;
  const double horizon = 9.0 * std::numbers::pi / 4.0;
  st.background = background_touch_window(R, d, 2.0 * horizon, m);
  const auto bg = analytic_background(horizon, R, d, m);
  st.background_disjoint_at_end = !contours_overlap(bg.plus, bg.minus).overlap;
  return st;
}

// Max node deviation, relative to R, between screened-left and Euler
// evolutions of the same patch pair at time T. The exponent is the slope of
// deviation / |log R| against R, so an R^2 |log R| law fits as 2.
struct ScreeningConvergence {
  std::vector<double> R, deviation;
  double exponent = 0.0;
};

inline ScreeningConvergence screening_convergence(const std::vector<double>& Rs, double T, int m = 128,
                                                  double d_over_R = 0.5) {
  ScreeningConvergence out;
  for (double R : Rs) {
    auto sc = left_patch_merger(R, d_over_R * R, m, std::max(0.1, R));
    ContourPairState a = sc.initial, b = sc.initial;
    while (a.time < T - 1e-12) a = contour_step(a, ContourMode::ScreenedLeft, 0.0, T - a.time);
    while (b.time < T - 1e-12) b = contour_step(b, ContourMode::UnscreenedEuler, 0.0, T - b.time);
    double dev = 0.0;
    for (int j = 0; j < m; ++j) {
      dev = std::max(dev, std::abs(a.plus.nodes[j] - b.plus.nodes[j]));
      dev = std::max(dev, std::abs(a.minus.nodes[j] - b.minus.nodes[j]));
    }
    out.R.push_back(R);
    out.deviation.push_back(dev / R);
  }
  std::vector<double> reduced;
  for (std::size_t i = 0; i < out.R.size(); ++i) reduced.push_back(out.deviation[i] / std::abs(std::log(out.R[i])));
  out.exponent = loglog_slope(out.R, reduced);
  return out;
}

}  // namespace reconnect2d
