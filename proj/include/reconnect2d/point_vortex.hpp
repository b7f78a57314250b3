#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "grid.hpp"

namespace reconnect2d {

// Upper-left vortex of the four-fold symmetric configuration; the other three
// follow from the odd-in-x1 and plus/minus reflection symmetries.
struct PointVortexState {
  double x = 0.0;
  double y = 0.0;
  double time = 0.0;
};

inline Vec2 pv_rhs(const PointVortexState& s) {
  const double r2 = s.x * s.x + s.y * s.y;
  if (s.y == 0.0 || r2 == 0.0) throw DomainError("pv_rhs: singular configuration (merger reached)");
  const double c = 1.0 / (4.0 * std::numbers::pi * r2);
  return {c * s.x * s.x / s.y, c * s.x};
}

inline void require_pv_quadrant(double x0, double y0) {
  if (!(x0 < 0.0) || !(y0 > 0.0)) throw DomainError("point vortex: need x0 < 0 and y0 > 0");
}

// d(x^2)/dt, constant along trajectories.
inline double pv_rate(double x0, double y0) {
  require_pv_quadrant(x0, y0);
  const double ratio = y0 / x0;
  return 1.0 / (2.0 * std::numbers::pi * ratio * (1.0 + ratio * ratio));
}

inline double pv_merger_time(double x0, double y0) { return -x0 * x0 / pv_rate(x0, y0); }

struct PvTrajectory {
  std::vector<double> t, x, y;
  std::optional<double> merger_time;
};

// RK4 with the step shrunk like r^2 near the collision (speed grows like 1/r).
// Stops once r < 10 dt r0 and extrapolates the affine law for x^2 to its root.
inline PvTrajectory pv_integrate(PointVortexState s, double dt, double t_end) {
  require_pv_quadrant(s.x, s.y);
  if (!(dt > 0.0)) throw ConfigError("time.dt: must be > 0");
  const double r0 = std::hypot(s.x, s.y);
  PvTrajectory out;
  auto record = [&] {
    out.t.push_back(s.time);
    out.x.push_back(s.x);
    out.y.push_back(s.y);
  };
  record();
  while (s.time < t_end) {
    const double r = std::hypot(s.x, s.y);
    if (r < 10.0 * dt * r0) {
      const Vec2 v = pv_rhs(s);
      const double slope = 2.0 * s.x * v[0];
      out.merger_time = s.time - s.x * s.x / slope;
      if (out.t.back() != s.time) record();
      break;
    }
    double h = dt * std::min(1.0, (r / r0) * (r / r0));
    h = std::min(h, t_end - s.time);
    auto at = [&](double dx, double dy) { return pv_rhs({s.x + dx, s.y + dy, 0.0}); };
    const Vec2 k1 = at(0.0, 0.0);
    const Vec2 k2 = at(0.5 * h * k1[0], 0.5 * h * k1[1]);
    const Vec2 k3 = at(0.5 * h * k2[0], 0.5 * h * k2[1]);
    const Vec2 k4 = at(h * k3[0], h * k3[1]);
    s.x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    s.y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    s.time += h;
    if (s.time - out.t.back() >= dt * (1.0 - 1e-9)) record();
  }
  return out;
}

}  // namespace reconnect2d
