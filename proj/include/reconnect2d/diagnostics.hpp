#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "bessel.hpp"
#include "grid.hpp"

namespace reconnect2d {

inline constexpr double default_support_fraction = 1e-6;

inline double support_threshold(const ScalarField& f, double fraction = default_support_fraction) {
  return fraction * max_abs(f.data);
}

// p = infinity gives the max norm.
inline double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p)) return max_abs(f.data);
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
  double s = 0.0;
  if (p == 1.0)
    for (double v : f.data) s += std::abs(v);
  else if (p == 2.0)
    for (double v : f.data) s += v * v;
  else
    for (double v : f.data) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid.cell_area(), 1.0 / p);
}

// First moments over the open first quadrant about the box center.
inline Vec2 quadrant_moments(const ScalarField& f) {
  const auto& g = f.grid;
  double e1 = 0.0, e2 = 0.0;
  for (int iy = g.n / 2 + 1; iy < g.n; ++iy)
    for (int ix = g.n / 2 + 1; ix < g.n; ++ix) {
      e1 += g.coord(ix) * f(ix, iy);
      e2 += g.coord(iy) * f(ix, iy);
    }
  return {e1 * g.cell_area(), e2 * g.cell_area()};
}

struct SupportNode {
  double x, y, w;  // position and weight sigma * h^2
};

namespace detail {

inline std::vector<SupportNode> support_nodes(const ScalarField& f, double theta, bool quadrant_only) {
  const auto& g = f.grid;
  std::vector<SupportNode> out;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double v = f(ix, iy);
      if (std::abs(v) <= theta) continue;
      const double x = g.coord(ix), y = g.coord(iy);
      if (quadrant_only && !(x > 0.0 && y > 0.0)) continue;
      out.push_back({x, y, v * g.cell_area()});
    }
  return out;
}

}  // namespace detail

// Moment derivatives predicted by the double-integral identities for the
// right-handed system with odd-odd data. Unscreened: the two Q x Q integrals.
// Screened: plus the bounded-kernel interaction of F with sigma_plus on Q.
// Values below the support threshold are ignored.
inline Vec2 moment_rhs_oracle(const ScalarPair& sigma, ModelVariant variant,
                              double support_fraction = default_support_fraction) {
  if (variant.handedness != Handedness::Right)
    throw HypothesisError("moment_rhs_oracle: identities hold for the right-handed system only");
  const auto& g = sigma.plus.grid;
  const double theta = support_threshold(sigma.plus, support_fraction);
  int positive = 0, negative = 0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double v = sigma.plus(ix, iy);
      if (std::abs(v) <= theta) continue;
      if (g.coord(iy) <= 0.0) throw HypothesisError("moment_rhs_oracle: sigma_plus not supported in the upper half-plane");
      if (g.coord(ix) > 0.0) (v > 0.0 ? positive : negative)++;
    }
  if (positive > 0 && negative > 0) throw HypothesisError("moment_rhs_oracle: sigma_plus changes sign in Q");

  const auto q = detail::support_nodes(sigma.plus, theta, true);
  double i1 = 0.0, i2 = 0.0;
  for (const auto& a : q) {
    for (const auto& b : q) {
      const double sx = a.x + b.x, sy = a.y + b.y;
      const double plus2 = sx * sx + sy * sy;
      const double dx = a.x - b.x;
      const double refl2 = dx * dx + sy * sy;  // |x - ybar|^2, ybar = (y1, -y2)
      const double ww = a.w * b.w;
      i1 += a.x * b.x * sy / (refl2 * plus2) * ww;
      i2 += sx / plus2 * ww;
    }
  }
  Vec2 out{2.0 / std::numbers::pi * i1, 0.5 / std::numbers::pi * i2};
  if (variant.screening == Screening::Screened) {
    ScalarField F = canonical_momentum(sigma);
    const auto all = detail::support_nodes(F, support_threshold(F, support_fraction), false);
    double j1 = 0.0, j2 = 0.0;
    for (const auto& a : q)
      for (const auto& b : all) {
        const Vec2 k = kernel_calK({a.x - b.x, a.y - b.y});
        j1 += k[0] * b.w * a.w;
        j2 += k[1] * b.w * a.w;
      }
    out[0] += j1;
    out[1] += j2;
  }
  return out;
}

// h^2 sum of sigma_plus sigma_minus over nodes where both exceed their thresholds.
inline double overlap_integral(const ScalarPair& sigma, double support_fraction = default_support_fraction) {
  const double tp = support_threshold(sigma.plus, support_fraction);
  const double tm = support_threshold(sigma.minus, support_fraction);
  double s = 0.0;
  for (std::size_t k = 0; k < sigma.plus.data.size(); ++k) {
    const double a = sigma.plus.data[k], b = sigma.minus.data[k];
    if (std::abs(a) > tp && std::abs(b) > tm) s += a * b;
  }
  return s * sigma.plus.grid.cell_area();
}

struct Components {
  int count = 0;
  std::vector<int> labels;  // 0 = outside, 1..count
};

// 4-connected labeling of {|f| > theta} on the torus.
inline Components support_components(const ScalarField& f, double theta) {
  if (!(theta > 0.0)) throw ConfigError("support_components: theta must be > 0");
  const auto& g = f.grid;
  const int n = g.n;
  Components c;
  c.labels.assign(g.size(), 0);
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(g.size()); ++start) {
    if (c.labels[start] || std::abs(f.data[start]) <= theta) continue;
    const int id = ++c.count;
    c.labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      const int ix = k % n, iy = k / n;
      const int nb[4] = {iy * n + (ix + 1) % n, iy * n + (ix + n - 1) % n, ((iy + 1) % n) * n + ix,
                         ((iy + n - 1) % n) * n + ix};
      for (int m : nb)
        if (!c.labels[m] && std::abs(f.data[m]) > theta) {
          c.labels[m] = id;
          stack.push_back(m);
        }
    }
  }
  return c;
}

struct TrichotomyReport {
  double max_abs_F = 0.0;
  bool exceeds_half = false;      // branch (a)
  int half_level_clusters = 0;    // branch (b) proxy
  bool boundary_case = false;     // max |F| equals 1/2 to rounding
  std::vector<double> critical_values;  // branch (c) candidates, |F| in (theta, 1/2)
  bool any_branch() const { return exceeds_half || half_level_clusters > 4 || !critical_values.empty(); }
};

inline TrichotomyReport trichotomy_report(const ScalarField& F, double support_fraction = default_support_fraction) {
  const auto& g = F.grid;
  const int n = g.n;
  TrichotomyReport r;
  r.max_abs_F = max_abs(F.data);
  r.exceeds_half = r.max_abs_F > 0.5 * (1.0 + 1e-12);
  r.boundary_case = std::abs(r.max_abs_F - 0.5) <= 1e-12;
  auto above = [&](int ix, int iy) { return std::abs(F(g.wrap(ix), g.wrap(iy))) >= 0.5; };

  // Cells whose corners straddle |F| = 1/2, clustered with 8-connectivity.
  std::vector<char> crossing(g.size(), 0);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const bool a = above(ix, iy);
      if (a != above(ix + 1, iy) || a != above(ix, iy + 1) || a != above(ix + 1, iy + 1))
        crossing[static_cast<std::size_t>(iy) * n + ix] = 1;
    }
  std::vector<int> stack;
  for (int s = 0; s < static_cast<int>(g.size()); ++s) {
    if (crossing[s] != 1) continue;
    ++r.half_level_clusters;
    crossing[s] = 2;
    stack.push_back(s);
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      const int ix = k % n, iy = k / n;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int m = g.wrap(iy + dy) * n + g.wrap(ix + dx);
          if (crossing[m] == 1) {
            crossing[m] = 2;
            stack.push_back(m);
          }
        }
    }
  }

  // Critical points: cells where both centered partials change sign.
  const double theta = support_threshold(F, support_fraction);
  auto dfx = [&](int ix, int iy) { return F(g.wrap(ix + 1), g.wrap(iy)) - F(g.wrap(ix - 1), g.wrap(iy)); };
  auto dfy = [&](int ix, int iy) { return F(g.wrap(ix), g.wrap(iy + 1)) - F(g.wrap(ix), g.wrap(iy - 1)); };
  auto changes = [](double a, double b, double c, double d) {
    const double lo = std::min(std::min(a, b), std::min(c, d)), hi = std::max(std::max(a, b), std::max(c, d));
    return lo < 0.0 && hi > 0.0;
  };
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      double vals[4] = {F(ix, iy), F(g.wrap(ix + 1), iy), F(ix, g.wrap(iy + 1)), F(g.wrap(ix + 1), g.wrap(iy + 1))};
      bool inside = true;
      for (double v : vals) inside = inside && std::abs(v) > theta && std::abs(v) < 0.5;
      if (!inside) continue;
      if (changes(dfx(ix, iy), dfx(ix + 1, iy), dfx(ix, iy + 1), dfx(ix + 1, iy + 1)) &&
          changes(dfy(ix, iy), dfy(ix + 1, iy), dfy(ix, iy + 1), dfy(ix + 1, iy + 1)))
        r.critical_values.push_back(0.25 * (vals[0] + vals[1] + vals[2] + vals[3]));
    }
  return r;
}

// Larger of max |sigma(x1,x2) + sigma(-x1,x2)| (both species) and
// max |sigma+(x1,x2) - sigma-(x1,-x2)|.
inline double symmetry_defect(const ScalarPair& s) {
  const auto& g = s.plus.grid;
  double odd = 0.0, cross = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const int rx = g.reflect(ix), ry = g.reflect(iy);
      odd = std::max(odd, std::abs(s.plus(ix, iy) + s.plus(rx, iy)));
      odd = std::max(odd, std::abs(s.minus(ix, iy) + s.minus(rx, iy)));
      cross = std::max(cross, std::abs(s.plus(ix, iy) - s.minus(ix, ry)));
    }
  return std::max(odd, cross);
}

struct DiagnosticsRecord {
  double t = 0.0;
  double l1_plus = 0, l2_plus = 0, linf_plus = 0;
  double l1_minus = 0, l2_minus = 0, linf_minus = 0;
  double E1 = 0, E2 = 0;
  double overlap = 0;
  int components_F = 0;
  double symmetry_defect = 0;
};

inline DiagnosticsRecord diagnose(const ScalarPair& s, double support_fraction = default_support_fraction) {
  DiagnosticsRecord r;
  r.t = s.time;
  r.l1_plus = lp_norm(s.plus, 1);
  r.l2_plus = lp_norm(s.plus, 2);
  r.linf_plus = lp_norm(s.plus, std::numeric_limits<double>::infinity());
  r.l1_minus = lp_norm(s.minus, 1);
  r.l2_minus = lp_norm(s.minus, 2);
  r.linf_minus = lp_norm(s.minus, std::numeric_limits<double>::infinity());
  const Vec2 e = quadrant_moments(s.plus);
  r.E1 = e[0];
  r.E2 = e[1];
  r.overlap = overlap_integral(s, support_fraction);
  ScalarField F = canonical_momentum(s);
  const double theta = support_threshold(F, support_fraction);
  r.components_F = theta > 0.0 ? support_components(F, theta).count : 0;
  r.symmetry_defect = symmetry_defect(s);
  return r;
}

}  // namespace reconnect2d
