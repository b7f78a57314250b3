#pragma once

#include <cmath>

#include "grid.hpp"

namespace reconnect2d {

namespace detail {
// Cubic Lagrange weights on nodes -1, 0, 1, 2 for offset u in [0, 1).
inline void cubic_weights(double u, double w[4]) {
  w[0] = -u * (u - 1.0) * (u - 2.0) / 6.0;
  w[1] = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  w[2] = -(u + 1.0) * u * (u - 2.0) / 2.0;
  w[3] = (u + 1.0) * u * (u - 1.0) / 6.0;
}
}  // namespace detail

// Periodic bicubic (4x4 Lagrange) interpolation of node data; exact at nodes.
template <class Accessor>
double interpolate_periodic(const TorusGrid& g, Accessor&& at, double x, double y) {
  const double h = g.spacing();
  const double sx = x / h + g.n / 2, sy = y / h + g.n / 2;
  const double fx = std::floor(sx), fy = std::floor(sy);
  double wx[4], wy[4];
  detail::cubic_weights(sx - fx, wx);
  detail::cubic_weights(sy - fy, wy);
  const int ix0 = static_cast<int>(fx) - 1, iy0 = static_cast<int>(fy) - 1;
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    const int iy = g.wrap(iy0 + b);
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wx[a] * at(g.wrap(ix0 + a), iy);
    acc += wy[b] * row;
  }
  return acc;
}

inline double interpolate(const ScalarField& f, const Vec2& p) {
  return interpolate_periodic(f.grid, [&](int i, int j) { return f(i, j); }, p[0], p[1]);
}

inline Vec2 interpolate(const VectorField& v, const Vec2& p) {
  const auto& g = v.grid;
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * g.n + i; };
  return {interpolate_periodic(g, [&](int i, int j) { return v.x[idx(i, j)]; }, p[0], p[1]),
          interpolate_periodic(g, [&](int i, int j) { return v.y[idx(i, j)]; }, p[0], p[1])};
}

// Map into [-box/2, box/2).
inline double wrap_coord(double x, double box) {
  double w = std::fmod(x + 0.5 * box, box);
  if (w < 0.0) w += box;
  return w - 0.5 * box;
}

}  // namespace reconnect2d
