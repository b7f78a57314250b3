#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"

namespace reconnect2d {

using Vec2 = std::array<double, 2>;

// Uniform periodic n x n grid on [-box/2, box/2)^2. Node i sits at (i - n/2) h,
// so the center node is exactly the origin and i -> (n - i) mod n is a reflection.
struct TorusGrid {
  int n = 0;
  double box = 0.0;

  double spacing() const { return box / n; }
  double cell_area() const { return spacing() * spacing(); }
  double coord(int i) const { return (i - n / 2) * spacing(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  int reflect(int i) const { return (n - i) % n; }
  // signed lattice index of FFT slot m
  int lattice(int m) const { return m <= n / 2 ? m : m - n; }
  double wavenumber(int m) const { return 2.0 * std::numbers::pi * lattice(m) / box; }
  int wrap(int i) const { return ((i % n) + n) % n; }

  bool operator==(const TorusGrid&) const = default;
};

inline TorusGrid make_grid(int n, double box) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw ConfigError("grid.n: must be a power of two >= 16, got " + std::to_string(n));
  if (!(box > 0.0) || !std::isfinite(box))
    throw ConfigError("grid.box: must be > 0");
  return TorusGrid{n, box};
}

// Row-major samples: value(ix, iy) at (coord(ix), coord(iy)).
struct ScalarField {
  TorusGrid grid;
  RealBuffer data;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g) : grid(g), data(g.size(), 0.0) {}

  double& operator()(int ix, int iy) { return data[static_cast<std::size_t>(iy) * grid.n + ix]; }
  double operator()(int ix, int iy) const {
    return data[static_cast<std::size_t>(iy) * grid.n + ix];
  }

  template <class Fn>
  static ScalarField sample(const TorusGrid& g, Fn&& fn) {
    ScalarField f(g);
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) f(ix, iy) = fn(g.coord(ix), g.coord(iy));
    return f;
  }
};

struct VectorField {
  TorusGrid grid;
  RealBuffer x, y;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g) : grid(g), x(g.size(), 0.0), y(g.size(), 0.0) {}

  Vec2 at(int ix, int iy) const {
    auto k = static_cast<std::size_t>(iy) * grid.n + ix;
    return {x[k], y[k]};
  }
};

struct ScalarPair {
  ScalarField plus;
  ScalarField minus;
  double time = 0.0;
};

enum class Handedness { Right, Left };
enum class Screening { Screened, Unscreened };

struct ModelVariant {
  Handedness handedness = Handedness::Right;
  Screening screening = Screening::Screened;
  bool operator==(const ModelVariant&) const = default;
};

inline std::string to_string(ModelVariant v) {
  std::string s = v.handedness == Handedness::Right ? "right" : "left";
  return s + (v.screening == Screening::Screened ? "+screened" : "+unscreened");
}

inline ScalarField canonical_momentum(const ScalarPair& s) {
  ScalarField F(s.plus.grid);
  for (std::size_t k = 0; k < F.data.size(); ++k) F.data[k] = 0.5 * (s.plus.data[k] + s.minus.data[k]);
  return F;
}

template <class Container>
inline double max_abs(const Container& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace reconnect2d
