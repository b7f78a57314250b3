#pragma once

#include <utility>

#include "bessel.hpp"
#include "grid.hpp"

namespace reconnect2d {

// What the zero wavenumber of a Biot-Savart velocity is set to. Zero drops it;
// FreeSpace restores the box average the whole-plane velocity would have, which
// removes the uniform drift a torus adds to zero-mean data with a dipole moment.
enum class MeanFlow { Zero, FreeSpace };

inline Spectrum forward(const ScalarField& f) {
  const auto& plan = fft_plan(f.grid.n);
  Spectrum out(plan.spectrum_size());
  plan.forward(f.data.data(), out.data());
  return out;
}

// Consumes its argument.
inline ScalarField inverse(Spectrum&& fhat, const TorusGrid& g) {
  ScalarField f(g);
  fft_plan(g.n).inverse_destroy(fhat.data(), f.data.data());
  return f;
}

inline bool retained(const TorusGrid& g, int ky_slot, int kx_slot) {
  return 3 * std::abs(g.lattice(ky_slot)) <= g.n && 3 * kx_slot <= g.n;
}

// 2/3 rule: zero every mode with |k_i| > n/3 in either direction.
inline void dealias(Spectrum& fhat, const TorusGrid& g) {
  const int nk = g.n / 2 + 1;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < nk; ++j)
      if (!retained(g, i, j)) fhat[static_cast<std::size_t>(i) * nk + j] = 0.0;
}

namespace symbol {
// Multipliers as functions of |k|^2, applied before i k_perp.
inline double inverse_laplacian(double k2) { return k2 > 0.0 ? -1.0 / k2 : 0.0; }
inline double screened(double k2) { return k2 > 0.0 ? 1.0 / (1.0 + k2) : 0.0; }
}  // namespace symbol

// out = i k_perp * sum_s m_s(|k|^2) fhat_s with k_perp = (-k2, k1). Nyquist
// derivative slots are zeroed so real fields map to real fields.
template <class Mult>
void perp_gradient_spectrum(const TorusGrid& g, Mult&& mult, Spectrum& vx, Spectrum& vy) {
  const int n = g.n, nk = n / 2 + 1;
  for (int i = 0; i < n; ++i) {
    const double ky = (i == n / 2) ? 0.0 : g.wavenumber(i);
    const double kyf = g.wavenumber(i);
    for (int j = 0; j < nk; ++j) {
      const double kx = (j == n / 2) ? 0.0 : g.wavenumber(j);
      const double kxf = g.wavenumber(j);
      const auto idx = static_cast<std::size_t>(i) * nk + j;
      const Complex s = mult(kxf * kxf + kyf * kyf, idx);
      vx[idx] = Complex(0.0, -ky) * s;
      vy[idx] = Complex(0.0, kx) * s;
    }
  }
}

inline VectorField inverse_vector(Spectrum& vx, Spectrum& vy, const TorusGrid& g) {
  VectorField v(g);
  const auto& plan = fft_plan(g.n);
  plan.inverse_destroy(vx.data(), v.x.data());
  plan.inverse_destroy(vy.data(), v.y.data());
  return v;
}

// First moment about the box center.
inline Vec2 dipole_moment(const ScalarField& f) {
  const auto& g = f.grid;
  double p1 = 0.0, p2 = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      p1 += g.coord(ix) * f(ix, iy);
      p2 += g.coord(iy) * f(ix, iy);
    }
  return {p1 * g.cell_area(), p2 * g.cell_area()};
}

// Box average of the whole-plane inverse-Laplacian velocity of data supported
// well inside the box.
inline Vec2 free_space_mean_velocity(const Vec2& p, double box) {
  const double s = 0.5 / (box * box);
  return {p[1] * s, -p[0] * s};
}

// The screened velocity grad-perp (I - Laplacian)^{-1} has an integrable
// kernel, so its torus version keeps the whole-plane mean; what differs near
// compact data is the field of the periodic images. For a dipole that field is
// uniform to leading order and, by the lattice symmetry, equals -c times the
// drift above with c = (box^2 / 2pi) sum_{m != 0} K0(|m| box). c -> 1 as the
// box shrinks below the screening length and -> 0 as it grows.
inline double screened_mean_factor(double box) {
  thread_local double last_box = -1.0, last = 0.0;
  if (box == last_box) return last;
  const double reach = 40.0;  // K0(40) ~ 1e-19
  const int m = static_cast<int>(std::ceil(reach / box));
  double sum = 0.0;
  for (int i = 1; i <= m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double r = box * std::hypot(double(i), double(j));
      if (r > reach) continue;
      // eight lattice points per (i, j) with 0 < j < i, four on the axes and diagonals
      sum += (j == 0 || j == i ? 4.0 : 8.0) * bessel_k0(r);
    }
  last_box = box;
  last = box * box * sum / (2.0 * std::numbers::pi);
  return last;
}

inline void add_uniform(VectorField& v, const Vec2& u) {
  for (auto& a : v.x) a += u[0];
  for (auto& a : v.y) a += u[1];
}

inline VectorField op_U(const ScalarField& f, MeanFlow mean = MeanFlow::Zero) {
  const auto& g = f.grid;
  Spectrum fh = forward(f);
  Spectrum vx(fh.size()), vy(fh.size());
  perp_gradient_spectrum(
      g, [&](double k2, std::size_t k) { return symbol::inverse_laplacian(k2) * fh[k]; }, vx, vy);
  VectorField v = inverse_vector(vx, vy, g);
  if (mean == MeanFlow::FreeSpace) add_uniform(v, free_space_mean_velocity(dipole_moment(f), g.box));
  return v;
}

inline VectorField op_B(const ScalarField& f, MeanFlow mean = MeanFlow::Zero) {
  const auto& g = f.grid;
  Spectrum fh = forward(f);
  Spectrum vx(fh.size()), vy(fh.size());
  perp_gradient_spectrum(
      g, [&](double k2, std::size_t k) { return symbol::screened(k2) * fh[k]; }, vx, vy);
  VectorField v = inverse_vector(vx, vy, g);
  if (mean == MeanFlow::FreeSpace) {
    const Vec2 u = free_space_mean_velocity(dipole_moment(f), g.box);
    const double c = -screened_mean_factor(g.box);
    add_uniform(v, {c * u[0], c * u[1]});
  }
  return v;
}

// S = B + U, the operator 2 grad-perp K with a bounded kernel.
inline VectorField op_S(const ScalarField& f, MeanFlow mean = MeanFlow::Zero) {
  const auto& g = f.grid;
  Spectrum fh = forward(f);
  Spectrum vx(fh.size()), vy(fh.size());
  perp_gradient_spectrum(
      g,
      [&](double k2, std::size_t k) {
        return (symbol::screened(k2) + symbol::inverse_laplacian(k2)) * fh[k];
      },
      vx, vy);
  VectorField v = inverse_vector(vx, vy, g);
  if (mean == MeanFlow::FreeSpace) {
    const Vec2 u = free_space_mean_velocity(dipole_moment(f), g.box);
    const double c = 1.0 - screened_mean_factor(g.box);
    add_uniform(v, {c * u[0], c * u[1]});
  }
  return v;
}

// v_t = sum_s u[t][s] U(sigma_s) + b[t][s] B(sigma_s); index 0 = plus, 1 = minus.
struct VelocityLaw {
  double u[2][2];
  double b[2][2];
};

inline VelocityLaw velocity_law(ModelVariant v) {
  const bool right = v.handedness == Handedness::Right;
  if (v.screening == Screening::Unscreened) {
    if (right) return {{{0.0, -1.0}, {1.0, 0.0}}, {{0.0, 0.0}, {0.0, 0.0}}};
    return {{{1.0, 0.0}, {0.0, -1.0}}, {{0.0, 0.0}, {0.0, 0.0}}};
  }
  // Both handednesses share U(omega); the sign of the B(F) term flips.
  const double s = right ? 0.5 : -0.5;
  return {{{0.5, -0.5}, {0.5, -0.5}}, {{s, s}, {-s, -s}}};
}

// Box-average correction of each law velocity, given the free-space U drift of
// each species.
inline void add_law_drift(const VelocityLaw& law, const Vec2 (&m)[2], double box, Vec2 (&drift)[2]) {
  const double cb = screened_mean_factor(box);
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < 2; ++s) {
      const double w = law.u[t][s] - cb * law.b[t][s];
      for (int c = 0; c < 2; ++c) drift[t][c] += w * m[s][c];
    }
}

inline std::pair<VectorField, VectorField> compute_velocities(const ScalarPair& sigma, ModelVariant variant,
                                                              MeanFlow mean = MeanFlow::Zero) {
  const auto& g = sigma.plus.grid;
  const VelocityLaw law = velocity_law(variant);
  Spectrum src[2] = {forward(sigma.plus), forward(sigma.minus)};
  Vec2 drift[2] = {{0.0, 0.0}, {0.0, 0.0}};
  if (mean == MeanFlow::FreeSpace) {
    const Vec2 m[2] = {free_space_mean_velocity(dipole_moment(sigma.plus), g.box),
                       free_space_mean_velocity(dipole_moment(sigma.minus), g.box)};
    add_law_drift(law, m, g.box, drift);
  }
  VectorField out[2];
  for (int t = 0; t < 2; ++t) {
    Spectrum vx(src[0].size()), vy(src[0].size());
    perp_gradient_spectrum(
        g,
        [&](double k2, std::size_t k) {
          const double iu = symbol::inverse_laplacian(k2), sb = symbol::screened(k2);
          return (law.u[t][0] * iu + law.b[t][0] * sb) * src[0][k] +
                 (law.u[t][1] * iu + law.b[t][1] * sb) * src[1][k];
        },
        vx, vy);
    out[t] = inverse_vector(vx, vy, g);
    add_uniform(out[t], drift[t]);
  }
  return {std::move(out[0]), std::move(out[1])};
}

// Spectral divergence, for checks.
inline ScalarField divergence(const VectorField& v) {
  const auto& g = v.grid;
  ScalarField fx(g), fy(g);
  fx.data = v.x;
  fy.data = v.y;
  Spectrum a = forward(fx), b = forward(fy);
  const int nk = g.n / 2 + 1;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < nk; ++j) {
      const auto k = static_cast<std::size_t>(i) * nk + j;
      const double kx = (j == g.n / 2) ? 0.0 : g.wavenumber(j);
      const double ky = (i == g.n / 2) ? 0.0 : g.wavenumber(i);
      a[k] = Complex(0.0, kx) * a[k] + Complex(0.0, ky) * b[k];
    }
  return inverse(std::move(a), g);
}

}  // namespace reconnect2d
