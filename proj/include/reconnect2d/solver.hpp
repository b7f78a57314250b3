#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "interpolate.hpp"
#include "operators.hpp"

namespace reconnect2d {

inline constexpr double cfl_number = 0.5;

struct SolverState {
  ScalarPair sigma;
  ModelVariant variant;
  double nu_plus = 0.0;
  double nu_minus = 0.0;
  long step_count = 0;
  bool advection = true;  // false: pure diffusion
  MeanFlow mean_flow = MeanFlow::FreeSpace;
};

inline void validate(const SolverState& s) {
  if (!(s.nu_plus >= 0.0)) throw ConfigError("model.nu_plus: must be >= 0");
  if (!(s.nu_minus >= 0.0)) throw ConfigError("model.nu_minus: must be >= 0");
  if (!(s.sigma.plus.grid == s.sigma.minus.grid)) throw ConfigError("sigma: fields must share one grid");
}

// Lagrangian markers carried by both velocity fields. plus/minus hold X+ and X-
// at `time`; record() appends a sample to the history.
struct TracerSet {
  std::vector<Vec2> labels;
  std::vector<Vec2> plus, minus;
  double time = 0.0;
  double box = 0.0;  // > 0: positions wrapped into the torus
  std::vector<double> sample_times;
  std::vector<std::vector<Vec2>> plus_history, minus_history;

  static TracerSet from_labels(std::vector<Vec2> a, double box) {
    TracerSet t;
    t.labels = a;
    t.plus = a;
    t.minus = std::move(a);
    t.box = box;
    return t;
  }
  void record() {
    sample_times.push_back(time);
    plus_history.push_back(plus);
    minus_history.push_back(minus);
  }
  void wrap() {
    if (box <= 0.0) return;
    for (auto* set : {&plus, &minus})
      for (auto& p : *set) p = {wrap_coord(p[0], box), wrap_coord(p[1], box)};
  }
};

namespace detail {

// Pseudo-spectral evaluation of -v.grad(sigma) for both species.
class Tendency {
 public:
  Tendency(const TorusGrid& g, ModelVariant variant, MeanFlow mean)
      : g_(g), law_(velocity_law(variant)), mean_(mean), nk_(g.n / 2 + 1) {
    const std::size_t ns = static_cast<std::size_t>(g.n) * nk_;
    for (auto& m : masked_) m.resize(ns);
    tx_.resize(ns);
    ty_.resize(ns);
    for (auto& v : vel_) v = VectorField(g);
    grad_ = VectorField(g);
    phys_ = ScalarField(g);
  }

  // Writes tendencies into out[0..1]; velocities stay available via velocity().
  // Returns the max speed over both fields.
  double operator()(const Spectrum (&hat)[2], Spectrum (&out)[2]) {
    const auto& plan = fft_plan(g_.n);
    for (int s = 0; s < 2; ++s) {
      masked_[s] = hat[s];
      dealias(masked_[s], g_);
    }
    Vec2 drift[2] = {{0.0, 0.0}, {0.0, 0.0}};
    if (mean_ == MeanFlow::FreeSpace) {
      Vec2 m[2];
      for (int s = 0; s < 2; ++s) {
        tx_ = masked_[s];
        plan.inverse_destroy(tx_.data(), phys_.data.data());
        m[s] = free_space_mean_velocity(dipole_moment(phys_), g_.box);
      }
      add_law_drift(law_, m, g_.box, drift);
    }
    double vmax = 0.0;
    for (int t = 0; t < 2; ++t) {
      perp_gradient_spectrum(
          g_,
          [&](double k2, std::size_t k) {
            const double iu = symbol::inverse_laplacian(k2), sb = symbol::screened(k2);
            return (law_.u[t][0] * iu + law_.b[t][0] * sb) * masked_[0][k] +
                   (law_.u[t][1] * iu + law_.b[t][1] * sb) * masked_[1][k];
          },
          tx_, ty_);
      plan.inverse_destroy(tx_.data(), vel_[t].x.data());
      plan.inverse_destroy(ty_.data(), vel_[t].y.data());
      add_uniform(vel_[t], drift[t]);
      gradient(masked_[t]);
      auto& prod = phys_.data;
      for (std::size_t k = 0; k < prod.size(); ++k) {
        const double vx = vel_[t].x[k], vy = vel_[t].y[k];
        prod[k] = -(vx * grad_.x[k] + vy * grad_.y[k]);
        vmax = std::max(vmax, vx * vx + vy * vy);
      }
      plan.forward(prod.data(), out[t].data());
      dealias(out[t], g_);
    }
    return std::sqrt(vmax);
  }

  const VectorField& velocity(int t) const { return vel_[t]; }

 private:
  void gradient(const Spectrum& fh) {
    const int n = g_.n;
    for (int i = 0; i < n; ++i) {
      const double ky = (i == n / 2) ? 0.0 : g_.wavenumber(i);
      for (int j = 0; j < nk_; ++j) {
        const double kx = (j == n / 2) ? 0.0 : g_.wavenumber(j);
        const auto k = static_cast<std::size_t>(i) * nk_ + j;
        tx_[k] = Complex(0.0, kx) * fh[k];
        ty_[k] = Complex(0.0, ky) * fh[k];
      }
    }
    const auto& plan = fft_plan(n);
    plan.inverse_destroy(tx_.data(), grad_.x.data());
    plan.inverse_destroy(ty_.data(), grad_.y.data());
  }

  TorusGrid g_;
  VelocityLaw law_;
  MeanFlow mean_;
  int nk_;
  Spectrum masked_[2], tx_, ty_;
  VectorField vel_[2], grad_;
  ScalarField phys_;
};

inline void check_finite(const ScalarPair& s, long step) {
  for (const auto* f : {&s.plus, &s.minus})
    for (double v : f->data)
      if (!std::isfinite(v))
        throw NumericAbort("non-finite value after step " + std::to_string(step) + " at t = " +
                           std::to_string(s.time));
}

}  // namespace detail

inline std::pair<ScalarField, ScalarField> rhs(const SolverState& state) {
  const auto& g = state.sigma.plus.grid;
  Spectrum hat[2] = {forward(state.sigma.plus), forward(state.sigma.minus)};
  Spectrum out[2] = {Spectrum(hat[0].size()), Spectrum(hat[0].size())};
  if (state.advection) {
    detail::Tendency tend(g, state.variant, state.mean_flow);
    tend(hat, out);
  }
  return {inverse(std::move(out[0]), g), inverse(std::move(out[1]), g)};
}

inline double max_speed(const SolverState& state) {
  if (!state.advection) return 0.0;
  auto [vp, vm] = compute_velocities(state.sigma, state.variant, state.mean_flow);
  double m = 0.0;
  for (const auto* v : {&vp, &vm})
    for (std::size_t k = 0; k < v->x.size(); ++k) m = std::max(m, std::hypot(v->x[k], v->y[k]));
  return m;
}

// Largest step allowed by the CFL bound at the current state.
inline double cfl_dt(const SolverState& state) {
  const double v = max_speed(state);
  const double h = state.sigma.plus.grid.spacing();
  return v > 0.0 ? cfl_number * h / v : std::numeric_limits<double>::infinity();
}

// Integrating-factor RK4: diffusion is exact through exp(-nu |k|^2 dt), the
// advective tendency goes through the classical four stages. When `tracers` is
// given they are advanced with the stage velocities of this same step.
inline SolverState step_rk4(const SolverState& state, double dt, TracerSet* tracers = nullptr) {
  if (!(dt > 0.0)) throw StepSizeError("step_rk4: dt must be > 0");
  validate(state);
  const auto& g = state.sigma.plus.grid;
  const int n = g.n, nk = n / 2 + 1;
  const std::size_t ns = static_cast<std::size_t>(n) * nk;
  const auto& plan = fft_plan(n);

  Spectrum u[2] = {forward(state.sigma.plus), forward(state.sigma.minus)};
  const double nu[2] = {state.nu_plus, state.nu_minus};
  std::vector<double> ehalf[2];
  for (int s = 0; s < 2; ++s) {
    ehalf[s].resize(ns);
    for (int i = 0; i < n; ++i) {
      const double ky = g.wavenumber(i);
      for (int j = 0; j < nk; ++j) {
        const double kx = g.wavenumber(j);
        ehalf[s][static_cast<std::size_t>(i) * nk + j] = std::exp(-nu[s] * (kx * kx + ky * ky) * 0.5 * dt);
      }
    }
  }

  SolverState next = state;
  next.step_count = state.step_count + 1;
  next.sigma.time = state.sigma.time + dt;

  if (!state.advection) {
    for (int s = 0; s < 2; ++s)
      for (std::size_t k = 0; k < ns; ++k) u[s][k] *= ehalf[s][k] * ehalf[s][k];
  } else {
    detail::Tendency tend(g, state.variant, state.mean_flow);
    Spectrum a[2], b[2], c[2], d[2], stage[2];
    for (int s = 0; s < 2; ++s) {
      a[s].resize(ns);
      b[s].resize(ns);
      c[s].resize(ns);
      d[s].resize(ns);
      stage[s].resize(ns);
    }
    const std::size_t nt = tracers ? tracers->labels.size() : 0;
    std::vector<Vec2> kt[2][4];
    auto tracer_stage = [&](int q, double frac) {
      if (!tracers) return;
      for (int s = 0; s < 2; ++s) {
        const auto& pos = s == 0 ? tracers->plus : tracers->minus;
        kt[s][q].resize(nt);
        for (std::size_t m = 0; m < nt; ++m) {
          Vec2 p = pos[m];
          if (q > 0) p = {p[0] + frac * dt * kt[s][q - 1][m][0], p[1] + frac * dt * kt[s][q - 1][m][1]};
          kt[s][q][m] = interpolate(tend.velocity(s), p);
        }
      }
    };

    const double vmax = tend(u, a);
    const double limit = cfl_number * g.spacing() / vmax;
    if (vmax > 0.0 && dt > limit * (1.0 + 1e-12))
      throw StepSizeError("step_rk4: dt = " + std::to_string(dt) + " exceeds CFL limit " + std::to_string(limit));
    tracer_stage(0, 0.0);
    for (int s = 0; s < 2; ++s)
      for (std::size_t k = 0; k < ns; ++k) {
        a[s][k] *= dt;
        stage[s][k] = ehalf[s][k] * (u[s][k] + 0.5 * a[s][k]);
      }
    tend(stage, b);
    tracer_stage(1, 0.5);
    for (int s = 0; s < 2; ++s)
      for (std::size_t k = 0; k < ns; ++k) {
        b[s][k] *= dt;
        stage[s][k] = ehalf[s][k] * u[s][k] + 0.5 * b[s][k];
      }
    tend(stage, c);
    tracer_stage(2, 0.5);
    for (int s = 0; s < 2; ++s)
      for (std::size_t k = 0; k < ns; ++k) {
        c[s][k] *= dt;
        const double e = ehalf[s][k];
        stage[s][k] = e * e * u[s][k] + e * c[s][k];
      }
    tend(stage, d);
    tracer_stage(3, 1.0);
    for (int s = 0; s < 2; ++s)
      for (std::size_t k = 0; k < ns; ++k) {
        const double e = ehalf[s][k];
        u[s][k] = e * e * u[s][k] + (e * e * a[s][k] + 2.0 * e * (b[s][k] + c[s][k]) + dt * d[s][k]) / 6.0;
      }
    if (tracers) {
      for (int s = 0; s < 2; ++s) {
        auto& pos = s == 0 ? tracers->plus : tracers->minus;
        for (std::size_t m = 0; m < nt; ++m)
          for (int q = 0; q < 2; ++q)
            pos[m][q] += dt / 6.0 * (kt[s][0][m][q] + 2.0 * kt[s][1][m][q] + 2.0 * kt[s][2][m][q] + kt[s][3][m][q]);
      }
      tracers->time += dt;
      tracers->wrap();
    }
  }
  plan.inverse_destroy(u[0].data(), next.sigma.plus.data.data());
  plan.inverse_destroy(u[1].data(), next.sigma.minus.data.data());
  detail::check_finite(next.sigma, next.step_count);
  return next;
}

using VelocitySampler = std::function<Vec2(const Vec2& x, double t)>;

// Classical RK4 for both tracer families under prescribed velocity fields.
inline void advect_tracers(TracerSet& tr, const VelocitySampler& plus, const VelocitySampler& minus, double dt) {
  const double t = tr.time;
  for (int s = 0; s < 2; ++s) {
    auto& pos = s == 0 ? tr.plus : tr.minus;
    const auto& vel = s == 0 ? plus : minus;
    for (auto& p : pos) {
      const Vec2 k1 = vel(p, t);
      const Vec2 k2 = vel({p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]}, t + 0.5 * dt);
      const Vec2 k3 = vel({p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]}, t + 0.5 * dt);
      const Vec2 k4 = vel({p[0] + dt * k3[0], p[1] + dt * k3[1]}, t + dt);
      for (int q = 0; q < 2; ++q) p[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
    }
  }
  tr.time = t + dt;
  tr.wrap();
}

// output(x) = tau(x / eps) on the same grid; tau must vanish near the box edge.
inline ScalarPair scale_initial_data(const ScalarPair& tau, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw ConfigError("init.params.eps: must lie in (0, 1]");
  const auto& g = tau.plus.grid;
  for (const auto* f : {&tau.plus, &tau.minus}) {
    const double theta = 1e-6 * max_abs(f->data);
    for (int i = 0; i < g.n; ++i)
      for (int e : {0, 1, g.n - 2, g.n - 1})
        if (std::abs((*f)(i, e)) > theta || std::abs((*f)(e, i)) > theta)
          throw ConfigError("init: support of the data to rescale reaches the box edge");
  }
  const double half = 0.5 * g.box;
  auto scaled = [&](const ScalarField& f) {
    return ScalarField::sample(g, [&](double x, double y) {
      const double sx = x / eps, sy = y / eps;
      if (std::abs(sx) >= half - g.spacing() || std::abs(sy) >= half - g.spacing()) return 0.0;
      return interpolate(f, {sx, sy});
    });
  };
  return {scaled(tau.plus), scaled(tau.minus), tau.time};
}

}  // namespace reconnect2d
