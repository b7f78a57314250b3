#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "scenario.hpp"

namespace reconnect2d {

using json = nlohmann::json;

enum class Engine { Eulerian, Contour, PointVortex };

inline std::string to_string(Engine e) {
  switch (e) {
    case Engine::Eulerian: return "eulerian";
    case Engine::Contour: return "contour";
    case Engine::PointVortex: return "point_vortex";
  }
  return "?";
}

// A parsed run: exactly one of the scenario slots is filled. `echo` is the
// input with every default made explicit.
struct RunConfig {
  Engine engine = Engine::Eulerian;
  std::optional<EulerianScenario> eulerian;
  std::optional<ContourScenario> contour;
  std::optional<PointVortexScenario> point_vortex;
  std::filesystem::path out_dir;
  json echo;
};

inline constexpr int default_grid_n = 256;
inline constexpr int default_contour_nodes = 512;
inline constexpr int default_output_count = 10;

namespace detail {

// Reads keys of one JSON object, remembering which were consumed so the rest
// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : path_(std::move(path)) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError(path_ + ": must be an object");
    obj_ = j;
  }

  bool has(const std::string& k) const { return obj_ && obj_->contains(k); }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return obj_->at(k);
  }

  std::optional<double> number(const std::string& k) {
    if (!has(k)) return std::nullopt;
    const auto& v = raw(k);
    if (!v.is_number()) throw ConfigError(key(k) + ": must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key(k) + ": must be finite");
    return x;
  }
  double number(const std::string& k, double fallback) { return number(k).value_or(fallback); }

  std::optional<int> integer(const std::string& k) {
    if (!has(k)) return std::nullopt;
    const auto& v = raw(k);
    if (!v.is_number_integer()) throw ConfigError(key(k) + ": must be an integer");
    return v.get<int>();
  }

  std::optional<bool> boolean(const std::string& k) {
    if (!has(k)) return std::nullopt;
    const auto& v = raw(k);
    if (!v.is_boolean()) throw ConfigError(key(k) + ": must be true or false");
    return v.get<bool>();
  }

  std::optional<std::string> text(const std::string& k) {
    if (!has(k)) return std::nullopt;
    const auto& v = raw(k);
    if (!v.is_string()) throw ConfigError(key(k) + ": must be a string");
    return v.get<std::string>();
  }

  json sub(const std::string& k) {
    if (!has(k)) return json();
    return raw(k);
  }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()) + ": unknown key");
  }

 private:
  std::optional<json> obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline double nonneg(Section& s, const std::string& k) {
  const double v = s.number(k, 0.0);
  if (!(v >= 0.0)) throw ConfigError(s.key(k) + ": must be >= 0");
  return v;
}

inline void require_merger_fit(const TorusGrid& g, const SmoothMergerParams& p) {
  const double reach = (2.0 * p.scale + merger_bump_radius) * p.eps;
  if (reach >= 0.5 * g.box)
    throw ConfigError("grid.box: data support reaches " + std::to_string(reach) + " but the half box is " +
                      std::to_string(0.5 * g.box));
}

}  // namespace detail

// Validates and expands a config document. Errors carry the offending key path.
inline RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  detail::Section top(doc, "");
  detail::Section model(top.sub("model"), "model");
  const json grid_j = top.sub("grid"), contour_j = top.sub("contour");
  detail::Section time(top.sub("time"), "time");
  detail::Section init(top.sub("init"), "init");
  detail::Section out(top.sub("out"), "out");
  top.finish();

  const auto preset = init.text("preset");
  if (!preset) throw ConfigError("init.preset: required");
  detail::Section params(init.sub("params"), "init.params");
  init.finish();

  const std::string hand = model.text("handedness").value_or(*preset == "right_smooth_merger" ||
                                                                     *preset == "right_smooth_merger_screened" ||
                                                                     *preset == "point_vortex"
                                                                 ? "right"
                                                                 : "left");
  if (hand != "right" && hand != "left") throw ConfigError("model.handedness: must be \"right\" or \"left\", got \"" + hand + "\"");
  const auto screened_opt = model.boolean("screened");
  const double nu_plus = detail::nonneg(model, "nu_plus");
  const double nu_minus = detail::nonneg(model, "nu_minus");
  model.finish();

  auto require_hand = [&](const char* want) {
    if (hand != want) throw ConfigError("model.handedness: preset " + *preset + " requires \"" + want + "\"");
  };
  auto require_inviscid = [&] {
    if (nu_plus != 0.0 || nu_minus != 0.0)
      throw ConfigError(std::string(nu_plus != 0.0 ? "model.nu_plus" : "model.nu_minus") +
                        ": preset " + *preset + " is inviscid, must be 0");
  };

  const double dt = time.number("dt", 0.0);
  if (!(dt >= 0.0)) throw ConfigError("time.dt: must be >= 0");
  const auto t_end_opt = time.number("t_end");
  const auto every_opt = time.number("output_every");
  time.finish();
  if (t_end_opt && !(*t_end_opt >= 0.0)) throw ConfigError("time.t_end: must be >= 0");
  if (every_opt && !(*every_opt > 0.0)) throw ConfigError("time.output_every: must be > 0");

  RunConfig rc;
  json echo_params = json::object();
  json echo_model = {{"handedness", hand}, {"nu_plus", nu_plus}, {"nu_minus", nu_minus}};
  json echo_res;
  std::string res_key;
  double t_end = 0.0;
  double pv_dt = dt;

  const bool eulerian = *preset == "right_smooth_merger" || *preset == "right_smooth_merger_screened" ||
                        *preset == "left_patch_smooth";
  if (eulerian) {
    if (!contour_j.is_null()) throw ConfigError("contour: not used by preset " + *preset);
    detail::Section grid(grid_j, "grid");
    const int n = grid.integer("n").value_or(default_grid_n);
    const auto box_opt = grid.number("box");
    grid.finish();
    EulerianScenario sc;
    if (*preset == "left_patch_smooth") {
      require_hand("left");
      SmoothPatchParams p;
      p.R = params.number("R", p.R);
      p.d = params.number("d", 0.5 * p.R);
      p.width = params.number("width", p.width);
      params.finish();
      const bool screened = screened_opt.value_or(true);
      // Five disk diameters keep the step edge about five cells wide at n = 256.
      const double box = box_opt.value_or(10.0 * p.R);
      sc = left_patch_smooth(make_grid(n, box), p, screened ? Screening::Screened : Screening::Unscreened);
      echo_model["screened"] = screened;
      echo_res = {{"n", n}, {"box", box}};
    } else {
      require_hand("right");
      SmoothMergerParams p;
      p.scale = params.number("scale", p.scale);
      p.amplitude = params.number("amplitude", p.amplitude);
      p.width = params.number("width", p.width);
      p.cap = params.number("cap", p.cap);
      if (!(p.scale > 0.0)) throw ConfigError("init.params.scale: must be > 0");
      if (!(p.amplitude > 0.0)) throw ConfigError("init.params.amplitude: must be > 0");
      bool screened = false;
      if (*preset == "right_smooth_merger_screened") {
        // Unscreened here means the eps-scaled data under the unscreened law.
        p.eps = params.number("eps", 0.125);
        screened = screened_opt.value_or(true);
      } else {
        screened = screened_opt.value_or(false);
      }
      params.finish();
      const double box = box_opt.value_or(default_merger_box(p));
      const auto g = make_grid(n, box);
      if (*preset == "right_smooth_merger_screened") {
        if (!(p.eps > 0.0) || p.eps > 1.0) throw ConfigError("init.params.eps: must lie in (0, 1]");
        detail::require_merger_fit(g, p);
        sc = right_smooth_merger_screened(g, p.eps, p);
        if (!screened) sc.initial.variant.screening = Screening::Unscreened;
      } else {
        detail::require_merger_fit(g, p);
        sc = right_smooth_merger(g, p);
        if (screened) sc.initial.variant.screening = Screening::Screened;
      }
      echo_model["screened"] = screened;
      echo_res = {{"n", n}, {"box", box}};
    }
    sc.initial.nu_plus = nu_plus;
    sc.initial.nu_minus = nu_minus;
    validate(sc.initial);
    sc.dt = dt;
    t_end = t_end_opt.value_or(1.0);
    res_key = "grid";
    rc.engine = Engine::Eulerian;
    for (const auto& [k, v] : sc.params) echo_params[k] = v;
    rc.eulerian = std::move(sc);
  } else if (*preset == "left_patch_merger" || *preset == "kirchhoff_ellipse") {
    if (!grid_j.is_null()) throw ConfigError("grid: not used by preset " + *preset);
    require_hand("left");
    require_inviscid();
    detail::Section contour(contour_j, "contour");
    const int m = contour.integer("nodes").value_or(default_contour_nodes);
    contour.finish();
    if (m < min_contour_nodes) throw ConfigError("contour.nodes: must be >= " + std::to_string(min_contour_nodes));
    ContourScenario sc;
    bool screened;
    if (*preset == "left_patch_merger") {
      const double R = params.number("R", 0.05);
      const double d = params.number("d", 0.5 * R);
      const double max_R = params.number("max_R", 0.1);
      params.finish();
      sc = left_patch_merger(R, d, m, max_R);
      screened = screened_opt.value_or(true);
    } else {
      const double a = params.number("a", 2.0), b = params.number("b", 1.0);
      params.finish();
      sc = kirchhoff_ellipse(a, b, m);
      screened = screened_opt.value_or(false);
    }
    sc.mode = screened ? ContourMode::ScreenedLeft : ContourMode::UnscreenedEuler;
    sc.dt = dt;
    t_end = t_end_opt.value_or(sc.t_end);
    echo_model["screened"] = screened;
    echo_res = {{"nodes", m}};
    res_key = "contour";
    rc.engine = Engine::Contour;
    for (const auto& [k, v] : sc.params) echo_params[k] = v;
    rc.contour = std::move(sc);
  } else if (*preset == "point_vortex") {
    if (!grid_j.is_null() || !contour_j.is_null())
      throw ConfigError(std::string(grid_j.is_null() ? "contour" : "grid") + ": not used by preset point_vortex");
    require_hand("right");
    require_inviscid();
    if (screened_opt && *screened_opt) throw ConfigError("model.screened: point_vortex is unscreened");
    const double x0 = params.number("x0", -1.0), y0 = params.number("y0", 1.0);
    params.finish();
    auto sc = dt > 0.0 ? point_vortex_preset(x0, y0, dt) : point_vortex_preset(x0, y0);
    pv_dt = sc.dt;
    t_end = t_end_opt.value_or(sc.t_end);
    echo_model["screened"] = false;
    echo_params = {{"x0", x0}, {"y0", y0}};
    rc.engine = Engine::PointVortex;
    sc.t_end = t_end;
    rc.point_vortex = sc;
  } else {
    throw ConfigError("init.preset: unknown preset \"" + *preset + "\"");
  }

  const double every = every_opt.value_or(t_end > 0.0 ? t_end / default_output_count : 1.0);
  if (rc.eulerian) {
    rc.eulerian->t_end = t_end;
    rc.eulerian->output_every = every;
  }
  if (rc.contour) {
    rc.contour->t_end = t_end;
    rc.contour->output_every = every;
  }

  const std::string dir = out.text("dir").value_or("run_" + *preset);
  out.finish();
  rc.out_dir = dir;

  rc.echo = {{"model", echo_model},
             {"time", {{"dt", pv_dt}, {"t_end", t_end}, {"output_every", every}}},
             {"init", {{"preset", *preset}, {"params", echo_params}}},
             {"out", {{"dir", dir}}}};
  if (!res_key.empty()) rc.echo[res_key] = echo_res;
  return rc;
}

inline json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline RunConfig parse_config(const std::filesystem::path& path) { return parse_config(load_json(path)); }

}  // namespace reconnect2d
