#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "io.hpp"

namespace reconnect2d {

inline constexpr const char* code_version = "0.1.0";

struct RunSummary {
  std::string status = "complete";  // or "partial"
  std::string stop_reason = "t_end";
  double t_final = 0.0;
  long steps = 0;
  int outputs = 0;
  json drifts = json::object();
  std::optional<double> first_overlap;
  std::optional<double> component_change;
  json results = json::object();
  double wall_seconds = 0.0;
  std::optional<ScalarPair> final_state;  // Eulerian runs only
};

namespace detail {

inline std::string snap_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%05d", k);
  return buf;
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Output times k * every, closing with t_end.
inline std::vector<double> output_times(double t_end, double every) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor(t_end / every * (1.0 + 1e-12)));
  for (long k = 1; k <= count; ++k) out.push_back(std::min(t_end, static_cast<double>(k) * every));
  if (out.empty() ? t_end > 0.0 : out.back() < t_end * (1.0 - 1e-12)) out.push_back(t_end);
  return out;
}

inline void clear_run_dir(const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("snap_", 0) == 0 || name == "abort")
      fs::remove_all(e.path());
    else if (name == "manifest.json" || name == "RUNNING" || name == "snapshots.csv" || name == "diagnostics.csv" ||
             name == "contour_diagnostics.csv" || name == "trajectory.csv")
      fs::remove(e.path());
  }
}

inline void write_eulerian_snapshot(const fs::path& dir, const ScalarPair& s) {
  write_snapshot(dir / "sigma_plus.r2df", s.plus, s.time);
  write_snapshot(dir / "sigma_minus.r2df", s.minus, s.time);
  write_snapshot(dir / "F.r2df", canonical_momentum(s), s.time);
}

inline void write_contour_snapshot(const fs::path& dir, const ContourPairState& s) {
  write_contour_csv(dir / "plus.csv", s.plus);
  write_contour_csv(dir / "minus.csv", s.minus);
}

class SnapshotIndex {
 public:
  explicit SnapshotIndex(const fs::path& dir) : dir_(dir), out_(dir / "snapshots.csv", std::ios::trunc) {
    out_ << "index,t\n";
  }
  fs::path next(double t) {
    out_ << count_ << "," << exact(t) << "\n";
    out_.flush();
    last_ = t;
    return dir_ / snap_name(count_++);
  }
  int count() const { return count_; }
  double last_time() const { return last_; }

 private:
  fs::path dir_;
  std::ofstream out_;
  int count_ = 0;
  double last_ = 0.0;
};

inline json checklist_json(const Checklist& checks) {
  json out = json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

inline void norm_drifts(const std::vector<DiagnosticsRecord>& h, json& out) {
  auto drift = [&](double DiagnosticsRecord::*f) {
    const double ref = h.front().*f;
    double m = 0.0;
    if (ref == 0.0) return m;
    for (const auto& r : h) m = std::max(m, std::abs(r.*f / ref - 1.0));
    return m;
  };
  out = {{"l1_plus", drift(&DiagnosticsRecord::l1_plus)},     {"l2_plus", drift(&DiagnosticsRecord::l2_plus)},
         {"linf_plus", drift(&DiagnosticsRecord::linf_plus)}, {"l1_minus", drift(&DiagnosticsRecord::l1_minus)},
         {"l2_minus", drift(&DiagnosticsRecord::l2_minus)},   {"linf_minus", drift(&DiagnosticsRecord::linf_minus)}};
}

inline void run_eulerian(const EulerianScenario& sc, const fs::path& dir, RunSummary& sum) {
  SolverState s = sc.initial;
  s.sigma.time = 0.0;
  Stepper stepper(sc.dt);
  DiagnosticsWriter diag(dir / "diagnostics.csv");
  SnapshotIndex index(dir);
  std::vector<DiagnosticsRecord> hist;
  auto emit = [&] {
    const auto r = diagnose(s.sigma);
    diag.add(r);
    hist.push_back(r);
    write_eulerian_snapshot(index.next(s.sigma.time), s.sigma);
    if (!sum.first_overlap && r.overlap > 0.0) sum.first_overlap = r.t;
    if (!sum.component_change && r.components_F != hist.front().components_F) sum.component_change = r.t;
  };
  emit();
  try {
    for (double target : output_times(sc.t_end, sc.output_every)) {
      stepper.advance(s, target);
      emit();
    }
  } catch (const NumericAbort& e) {
    sum.status = "partial";
    sum.stop_reason = std::string("numeric abort: ") + e.what();
    write_eulerian_snapshot(dir / "abort", s.sigma);
  }
  sum.t_final = s.sigma.time;
  sum.steps = stepper.steps();
  sum.outputs = index.count();
  norm_drifts(hist, sum.drifts);
  sum.results = {{"components_F_initial", hist.front().components_F},
                 {"components_F_final", hist.back().components_F},
                 {"max_symmetry_defect", std::max_element(hist.begin(), hist.end(), [](auto& a, auto& b) {
                                           return a.symmetry_defect < b.symmetry_defect;
                                         })->symmetry_defect}};
  sum.final_state = s.sigma;
}

inline void run_patch_merger(const ContourScenario& sc, const fs::path& dir, RunSummary& sum) {
  SnapshotIndex index(dir);
  const auto times = output_times(sc.t_end, sc.output_every);
  std::size_t next = 0;
  write_contour_snapshot(index.next(0.0), sc.initial);
  long steps = 0;
  ContourPairState last = sc.initial;
  const auto st = patch_merger_run(sc, [&](const ContourPairState& c) {
    ++steps;
    last = c;
    if (next < times.size() && c.time >= times[next] - 1e-12) {
      write_contour_snapshot(index.next(c.time), c);
      while (next < times.size() && c.time >= times[next] - 1e-12) ++next;
    }
  });
  if (last.time != index.last_time()) write_contour_snapshot(index.next(last.time), last);
  std::ofstream csv(dir / "contour_diagnostics.csv", std::ios::trunc);
  csv << "t,overlap_area,sup_zeta,sup_slope\n";
  for (std::size_t i = 0; i < st.t.size(); ++i)
    csv << exact(st.t[i]) << "," << exact(st.overlap_area[i]) << "," << exact(st.sup_zeta[i]) << ","
        << exact(st.sup_slope[i]) << "\n";
  sum.t_final = st.t_stop;
  sum.steps = steps;
  sum.outputs = index.count();
  sum.stop_reason = st.stop_reason;
  sum.first_overlap = st.first_touch;
  const double horizon = 9.0 * std::numbers::pi / 4.0;
  sum.results = {{"first_touch", opt_json(st.first_touch)},
                 {"first_touch_inside_horizon", st.first_touch && *st.first_touch > 0.0 && *st.first_touch < horizon},
                 {"disjoint_at_start", st.disjoint_at_start},
                 {"background_first_touch", opt_json(st.background.first)},
                 {"background_separation", opt_json(st.background.last)},
                 {"background_disjoint_at_horizon", st.background_disjoint_at_end},
                 {"horizon", horizon},
                 {"max_sup_zeta", st.max_sup_zeta},
                 {"sup_zeta_bound", 0.1}};
}

inline void run_contour(const ContourScenario& sc, const fs::path& dir, RunSummary& sum) {
  SnapshotIndex index(dir);
  ContourPairState s = sc.initial;
  s.time = 0.0;
  std::ofstream csv(dir / "contour_diagnostics.csv", std::ios::trunc);
  csv << "t,area_plus,area_minus,overlap_area,fit_angle,fit_residual\n";
  std::vector<double> ts, angles;
  const double area0 = shoelace_area(s.plus.nodes);
  double area_drift = 0.0;
  auto emit = [&] {
    write_contour_snapshot(index.next(s.time), s);
    const auto fit = fit_ellipse(s.plus.nodes);
    double a = fit.angle;
    if (!angles.empty()) a += std::numbers::pi * std::round((angles.back() - a) / std::numbers::pi);
    ts.push_back(s.time);
    angles.push_back(a);
    const double ap = shoelace_area(s.plus.nodes);
    area_drift = std::max(area_drift, std::abs(ap / area0 - 1.0));
    const auto ov = contours_overlap(s.plus, s.minus);
    csv << exact(s.time) << "," << exact(ap) << "," << exact(shoelace_area(s.minus.nodes)) << "," << exact(ov.area)
        << "," << exact(a) << "," << exact(fit.residual(s.plus.nodes) / s.R) << "\n";
    csv.flush();
    if (!sum.first_overlap && ov.overlap) sum.first_overlap = s.time;
  };
  emit();
  long steps = 0;
  try {
    for (double target : output_times(sc.t_end, sc.output_every)) {
      while (s.time < target - 1e-12) {
        s = contour_step(s, sc.mode, sc.dt, target - s.time);
        ++steps;
      }
      s.time = target;
      emit();
    }
  } catch (const GeometryError& e) {
    sum.stop_reason = std::string("geometry: ") + e.what();
    write_contour_snapshot(dir / "abort", s);
  }
  sum.t_final = s.time;
  sum.steps = steps;
  sum.outputs = index.count();
  sum.drifts = {{"area_plus", area_drift}};
  json res = {{"area_drift", area_drift}};
  if (ts.size() >= 2 && ts.back() > ts.front()) {
    res["fit_angular_velocity"] = (angles.back() - angles.front()) / (ts.back() - ts.front());
    if (sc.preset == "kirchhoff_ellipse") {
      const double a = sc.params.at("a"), b = sc.params.at("b");
      res["classical_rate"] = -a * b / ((a + b) * (a + b));
      res["reported_rate"] = KirchhoffStudy::paper_rate;
    }
  }
  sum.results = res;
}

inline void run_point_vortex(const PointVortexScenario& sc, const fs::path& dir, RunSummary& sum) {
  const auto tr = pv_integrate(sc.initial, sc.dt, sc.t_end);
  std::ofstream csv(dir / "trajectory.csv", std::ios::trunc);
  csv << "t,x,y\n";
  const double ratio0 = sc.initial.y / sc.initial.x;
  double ratio_drift = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    csv << exact(tr.t[i]) << "," << exact(tr.x[i]) << "," << exact(tr.y[i]) << "\n";
    ratio_drift = std::max(ratio_drift, std::abs(tr.y[i] / tr.x[i] - ratio0));
  }
  sum.t_final = tr.t.back();
  sum.steps = static_cast<long>(tr.t.size()) - 1;
  sum.outputs = 1;
  sum.first_overlap = tr.merger_time;
  if (tr.merger_time) sum.stop_reason = "merger";
  sum.drifts = {{"ratio_y_over_x", ratio_drift}};
  json res = {{"predicted_merger_time", sc.predicted_merger}, {"measured_merger_time", opt_json(tr.merger_time)}};
  if (tr.merger_time) res["relative_error"] = std::abs(*tr.merger_time / sc.predicted_merger - 1.0);
  sum.results = res;
}

}  // namespace detail

inline json manifest_json(const RunConfig& rc, const RunSummary& s) {
  json m = {{"status", s.status},
            {"code_version", code_version},
            {"engine", to_string(rc.engine)},
            {"scenario", rc.echo},
            {"wall_seconds", s.wall_seconds},
            {"t_final", s.t_final},
            {"steps", s.steps},
            {"outputs", s.outputs},
            {"stop_reason", s.stop_reason},
            {"drifts", s.drifts},
            {"events",
             {{"first_overlap", detail::opt_json(s.first_overlap)},
              {"component_change", detail::opt_json(s.component_change)}}},
            {"results", s.results}};
  if (rc.eulerian) {
    m["resolution"] = {{"n", rc.eulerian->initial.sigma.plus.grid.n}, {"box", rc.eulerian->initial.sigma.plus.grid.box}};
    m["checks"] = detail::checklist_json(rc.eulerian->checks);
  } else if (rc.contour) {
    m["resolution"] = {{"nodes", rc.contour->initial.plus.size()}};
    m["checks"] = detail::checklist_json(rc.contour->checks);
  } else {
    m["resolution"] = {{"dt", rc.point_vortex->dt}};
    m["checks"] = json::array();
  }
  return m;
}

// Runs one scenario into `dir` (the config's out.dir when empty). A RUNNING
// marker exists for the duration; the manifest is written once at the end, with
// status "partial" when the run stopped on a numeric abort.
inline RunSummary run_simulation(const RunConfig& rc, fs::path dir = {}) {
  if (dir.empty()) dir = rc.out_dir;
  detail::clear_run_dir(dir);
  detail::write_file(dir / "RUNNING", "");
  const auto start = std::chrono::steady_clock::now();
  RunSummary sum;
  std::exception_ptr failure;
  try {
    switch (rc.engine) {
      case Engine::Eulerian: detail::run_eulerian(*rc.eulerian, dir, sum); break;
      case Engine::Contour:
        if (rc.contour->preset == "left_patch_merger")
          detail::run_patch_merger(*rc.contour, dir, sum);
        else
          detail::run_contour(*rc.contour, dir, sum);
        break;
      case Engine::PointVortex: detail::run_point_vortex(*rc.point_vortex, dir, sum); break;
    }
  } catch (const std::exception& e) {
    sum.status = "partial";
    sum.stop_reason = e.what();
    failure = std::current_exception();
  }
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail::write_file(dir / "manifest.json", manifest_json(rc, sum).dump(2) + "\n");
  fs::remove(dir / "RUNNING");
  if (failure) std::rethrow_exception(failure);
  return sum;
}

// Rebuilds CSV summaries and PGM images from the snapshots of a run directory.
// Returns the number of snapshots processed.
inline int regenerate_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("--dir: not a directory: " + dir.string());
  std::vector<fs::path> snaps;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().rfind("snap_", 0) == 0) snaps.push_back(e.path());
  std::sort(snaps.begin(), snaps.end());
  std::vector<double> times;
  if (fs::exists(dir / "snapshots.csv")) {
    std::ifstream in(dir / "snapshots.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) times.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  std::optional<DiagnosticsWriter> diag;
  std::optional<std::ofstream> contour_csv;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const auto& s = snaps[k];
    if (fs::exists(s / "sigma_plus.r2df") && fs::exists(s / "sigma_minus.r2df")) {
      auto p = read_snapshot(s / "sigma_plus.r2df");
      auto m = read_snapshot(s / "sigma_minus.r2df");
      ScalarPair pair{std::move(p.field), std::move(m.field), p.t};
      if (!diag) diag.emplace(dir / "diagnostics.csv");
      diag->add(diagnose(pair));
      write_pgm(s / "F.pgm", heatmap(canonical_momentum(pair)));
    } else if (fs::exists(s / "F.r2df")) {
      write_pgm(s / "F.pgm", heatmap(read_snapshot(s / "F.r2df").field));
    }
    if (fs::exists(s / "plus.csv") && fs::exists(s / "minus.csv")) {
      const auto plus = read_contour_csv(s / "plus.csv", 1);
      const auto minus = read_contour_csv(s / "minus.csv", 1);
      write_pgm(s / "overlay.pgm", contour_overlay(plus, minus));
      if (!contour_csv) {
        contour_csv.emplace(dir / "contour_summary.csv", std::ios::trunc);
        *contour_csv << "t,area_plus,area_minus,overlap_area\n";
      }
      const double t = k < times.size() ? times[k] : std::nan("");
      *contour_csv << detail::exact(t) << "," << detail::exact(shoelace_area(plus.nodes)) << ","
                   << detail::exact(shoelace_area(minus.nodes)) << ","
                   << detail::exact(contours_overlap(plus, minus).area) << "\n";
    }
  }
  return static_cast<int>(snaps.size());
}

// Runs jobs on at most `workers` threads. The first exception is rethrown
// after all workers finish.
template <class Fn>
inline void parallel_for(std::size_t count, int workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < std::min(n, count); ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

struct SweepRow {
  double value = 0.0;
  double metric = 0.0;
};

struct SweepResult {
  std::string param;
  std::string fit_label;  // "order" for nu, "slope" for eps
  std::vector<SweepRow> rows;
  double fit = 0.0;
};

namespace detail {

inline double max_species_gap(const ScalarPair& a, const ScalarPair& b, double p) {
  double g = 0.0;
  for (int q = 0; q < 2; ++q) {
    const auto& fa = q == 0 ? a.plus : a.minus;
    const auto& fb = q == 0 ? b.plus : b.minus;
    ScalarField d(fa.grid);
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = fa.data[i] - fb.data[i];
    g = std::max(g, lp_norm(d, p));
  }
  return g;
}

inline std::string value_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

inline constexpr double sweep_gap_exponent = 1.5;

// nu: one run per value plus an ideal reference, all on a shared fixed step;
// metric is the L2 gap to the reference at t_end, fitted "order".
// eps: screened and unscreened runs of the eps-scaled merger data for each
// value, box scaled with eps; metric is the L^{3/2} gap at t_end, fitted "slope".
inline SweepResult run_sweep(const json& base, const std::string& param, const std::vector<double>& values,
                             const fs::path& out_dir, int workers) {
  if (param != "nu" && param != "eps") throw ConfigError("--param: must be nu or eps");
  if (values.size() < 2) throw ConfigError("--values: need at least two values");
  const RunConfig probe = parse_config(base);
  std::vector<json> docs;
  std::vector<fs::path> dirs;
  SweepResult res;
  res.param = param;
  if (param == "nu") {
    if (probe.engine != Engine::Eulerian) throw ConfigError("init.preset: nu sweep needs an Eulerian preset");
    for (double v : values)
      if (!(v > 0.0)) throw ConfigError("--values: nu must be > 0");
    json doc = base;
    if (!(probe.eulerian->dt > 0.0)) {
      SolverState ref = probe.eulerian->initial;
      ref.nu_plus = ref.nu_minus = 0.0;
      doc["time"]["dt"] = 0.5 * cfl_dt(ref);
    }
    auto with_nu = [&](double nu) {
      json d = doc;
      d["model"]["nu_plus"] = nu;
      d["model"]["nu_minus"] = nu;
      return d;
    };
    docs.push_back(with_nu(0.0));
    dirs.push_back(out_dir / "nu_ref");
    for (double v : values) {
      docs.push_back(with_nu(v));
      dirs.push_back(out_dir / ("nu_" + detail::value_tag(v)));
    }
    res.fit_label = "order";
  } else {
    if (probe.eulerian ? probe.eulerian->preset != "right_smooth_merger_screened" : true)
      throw ConfigError("init.preset: eps sweep needs right_smooth_merger_screened");
    const double box1 = base.contains("grid") && base["grid"].contains("box")
                            ? base["grid"]["box"].get<double>()
                            : default_merger_box(SmoothMergerParams{});
    for (double v : values) {
      if (!(v > 0.0) || v > 1.0) throw ConfigError("--values: eps must lie in (0, 1]");
      for (bool screened : {true, false}) {
        json d = base;
        d["init"]["params"]["eps"] = v;
        d["grid"]["box"] = box1 * v;
        d["model"]["screened"] = screened;
        docs.push_back(d);
        dirs.push_back(out_dir / ("eps_" + detail::value_tag(v) + (screened ? "_screened" : "_unscreened")));
      }
    }
    res.fit_label = "slope";
  }
  std::vector<RunConfig> configs;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    docs[i]["out"]["dir"] = dirs[i].string();
    configs.push_back(parse_config(docs[i]));
  }
  std::vector<ScalarPair> finals(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    finals[i] = *run_simulation(configs[i], dirs[i]).final_state;
  });
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double m = param == "nu" ? detail::max_species_gap(finals[k + 1], finals[0], 2.0)
                                   : detail::max_species_gap(finals[2 * k], finals[2 * k + 1], sweep_gap_exponent);
    res.rows.push_back({values[k], m});
    xs.push_back(values[k]);
    ys.push_back(m);
  }
  res.fit = loglog_slope(xs, ys);
  std::string table = "value,metric\n";
  for (const auto& r : res.rows) table += detail::exact(r.value) + "," + detail::exact(r.metric) + "\n";
  table += res.fit_label + "=" + detail::exact(res.fit) + "\n";
  detail::write_file(out_dir / "summary.csv", table);
  return res;
}

}  // namespace reconnect2d
