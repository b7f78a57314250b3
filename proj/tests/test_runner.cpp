#include <gtest/gtest.h>

#include <atomic>

#include "reconnect2d/runner.hpp"

using namespace reconnect2d;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("reconnect2d_run_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) { return detail::read_file(p); }

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

RunConfig small_merger(double t_end, double every) {
  json doc = {{"init", {{"preset", "right_smooth_merger"}}},
              {"grid", {{"n", 256}}},
              {"time", {{"t_end", t_end}, {"output_every", every}}}};
  return parse_config(doc);
}

int count_snapshots(const fs::path& dir) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().rfind("snap_", 0) == 0;
  return n;
}

}  // namespace

TEST(OutputTimes, Cadence) {
  EXPECT_EQ(detail::output_times(1.0, 0.5), (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(detail::output_times(1.0, 0.3).size(), 4u);
  EXPECT_EQ(detail::output_times(1.0, 0.3).back(), 1.0);
  EXPECT_TRUE(detail::output_times(0.0, 0.1).empty());
  EXPECT_EQ(detail::output_times(0.05, 0.1), (std::vector<double>{0.05}));
}

TEST(RunSimulation, ZeroHorizonWritesInitialDiagnosticsOnly) {
  const auto dir = scratch("zero");
  const auto s = run_simulation(small_merger(0.0, 0.1), dir);
  EXPECT_EQ(s.status, "complete");
  EXPECT_EQ(s.steps, 0);
  EXPECT_EQ(read_diagnostics_csv(dir / "diagnostics.csv").size(), 1u);
  EXPECT_EQ(count_snapshots(dir), 1);
  EXPECT_TRUE(fs::exists(dir / "snap_00000" / "F.r2df"));
}

TEST(RunSimulation, ManifestSnapshotsAndDeterminism) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto rc = small_merger(0.2, 0.1);
  const auto s = run_simulation(rc, a);
  run_simulation(rc, b);
  EXPECT_FALSE(fs::exists(a / "RUNNING"));
  const auto m = manifest(a);
  EXPECT_EQ(m["status"], "complete");
  EXPECT_EQ(m["code_version"], code_version);
  EXPECT_EQ(m["scenario"], rc.echo);
  EXPECT_EQ(m["resolution"]["n"], 256);
  EXPECT_EQ(m["checks"].size(), 4u);
  EXPECT_TRUE(m["events"].contains("first_overlap"));
  EXPECT_TRUE(m["events"].contains("component_change"));
  EXPECT_LT(m["drifts"]["l2_plus"].get<double>(), 1e-3);
  EXPECT_EQ(s.outputs, 3);
  const auto rows = read_diagnostics_csv(a / "diagnostics.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.back().t, 0.2);
  const auto snap = read_snapshot(a / "snap_00002" / "sigma_plus.r2df");
  EXPECT_EQ(snap.t, 0.2);
  EXPECT_EQ(snap.field.data, s.final_state->plus.data);
  for (const char* f : {"diagnostics.csv", "snapshots.csv", "snap_00002/sigma_plus.r2df", "snap_00002/sigma_minus.r2df",
                        "snap_00002/F.r2df"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(RunSimulation, RerunReplacesPreviousArtifacts) {
  const auto dir = scratch("rerun");
  run_simulation(small_merger(0.2, 0.05), dir);
  EXPECT_EQ(count_snapshots(dir), 5);
  run_simulation(small_merger(0.1, 0.1), dir);
  EXPECT_EQ(count_snapshots(dir), 2);
  int manifests = 0;
  for (const auto& e : fs::directory_iterator(dir)) manifests += e.path().filename() == "manifest.json";
  EXPECT_EQ(manifests, 1);
}

TEST(RunSimulation, NanAbortMarksPartialAndDumpsLastGoodState) {
  const auto dir = scratch("nan");
  auto rc = small_merger(0.2, 0.1);
  rc.eulerian->dt = 1e-3;
  rc.eulerian->initial.sigma.plus.data[0] = std::nan("");
  const auto s = run_simulation(rc, dir);
  EXPECT_EQ(s.status, "partial");
  EXPECT_NE(s.stop_reason.find("numeric abort"), std::string::npos);
  EXPECT_EQ(manifest(dir)["status"], "partial");
  EXPECT_TRUE(fs::exists(dir / "abort" / "sigma_plus.r2df"));
  EXPECT_FALSE(fs::exists(dir / "RUNNING"));
}

TEST(RunSimulation, PointVortexTrajectoryAndMergerTime) {
  const auto dir = scratch("pv");
  const auto s = run_simulation(parse_config(json::parse(R"({"init": {"preset": "point_vortex"}})")), dir);
  EXPECT_EQ(slurp(dir / "trajectory.csv").substr(0, 6), "t,x,y\n");
  const auto m = manifest(dir);
  EXPECT_NEAR(m["results"]["predicted_merger_time"].get<double>(), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_LT(m["results"]["relative_error"].get<double>(), 0.01);
  EXPECT_LT(m["drifts"]["ratio_y_over_x"].get<double>(), 1e-8);
  EXPECT_EQ(s.stop_reason, "merger");
}

TEST(RunSimulation, ContourRunAndReport) {
  const auto dir = scratch("kirchhoff");
  const auto rc = parse_config(json::parse(
      R"({"init": {"preset": "kirchhoff_ellipse"}, "contour": {"nodes": 64}, "time": {"t_end": 2, "output_every": 1}})"));
  const auto s = run_simulation(rc, dir);
  EXPECT_EQ(s.outputs, 3);
  EXPECT_NEAR(s.results["fit_angular_velocity"].get<double>(), -2.0 / 9.0, 0.01);
  EXPECT_EQ(regenerate_report(dir), 3);
  const auto img = read_pgm(dir / "snap_00002" / "overlay.pgm");
  EXPECT_EQ(img.width, 256);
  EXPECT_TRUE(fs::exists(dir / "contour_summary.csv"));
}

TEST(Report, RegeneratesEulerianCsvAndHeatmaps) {
  const auto dir = scratch("report");
  run_simulation(small_merger(0.1, 0.05), dir);
  const auto original = slurp(dir / "diagnostics.csv");
  fs::remove(dir / "diagnostics.csv");
  EXPECT_EQ(regenerate_report(dir), 3);
  EXPECT_EQ(slurp(dir / "diagnostics.csv"), original);
  const auto img = read_pgm(dir / "snap_00001" / "F.pgm");
  EXPECT_EQ(img.width, 256);
  EXPECT_EQ(img.height, 256);
  EXPECT_THROW(regenerate_report(scratch("missing")), ConfigError);
}

TEST(Sweep, NuSweepWritesOrderRow) {
  const auto dir = scratch("sweep_nu");
  json doc = {{"init", {{"preset", "right_smooth_merger"}}}, {"time", {{"t_end", 0.1}}}};
  const auto res = run_sweep(doc, "nu", {1e-2, 1e-3, 1e-4}, dir, 2);
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_GT(res.rows[0].metric, res.rows[1].metric);
  EXPECT_GT(res.rows[1].metric, res.rows[2].metric);
  const auto table = slurp(dir / "summary.csv");
  EXPECT_EQ(table.substr(0, 13), "value,metric\n");
  EXPECT_NE(table.find("\norder="), std::string::npos);
  for (const char* d : {"nu_ref", "nu_0.01", "nu_0.001", "nu_0.0001"}) EXPECT_TRUE(fs::exists(dir / d / "manifest.json")) << d;
  EXPECT_THROW(run_sweep(doc, "nu", {1e-2}, dir, 1), ConfigError);
  EXPECT_THROW(run_sweep(doc, "dt", {1e-2, 1e-3}, dir, 1), ConfigError);
  EXPECT_THROW(run_sweep(doc, "eps", {0.5, 0.25}, dir, 1), ConfigError);
}

TEST(Sweep, EpsSweepPairsScreenedAndUnscreened) {
  const auto dir = scratch("sweep_eps");
  json doc = {{"init", {{"preset", "right_smooth_merger_screened"}}}, {"time", {{"t_end", 0.1}}}};
  const auto res = run_sweep(doc, "eps", {0.25, 0.125}, dir, 2);
  EXPECT_EQ(res.fit_label, "slope");
  EXPECT_GT(res.rows[0].metric, res.rows[1].metric);
  const auto m = manifest(dir / "eps_0.125_unscreened");
  EXPECT_EQ(m["scenario"]["model"]["screened"], false);
  EXPECT_NEAR(m["resolution"]["box"].get<double>(), 0.125 * default_merger_box({}), 1e-12);
}

TEST(ParallelFor, RunsEveryJobAndRethrows) {
  std::atomic<int> sum{0};
  parallel_for(100, 4, [&](std::size_t i) { sum += static_cast<int>(i); });
  EXPECT_EQ(sum.load(), 4950);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw ConfigError("x"); }), ConfigError);
}
