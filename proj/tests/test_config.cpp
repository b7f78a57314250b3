#include <gtest/gtest.h>

#include "reconnect2d/config.hpp"

using namespace reconnect2d;

namespace {

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

TEST(Config, MinimalEulerianDefaults) {
  const auto rc = parse_config(json::parse(R"({"init": {"preset": "right_smooth_merger"}})"));
  ASSERT_TRUE(rc.eulerian);
  const auto& g = rc.eulerian->initial.sigma.plus.grid;
  EXPECT_EQ(g.n, 256);
  // Eight support diameters of one blob.
  EXPECT_NEAR(g.box, 8.0 * 2.0 * std::sqrt(2.0 / std::numbers::pi), 1e-12);
  EXPECT_EQ(rc.eulerian->dt, 0.0);
  EXPECT_EQ(rc.eulerian->t_end, 1.0);
  EXPECT_NEAR(rc.eulerian->output_every, 0.1, 1e-15);
  EXPECT_EQ(rc.eulerian->initial.variant.screening, Screening::Unscreened);
  EXPECT_EQ(rc.eulerian->initial.variant.handedness, Handedness::Right);
  EXPECT_EQ(rc.out_dir, "run_right_smooth_merger");
  EXPECT_EQ(rc.echo["grid"]["n"], 256);
  EXPECT_EQ(rc.echo["model"]["screened"], false);
  EXPECT_EQ(rc.echo["time"]["dt"], 0.0);
}

TEST(Config, EchoReparsesToSameScenario) {
  const auto a = parse_config(json::parse(R"({"init": {"preset": "right_smooth_merger_screened"}})"));
  const auto b = parse_config(a.echo);
  EXPECT_EQ(a.echo, b.echo);
  EXPECT_EQ(a.eulerian->initial.sigma.plus.data, b.eulerian->initial.sigma.plus.data);
  EXPECT_EQ(a.eulerian->eps, 0.125);
}

TEST(Config, AllPresetsParse) {
  for (const char* p : {"right_smooth_merger", "right_smooth_merger_screened", "left_patch_smooth",
                        "left_patch_merger", "kirchhoff_ellipse", "point_vortex"}) {
    json doc = {{"init", {{"preset", p}}}};
    EXPECT_NO_THROW(parse_config(doc)) << p;
  }
  const auto pv = parse_config(json::parse(R"({"init": {"preset": "point_vortex"}})"));
  EXPECT_EQ(pv.engine, Engine::PointVortex);
  EXPECT_NEAR(pv.point_vortex->predicted_merger, 4.0 * std::numbers::pi, 1e-12);
  const auto patch = parse_config(json::parse(R"({"init": {"preset": "left_patch_merger"}})"));
  EXPECT_EQ(patch.engine, Engine::Contour);
  EXPECT_EQ(patch.contour->initial.plus.size(), 512);
  EXPECT_EQ(patch.contour->mode, ContourMode::ScreenedLeft);
  EXPECT_NEAR(patch.contour->t_end, 9.0 * std::numbers::pi / 4.0, 1e-15);
  const auto k = parse_config(json::parse(R"({"init": {"preset": "kirchhoff_ellipse"}, "contour": {"nodes": 128}})"));
  EXPECT_EQ(k.contour->mode, ContourMode::UnscreenedEuler);
  EXPECT_EQ(k.contour->initial.plus.size(), 128);
}

TEST(Config, ErrorsNameTheKeyPath) {
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"model": {"handedness": "up"}, "init": {"preset": "point_vortex"}})")),
                          "model.handedness"));
  const auto nu = error_of(json::parse(R"({"model": {"nu_plus": -1}, "init": {"preset": "right_smooth_merger"}})"));
  EXPECT_TRUE(starts_with(nu, "model.nu_plus")) << nu;
  EXPECT_NE(nu.find("must be >= 0"), std::string::npos) << nu;
  EXPECT_EQ(error_of(json::parse(R"({"init": {}})")), "init.preset: required");
  EXPECT_EQ(error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "gird": {}})")), "gird: unknown key");
  EXPECT_EQ(error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "grid": {"nx": 64}})")),
            "grid.nx: unknown key");
  EXPECT_EQ(error_of(json::parse(R"({"init": {"preset": "point_vortex", "params": {"z0": 1}}})")),
            "init.params.z0: unknown key");
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "grid": {"n": 100}})")),
                          "grid.n"));
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "grid": {"n": "x"}})")),
                          "grid.n"));
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "time": {"dt": -1}})")),
                          "time.dt"));
  EXPECT_TRUE(starts_with(
      error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "time": {"output_every": 0}})")),
      "time.output_every"));
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"init": {"preset": "left_patch_merger", "params": {"d": 0.01}}})")),
                          "init.params.d"));
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"init": {"preset": "warp"}})")), "init.preset"));
  EXPECT_TRUE(starts_with(
      error_of(json::parse(R"({"model": {"handedness": "left"}, "init": {"preset": "right_smooth_merger"}})")),
      "model.handedness"));
  EXPECT_TRUE(starts_with(error_of(json::parse(R"({"init": {"preset": "right_smooth_merger"}, "grid": {"box": 4}})")),
                          "grid.box"));
  EXPECT_TRUE(starts_with(
      error_of(json::parse(R"({"model": {"nu_plus": 0.1}, "init": {"preset": "left_patch_merger"}})")),
      "model.nu_plus"));
  EXPECT_TRUE(starts_with(error_of(json::parse("[1, 2]")), "config"));
}

TEST(Config, HypothesisFailureIsNotAConfigError) {
  const auto doc = json::parse(R"({"init": {"preset": "right_smooth_merger", "params": {"width": 0.12}}})");
  EXPECT_THROW(parse_config(doc), HypothesisError);
}

TEST(Config, LoadFromFile) {
  const auto p = std::filesystem::temp_directory_path() / "reconnect2d_config_test.json";
  {
    std::ofstream out(p);
    out << R"({"init": {"preset": "point_vortex", "params": {"x0": -2, "y0": 2}}, "time": {"dt": 0.01}})";
  }
  const auto rc = parse_config(p);
  EXPECT_NEAR(rc.point_vortex->predicted_merger, 16.0 * std::numbers::pi, 1e-11);
  EXPECT_EQ(rc.point_vortex->dt, 0.01);
  {
    std::ofstream out(p);
    out << "{not json";
  }
  EXPECT_THROW(parse_config(p), ConfigError);
  EXPECT_THROW(parse_config(std::filesystem::path("/nonexistent.json")), ConfigError);
}
