#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <reconnect2d/runner.hpp>

using namespace reconnect2d;

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values: not a number: \"" + item + "\"");
    }
  }
  return out;
}

int cmd_run(const std::string& config) {
  const auto rc = parse_config(std::filesystem::path(config));
  const auto s = run_simulation(rc);
  std::printf("%s: %s at t = %.6g after %ld steps (%s)\n", rc.out_dir.string().c_str(), s.status.c_str(), s.t_final,
              s.steps, s.stop_reason.c_str());
  if (s.first_overlap) std::printf("first overlap at t = %.6g\n", *s.first_overlap);
  if (s.component_change) std::printf("F component count changed at t = %.6g\n", *s.component_change);
  if (rc.point_vortex && s.first_overlap)
    std::printf("merger time %.10g, predicted %.10g\n", *s.first_overlap, rc.point_vortex->predicted_merger);
  return s.status == "complete" ? 0 : 3;
}

int cmd_sweep(const std::string& config, const std::string& param, const std::string& values, int jobs) {
  const auto doc = load_json(config);
  const auto rc = parse_config(doc);
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency() / thread_cap()));
  const auto res = run_sweep(doc, param, parse_values(values), rc.out_dir, jobs);
  std::printf("value,metric\n");
  for (const auto& r : res.rows) std::printf("%.17g,%.17g\n", r.value, r.metric);
  std::printf("%s=%.6g\n", res.fit_label.c_str(), res.fit);
  return 0;
}

int cmd_report(const std::string& dir) {
  const int n = regenerate_report(dir);
  std::printf("%s: %d snapshots processed\n", dir.c_str(), n);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species active scalar merger and reconnection simulator"};
  app.require_subcommand(1);

  std::string config, param, values, dir;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config, "JSON config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and fit the convergence rate");
  sweep->add_option("--config", config, "JSON config file")->required();
  sweep->add_option("--param", param, "Swept parameter")->required()->check(CLI::IsMember({"nu", "eps"}));
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--jobs", jobs, "Concurrent runs (default: cores / RECONNECT2D_THREADS)");
  auto* report = app.add_subcommand("report", "Regenerate CSV summaries and PGM images from snapshots");
  report->add_option("--dir", dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config);
    if (*sweep) return cmd_sweep(config, param, values, jobs);
    if (*report) return cmd_report(dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis check failed: " << e.what() << "\n";
    return 4;
  } catch (const NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return 3;
  } catch (const GeometryError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
