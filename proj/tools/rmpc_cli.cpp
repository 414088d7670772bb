// Copyright 2026 The RMPC Evasive Steering Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: run scenarios, identify the disturbance set, and
// compute or compare run metrics.

#include "rmpc/identification.hpp"
#include "rmpc/metrics.hpp"
#include "rmpc/outputs.hpp"
#include "rmpc/scenario.hpp"
#include "rmpc/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitCollision = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitConfigError = 4;

std::string read_text(const std::filesystem::path & file)
{
  std::ifstream in(file);
  if (!in) {
    throw rmpc::sim::ConfigError(fmt::format("cannot open '{}'", file.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_run(
  const std::string & scenario_file, const std::string & mode, const std::string & out_dir,
  const std::optional<std::uint64_t> & seed, const std::string & noise, const std::string & timing)
{
  std::string text = read_text(scenario_file);
  std::string overrides;
  if (!mode.empty()) {
    overrides += fmt::format("mode = {}\n", mode);
  }
  if (seed) {
    overrides += fmt::format("seed = {}\n", *seed);
  }
  if (!noise.empty()) {
    overrides += fmt::format("noise = {}\n", noise);
  }
  if (!timing.empty()) {
    overrides += fmt::format("timing = {}\n", timing);
  }
  if (!overrides.empty()) {
    if (!text.empty() && text.back() != '\n') {
      text += '\n';
    }
    text += "# command-line overrides\n" + overrides;
  }
  const auto config = rmpc::sim::parse_scenario(text);
  const auto run = rmpc::sim::run_scenario(config);
  const auto metrics = rmpc::sim::compute_metrics(run.rows, config, &run);
  const std::filesystem::path dir =
    out_dir.empty() ? std::filesystem::path("out") / config.name : std::filesystem::path(out_dir);
  rmpc::sim::emit_outputs(run, metrics, config, text, dir);

  fmt::print(
    "{} [{}]: {} steps, collision={}, min_clearance={:.3f} m, max|e_y|={:.3f} m, "
    "overshoot={:.3f} m, controller_failures={}\n",
    config.name, config.controller.mode == rmpc::control::Mode::kRmpc ? "rmpc" : "dmpc",
    metrics.rows, metrics.collision ? "yes" : "no", metrics.min_clearance, metrics.max_abs_e_y,
    metrics.overshoot, metrics.controller_failures);
  fmt::print("outputs written to {}\n", dir.string());
  for (std::size_t k = 0; k < run.diagnostics.size(); ++k) {
    if (!run.diagnostics[k].ok) {
      fmt::print(stderr, "t={:.2f}: controller step failed: {}\n", run.rows[k].t,
                 run.diagnostics[k].failure);
    }
  }
  if (run.collision) {
    return kExitCollision;
  }
  if (run.controller_failures > 0 || (run.truncated && !run.collision)) {
    return kExitSolverFailure;
  }
  return kExitOk;
}

int cmd_identify(const std::string & trial_dir, const std::vector<double> & margin,
                 const std::string & out_file)
{
  std::vector<std::filesystem::path> files;
  for (const auto & entry : std::filesystem::directory_iterator(trial_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<rmpc::sim::ScenarioConfig> trials;
  for (const auto & f : files) {
    trials.push_back(rmpc::sim::load_scenario(f));
  }
  rmpc::StateVector m = rmpc::StateVector::Zero();
  if (!margin.empty()) {
    if (margin.size() != 5) {
      throw rmpc::sim::ConfigError("--sensor-margin needs 5 values");
    }
    for (int i = 0; i < 5; ++i) {
      m(i) = margin[i];
    }
  }
  const auto res = rmpc::sim::estimate_disturbance_set(trials, m);
  const auto fragment = rmpc::sim::disturbance_fragment(res.w);
  fmt::print("# {} trials, {} one-step residual samples\n", trials.size(), res.samples);
  fmt::print("{}", fragment);
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) {
      throw rmpc::sim::IoError(fmt::format("cannot write '{}'", out_file));
    }
    out << fragment;
  }
  return kExitOk;
}

rmpc::sim::ScenarioConfig config_next_to(const std::filesystem::path & csv)
{
  const auto cfg = csv.parent_path() / "scenario.cfg";
  return rmpc::sim::load_scenario(cfg);
}

int cmd_metrics(const std::string & csv)
{
  const auto config = config_next_to(csv);
  const auto rows = rmpc::sim::read_run_csv(csv);
  const auto m = rmpc::sim::compute_metrics(rows, config);
  fmt::print("{}", rmpc::sim::metrics_json(m, config, nullptr));
  return kExitOk;
}

int cmd_compare(const std::string & a, const std::string & b)
{
  const auto ca = config_next_to(a);
  const auto cb = config_next_to(b);
  const auto ma = rmpc::sim::compute_metrics(rmpc::sim::read_run_csv(a), ca);
  const auto mb = rmpc::sim::compute_metrics(rmpc::sim::read_run_csv(b), cb);
  auto line = [](const char * name, double x, double y) {
    fmt::print("{:<28} {:>12.4f} {:>12.4f} {:>12.4f}\n", name, x, y, y - x);
  };
  fmt::print("{:<28} {:>12} {:>12} {:>12}\n", "metric", "A", "B", "B-A");
  line("min_clearance", ma.min_clearance, mb.min_clearance);
  line("max_abs_e_y", ma.max_abs_e_y, mb.max_abs_e_y);
  line("overshoot", ma.overshoot, mb.overshoot);
  line("envelope_violation_frac", ma.envelope_violation_fraction, mb.envelope_violation_fraction);
  line("max_abs_ay", ma.max_abs_ay, mb.max_abs_ay);
  line("road_excursion", ma.road_excursion, mb.road_excursion);
  line("solve_ms_p95", ma.solve_ms_p95, mb.solve_ms_p95);
  fmt::print("{:<28} {:>12} {:>12}\n", "collision", ma.collision ? "yes" : "no",
             mb.collision ? "yes" : "no");
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Robust tube MPC steering controller: closed-loop scenario harness"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string mode;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string noise;
  std::string timing;
  auto * run = app.add_subcommand("run", "simulate a scenario in closed loop");
  run->add_option("scenario", scenario_file, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "controller mode")->check(CLI::IsMember({"rmpc", "dmpc"}));
  run->add_option("--out", out_dir, "output directory (default out/<name>)");
  run->add_option("--seed", seed, "seed for sensor noise");
  run->add_option("--noise", noise, "sensor noise")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--timing", timing, "record wall-clock solve times in run.csv")
    ->check(CLI::IsMember({"on", "off"}));

  std::string trial_dir;
  std::vector<double> margin;
  std::string w_out;
  auto * identify = app.add_subcommand("identify-w", "estimate the disturbance set from trials");
  identify->add_option("trial_dir", trial_dir, "directory of trial scenario files")
    ->required()
    ->check(CLI::ExistingDirectory);
  identify->add_option("--sensor-margin", margin, "per-state measurement margin (5 values)");
  identify->add_option("--out", w_out, "write the w fragment to this file");

  std::string csv;
  auto * metrics = app.add_subcommand("metrics", "metrics of a run.csv");
  metrics->add_option("run_csv", csv, "run.csv next to its scenario.cfg")
    ->required()
    ->check(CLI::ExistingFile);

  std::string csv_a;
  std::string csv_b;
  auto * compare = app.add_subcommand("compare", "compare the metrics of two runs");
  compare->add_option("run_a", csv_a)->required()->check(CLI::ExistingFile);
  compare->add_option("run_b", csv_b)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*run) {
      return cmd_run(scenario_file, mode, out_dir, seed, noise, timing);
    }
    if (*identify) {
      return cmd_identify(trial_dir, margin, w_out);
    }
    if (*metrics) {
      return cmd_metrics(csv);
    }
    if (*compare) {
      return cmd_compare(csv_a, csv_b);
    }
  } catch (const rmpc::InvalidArgument & e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfigError;
  } catch (const rmpc::sim::IoError & e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kExitConfigError;
  } catch (const rmpc::Error & e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitSolverFailure;
  }
  return kExitOk;
}
