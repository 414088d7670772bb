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

#include "rmpc/outputs.hpp"

#include "rmpc/stability_envelope.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rmpc::sim
{

const std::vector<std::string> kRunColumns{
  "t",          "x",          "y",          "phi",        "ydot_p",   "phidot",
  "e_phi",      "e_y",        "s_d",        "delta",      "u_star",   "c0",
  "eps_coll",   "eps_stab_1", "eps_stab_2", "eps_stab_3", "eps_stab_4", "ey_min_0",
  "ey_max_0",   "h_nc",       "ay",         "solve_ms"};

namespace
{

std::ofstream open_out(const std::filesystem::path & file)
{
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw IoError(fmt::format("cannot write '{}'", file.string()));
  }
  return out;
}

std::array<double, 22> flatten(const LogRow & r)
{
  return {r.t,           r.x,           r.y,        r.phi,         r.ydot_p,      r.phidot,
          r.e_phi,       r.e_y,         r.s_d,      r.delta,       r.u_star,      r.c0,
          r.eps_coll,    r.eps_stab(0), r.eps_stab(1), r.eps_stab(2), r.eps_stab(3), r.ey_min_0,
          r.ey_max_0,    r.h_nc,        r.ay,       r.solve_ms};
}

LogRow unflatten(const std::vector<double> & v)
{
  LogRow r;
  r.t = v[0];
  r.x = v[1];
  r.y = v[2];
  r.phi = v[3];
  r.ydot_p = v[4];
  r.phidot = v[5];
  r.e_phi = v[6];
  r.e_y = v[7];
  r.s_d = v[8];
  r.delta = v[9];
  r.u_star = v[10];
  r.c0 = v[11];
  r.eps_coll = v[12];
  r.eps_stab << v[13], v[14], v[15], v[16];
  r.ey_min_0 = v[17];
  r.ey_max_0 = v[18];
  r.h_nc = v[19];
  r.ay = v[20];
  r.solve_ms = v[21];
  return r;
}

}  // namespace

void write_run_csv(std::ostream & out, std::span<const LogRow> rows)
{
  fmt::print(out, "{}\n", fmt::join(kRunColumns, ","));
  for (const auto & r : rows) {
    fmt::print(out, "{}\n", fmt::join(flatten(r), ","));
  }
}

void write_run_csv(const std::filesystem::path & file, std::span<const LogRow> rows)
{
  auto out = open_out(file);
  write_run_csv(out, rows);
}

std::vector<LogRow> read_run_csv(const std::filesystem::path & file)
{
  std::ifstream in(file);
  if (!in) {
    throw IoError(fmt::format("cannot open '{}'", file.string()));
  }
  std::string line;
  if (!std::getline(in, line) || line != fmt::format("{}", fmt::join(kRunColumns, ","))) {
    throw IoError(fmt::format("'{}' does not have the run.csv header", file.string()));
  }
  std::vector<LogRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const auto res = std::from_chars(line.data() + pos, line.data() + comma, v);
      if (res.ec != std::errc() || res.ptr != line.data() + comma) {
        throw IoError(fmt::format("{}:{}: malformed number", file.string(), line_no));
      }
      values.push_back(v);
      pos = comma + 1;
    }
    if (values.size() != kRunColumns.size()) {
      throw IoError(fmt::format("{}:{}: expected {} columns", file.string(), line_no,
                                kRunColumns.size()));
    }
    rows.push_back(unflatten(values));
  }
  return rows;
}

std::string metrics_json(const Metrics & m, const ScenarioConfig & config, const RunLog * run)
{
  using nlohmann::json;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["scenario"] = config.name;
  j["mode"] = config.controller.mode == control::Mode::kRmpc ? "rmpc" : "dmpc";
  j["rows"] = m.rows;
  j["simulated_time"] = m.simulated_time;
  j["collision"] = m.collision;
  j["min_clearance"] = finite_or_null(m.min_clearance);
  j["max_abs_e_y"] = m.max_abs_e_y;
  j["overshoot"] = m.overshoot;
  j["settle_distance"] = m.settle_distance ? json(*m.settle_distance) : json(nullptr);
  j["envelope_violation_fraction"] = m.envelope_violation_fraction;
  j["eps_stab_zero_fraction"] = m.eps_stab_zero_fraction;
  j["max_abs_ay"] = m.max_abs_ay;
  j["road_excursion"] = m.road_excursion;
  j["solve_ms_p50"] = m.solve_ms_p50;
  j["solve_ms_p95"] = m.solve_ms_p95;
  j["solve_ms_max"] = m.solve_ms_max;
  j["controller_failures"] = m.controller_failures;
  if (run) {
    j["truncated"] = run->truncated;
    j["reason"] = run->reason;
    j["solver_failures"] = run->solver_failures;
  }
  return j.dump(2) + "\n";
}

void write_envelope_csv(const std::filesystem::path & file, const ScenarioConfig & config)
{
  const auto stab = stability::assemble_stab_constraints(
    config.controller.params, config.speed, config.controller.yaw_bound);
  auto out = open_out(file);
  fmt::print(out, "row,coef_ydot_p,coef_phidot,bound\n");
  for (int r = 0; r < stability::StabConstraints::kRows; ++r) {
    fmt::print(
      out, "{},{},{},{}\n", stability::StabConstraints::kLabels[r], stab.E(r, kLatVelCp),
      stab.E(r, kYawRate), stab.G(r));
  }
}

void write_tube_csv(const std::filesystem::path & file, const RunLog & run)
{
  auto out = open_out(file);
  fmt::print(out, "t,i,s,raw_min,raw_max,h_min,h_max,f_width,ey_min,ey_max,infeasible\n");
  for (std::size_t k = 0; k < run.diagnostics.size(); ++k) {
    const auto & d = run.diagnostics[k];
    for (std::size_t i = 0; i < d.tube.size(); ++i) {
      const auto & st = d.tube[i];
      fmt::print(
        out, "{},{},{},{},{},{},{},{},{},{},{}\n", run.rows[k].t, i + 1, d.s_samples[i],
        st.raw.lower, st.raw.upper, st.h_lower, st.h_upper, st.f_width,
        st.final_interval.lower, st.final_interval.upper, st.final_interval.infeasible ? 1 : 0);
    }
  }
}

void write_plot_script(const std::filesystem::path & file)
{
  auto out = open_out(file);
  out << R"PY(#!/usr/bin/env python3
"""Plot a closed-loop run: path, lateral error with tube, steering,
lateral acceleration and the (ydot_p, phidot) phase plane."""
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
run = pd.read_csv(os.path.join(here, "run.csv"))
env = pd.read_csv(os.path.join(here, "envelope.csv"))

fig, ax = plt.subplots(3, 2, figsize=(12, 11))
ax[0, 0].plot(run.x, run.y)
ax[0, 0].set_xlabel("x [m]")
ax[0, 0].set_ylabel("y [m]")
ax[0, 0].axis("equal")
ax[0, 0].set_title("global frame")

ax[0, 1].plot(run.s_d, run.e_y, label="e_y")
ax[0, 1].plot(run.s_d, run.ey_min_0, "--", lw=0.8, label="tube min (step 1)")
ax[0, 1].plot(run.s_d, run.ey_max_0, "--", lw=0.8, label="tube max (step 1)")
ax[0, 1].set_xlabel("s_d [m]")
ax[0, 1].set_ylabel("e_y [m]")
ax[0, 1].legend()

ax[1, 0].plot(run.t, run.delta * 180.0 / 3.141592653589793)
ax[1, 0].set_xlabel("t [s]")
ax[1, 0].set_ylabel("steering [deg]")

ax[1, 1].plot(run.t, run.ay)
ax[1, 1].set_xlabel("t [s]")
ax[1, 1].set_ylabel("a_y [m/s^2]")

pp = ax[2, 0]
pp.plot(run.ydot_p, run.phidot, ".", ms=2)
lim_v = max(abs(run.ydot_p).max(), 1.0) * 1.5
lim_r = max(abs(run.phidot).max(), 0.1) * 1.5
for _, row in env.iterrows():
    a, b, g = row.coef_ydot_p, row.coef_phidot, row.bound
    if abs(b) > 1e-12:
        xs = [-lim_v, lim_v]
        pp.plot(xs, [(g - a * v) / b for v in xs], "k-", lw=0.8)
    else:
        pp.axvline(g / a, color="k", lw=0.8)
pp.set_xlim(-lim_v, lim_v)
pp.set_ylim(-lim_r, lim_r)
pp.set_xlabel("ydot_p [m/s]")
pp.set_ylabel("phidot [rad/s]")
pp.set_title("phase plane")

ax[2, 1].plot(run.t, run.u_star, label="u*")
ax[2, 1].plot(run.t, run.c0, label="c0")
ax[2, 1].set_xlabel("t [s]")
ax[2, 1].set_ylabel("front force per tire [N]")
ax[2, 1].legend()

fig.tight_layout()
fig.savefig(os.path.join(here, "run.png"), dpi=120)
)PY";
}

void emit_outputs(
  const RunLog & run, const Metrics & metrics, const ScenarioConfig & config,
  const std::string & scenario_text, const std::filesystem::path & out_dir)
{
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
  }
  write_run_csv(out_dir / "run.csv", run.rows);
  {
    auto out = open_out(out_dir / "metrics.json");
    out << metrics_json(metrics, config, &run);
  }
  write_envelope_csv(out_dir / "envelope.csv", config);
  write_tube_csv(out_dir / "tube.csv", run);
  {
    auto out = open_out(out_dir / "scenario.cfg");
    out << scenario_text;
  }
  write_plot_script(out_dir / "plot_run.py");
}

}  // namespace rmpc::sim
