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

#include "rmpc/metrics.hpp"

#include "rmpc/stability_envelope.hpp"

#include <algorithm>
#include <cmath>

namespace rmpc::sim
{

double percentile(std::vector<double> values, double q)
{
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Metrics compute_metrics(
  std::span<const LogRow> rows, const ScenarioConfig & config, const RunLog * run,
  const MetricsOptions & options)
{
  Metrics m;
  m.rows = static_cast<int>(rows.size());
  if (rows.empty()) {
    return m;
  }
  const auto & params = config.controller.params;
  m.simulated_time = rows.back().t + config.controller_dt;

  if (run) {
    m.collision = run->collision;
    m.min_clearance = run->min_clearance;
    m.road_excursion = run->road_excursion;
    m.controller_failures = run->controller_failures;
  } else {
    const auto path = config.make_path();
    const auto road = config.make_road();
    for (const auto & r : rows) {
      const auto quad = footprint(r.x, r.y, r.phi, params, path);
      for (const auto & p : quad) {
        const auto & sec = road.at(p.s);
        m.road_excursion = std::max({m.road_excursion, p.e_y - sec.left, sec.right - p.e_y});
      }
      for (const auto & o : config.obstacles) {
        m.min_clearance = std::min(m.min_clearance, footprint_clearance(quad, o));
      }
    }
    m.collision = m.min_clearance < 0.0;
  }

  const auto stab = stability::assemble_stab_constraints(
    params, config.speed, config.controller.yaw_bound);
  int outside = 0;
  int eps_zero = 0;
  std::vector<double> solve;
  solve.reserve(rows.size());
  for (const auto & r : rows) {
    m.max_abs_e_y = std::max(m.max_abs_e_y, std::abs(r.e_y));
    m.max_abs_ay = std::max(m.max_abs_ay, std::abs(r.ay));
    StateVector x = StateVector::Zero();
    x(kLatVelCp) = r.ydot_p;
    x(kYawRate) = r.phidot;
    outside += stab.contains(x) ? 0 : 1;
    eps_zero += r.eps_stab.maxCoeff() < options.eps_zero_tol ? 1 : 0;
    solve.push_back(r.solve_ms);
  }
  const double n = static_cast<double>(rows.size());
  m.envelope_violation_fraction = outside / n;
  m.eps_stab_zero_fraction = eps_zero / n;
  m.solve_ms_p50 = percentile(solve, 0.5);
  m.solve_ms_p95 = percentile(solve, 0.95);
  m.solve_ms_max = *std::max_element(solve.begin(), solve.end());

  if (!config.obstacles.empty()) {
    double s_clear = -std::numeric_limits<double>::infinity();
    for (const auto & o : config.obstacles) {
      s_clear = std::max(s_clear, o.s_end);
    }
    // overshoot: after the rear bumper passes the last obstacle, wait for the
    // first crossing to the right of the path
    std::size_t k = 0;
    while (k < rows.size() && rows[k].s_d - params.cg_to_rear <= s_clear) {
      ++k;
    }
    while (k < rows.size() && rows[k].e_y > 0.0) {
      ++k;
    }
    for (; k < rows.size(); ++k) {
      m.overshoot = std::max(m.overshoot, std::abs(rows[k].e_y));
    }

    std::size_t last_out = rows.size();
    for (std::size_t j = rows.size(); j-- > 0;) {
      if (std::abs(rows[j].e_y) >= options.settle_band) {
        last_out = j;
        break;
      }
    }
    if (last_out == rows.size()) {
      m.settle_distance = rows.front().s_d - s_clear;
    } else if (last_out + 1 < rows.size()) {
      m.settle_distance = rows[last_out + 1].s_d - s_clear;
    }
  }
  return m;
}

}  // namespace rmpc::sim
