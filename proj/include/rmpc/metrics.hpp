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

#pragma once

#include "rmpc/scenario.hpp"
#include "rmpc/simulation.hpp"

#include <optional>
#include <span>

namespace rmpc::sim
{

struct Metrics
{
  int rows{0};
  double simulated_time{0.0};
  bool collision{false};
  double min_clearance{std::numeric_limits<double>::infinity()};
  double max_abs_e_y{0.0};
  /// Largest |e_y| once the vehicle, having cleared the last obstacle, first
  /// crosses back over the path.
  double overshoot{0.0};
  /// Path distance past the last obstacle's end after which |e_y| stays
  /// below the settle band; empty if it never settles.
  std::optional<double> settle_distance;
  double envelope_violation_fraction{0.0};
  double eps_stab_zero_fraction{0.0};
  double max_abs_ay{0.0};
  double road_excursion{0.0};
  double solve_ms_p50{0.0};
  double solve_ms_p95{0.0};
  double solve_ms_max{0.0};
  int controller_failures{0};
};

struct MetricsOptions
{
  double settle_band{0.3};       // m
  double eps_zero_tol{1e-6};
};

/// Metrics from logged rows. When `run` is given, clearance, excursion and
/// collision come from its substep-resolution monitor; otherwise they are
/// recomputed from the logged poses.
Metrics compute_metrics(
  std::span<const LogRow> rows, const ScenarioConfig & config, const RunLog * run = nullptr,
  const MetricsOptions & options = {});

/// Percentile by linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace rmpc::sim
