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

#include "rmpc/controller.hpp"
#include "rmpc/scenario.hpp"

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rmpc::sim
{

/// One run.csv row, sampled at each controller tick.
struct LogRow
{
  double t{0.0};
  double x{0.0};
  double y{0.0};
  double phi{0.0};
  double ydot_p{0.0};
  double phidot{0.0};
  double e_phi{0.0};
  double e_y{0.0};
  double s_d{0.0};
  double delta{0.0};
  double u_star{0.0};
  double c0{0.0};
  double eps_coll{0.0};
  StabVector eps_stab{StabVector::Zero()};
  double ey_min_0{0.0};
  double ey_max_0{0.0};
  double h_nc{0.0};
  double ay{0.0};
  double solve_ms{0.0};

  bool operator==(const LogRow &) const = default;
};

/// Per-tick controller diagnostics kept alongside the CSV rows.
struct StepDiagnostics
{
  bool ok{true};
  bool solver_failure{false};
  std::string failure;
  control::WeightSet weight_set{control::WeightSet::kTracking};
  int iterations{0};
  qp::KktResiduals residuals;
  double objective{0.0};
  int lp_count{0};
  double setup_ms{0.0};
  double solve_ms{0.0};
  std::vector<double> s_samples;
  tube::TubeBounds tube;
  ltv::DiscreteModel model0;  // step-0 prediction model
  StateVector measurement{StateVector::Zero()};
};

struct RunLog
{
  std::vector<LogRow> rows;
  std::vector<StepDiagnostics> diagnostics;
  bool collision{false};
  double collision_time{0.0};
  bool truncated{false};
  std::string reason;
  int controller_failures{0};
  int solver_failures{0};
  /// Minimum signed footprint-obstacle distance over all plant substeps.
  double min_clearance{std::numeric_limits<double>::infinity()};
  /// Largest distance a footprint corner left the road, over all substeps.
  double road_excursion{0.0};
};

struct Point
{
  double s{0.0};
  double e_y{0.0};
};

/// Footprint corners [front-left, front-right, rear-right, rear-left] in path
/// coordinates: longitudinal [-b, +a], lateral +-wd/2 about the CG.
std::array<Point, 4> footprint(
  double x, double y, double phi, const vehicle::VehicleParams & params,
  const path::ReferencePath & path);

/// Signed distance between a convex footprint and an obstacle rectangle:
/// Euclidean gap when disjoint, minus the smallest separating-axis overlap
/// when they intersect.
double footprint_clearance(const std::array<Point, 4> & quad, const tube::Obstacle & obstacle);

/// Called once per controller tick after the control step.
using StepObserver = std::function<void(
  const vehicle::ErrorState & measurement, const control::StepOutput & output, const LogRow & row)>;

/// Closed-loop simulation: controller at controller_dt, plant integrated
/// with RK4 at `substep`, steering held between ticks.
RunLog run_scenario(const ScenarioConfig & config, const StepObserver & observer = {});

}  // namespace rmpc::sim
