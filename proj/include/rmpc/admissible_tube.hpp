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

#include "rmpc/common.hpp"
#include "rmpc/ltv_model.hpp"
#include "rmpc/path_frame.hpp"
#include "rmpc/vehicle_dynamics.hpp"

#include <limits>
#include <span>
#include <vector>

namespace rmpc::tube
{

struct Obstacle
{
  double s_start{0.0};
  double s_end{0.0};
  double e_y_min{0.0};  // right edge
  double e_y_max{0.0};  // left edge
  double appear_time{0.0};  // s; perception reports it from this time on
  bool stretched{false};
};

/// Per-state half-widths of the additive one-step disturbance box.
using DisturbanceSet = StateVector;

inline DisturbanceSet default_disturbance_set()
{
  DisturbanceSet w;
  w << 0.2, 0.14, 0.0175, 0.025, 0.025;
  return w;
}

struct Interval
{
  double lower{0.0};
  double upper{0.0};
  bool infeasible{false};

  bool empty() const { return lower > upper; }
  double width() const { return upper - lower; }
};

/// Grows each obstacle along s by x_dot_p * dt on both sides, where dt is the
/// grid step of the prediction region the obstacle lies in. `s_now` anchors
/// the short-step region [s_now, s_now + x_dot_p * n_short * dt_short].
std::vector<Obstacle> stretch_obstacles(
  std::span<const Obstacle> obstacles, double x_dot_p, const ltv::TimeGrid & grid,
  double s_now);

/// Extends obstacle spans so that constraints on the CG keep the whole
/// footprint clear: the front overhang a before the start, the rear overhang
/// b after the end.
std::vector<Obstacle> inflate_for_footprint(
  std::span<const Obstacle> obstacles, const vehicle::VehicleParams & params);

/// Merges obstacles whose s-spans overlap into their bounding boxes.
std::vector<Obstacle> merge_obstacles(std::span<const Obstacle> obstacles);

/// Left-pass obstacle-free corridor over s_d.
class Corridor
{
public:
  Corridor(path::RoadBounds road, std::vector<Obstacle> obstacles, double vehicle_width);

  Interval at(double s) const;
  const std::vector<Obstacle> & obstacles() const { return obstacles_; }

private:
  path::RoadBounds road_;
  std::vector<Obstacle> obstacles_;
  double vehicle_width_;
};

Corridor build_active_constraints(
  std::span<const Obstacle> obstacles, const path::RoadBounds & road, double vehicle_width);

/// Corridor sampled at the predicted path distance of steps 1..N_p.
std::vector<Interval> discretize_tube(const Corridor & corridor, std::span<const double> s_samples);

/// Phi^i = A_d^i + B_d^i K^i, one gain per step.
std::vector<StateMatrix> error_transition(
  std::span<const ltv::StepModel> models, std::span<const GainRow> gains);

enum class TighteningBackend { kClosedForm, kLinearProgram };
enum class TailMode {
  kFrozen,  // h_i = h_{N_c} beyond the control horizon
  kFull,    // propagate reachable sets over the whole horizon
};

struct TighteningOptions
{
  TighteningBackend backend{TighteningBackend::kClosedForm};
  TailMode tail{TailMode::kFrozen};
  /// Half-widths of the initial estimation-error box.
  StateVector initial_error{StateVector::Zero()};
  ExecutionPolicy policy{ExecutionPolicy::kParallel};
};

struct Tightening
{
  std::vector<double> h_upper;  // h_i for the +e_y row, i = 1..N_p
  std::vector<double> h_lower;  // h_i for the -e_y row
  double h0_upper{0.0};
  double h0_lower{0.0};
  std::vector<Interval> intervals;
  /// Number of support-function maximizations evaluated.
  int lp_count{0};
};

/// Support function of the box |x_j| <= w_j in direction d: sum |d_j| w_j.
double box_support(const GainRow & direction, const StateVector & half_width);

/// Robust tightening of the raw intervals (steps 1..N_p) by the reachable
/// error sets S^i = Phi^{i-1} S^{i-1} + W, S^0 = initial error box.
/// `transitions` holds Phi^0..Phi^{N_p-1}.
Tightening tighten_bounds(
  std::span<const Interval> raw, std::span<const StateMatrix> transitions,
  const DisturbanceSet & w, int n_control, const TighteningOptions & options = {});

/// (wd/2) |cos e_phi| + a |sin e_phi|
double effective_half_width(double e_phi, const vehicle::VehicleParams & params);

struct TubeStep
{
  Interval raw;
  double h_lower{0.0};
  double h_upper{0.0};
  double f_width{0.0};
  Interval final_interval;
};

using TubeBounds = std::vector<TubeStep>;

/// Shrinks each tightened interval by the heading-dependent half-width.
/// Empty intervals collapse to their midpoint and are flagged infeasible.
TubeBounds convexify_width(
  std::span<const Interval> raw, const Tightening & tightened,
  std::span<const double> e_phi_prev, const vehicle::VehicleParams & params);

}  // namespace rmpc::tube
