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
#include "rmpc/vehicle_dynamics.hpp"

#include <functional>
#include <span>
#include <vector>

namespace rmpc::ltv
{

/// Variable-step prediction grid: n_short steps of dt_short followed by
/// n_long steps of dt_long.
struct TimeGrid
{
  int n_short{27};
  int n_long{6};
  int n_control{10};
  double dt_short{0.03};
  double dt_long{0.2};

  int horizon() const { return n_short + n_long; }
  double dt(int i) const { return i < n_short ? dt_short : dt_long; }
  /// Start time of step i relative to the current controller tick.
  double time_at(int i) const;
  double duration() const { return time_at(horizon()); }
  void validate() const;
};

struct RearTireLinearization
{
  double alpha_bar{0.0};      // rad
  double force_bar{0.0};      // N, brush force at alpha_bar
  double stiffness_bar{0.0};  // N/rad, -dF/dalpha at alpha_bar
};

/// Frozen path-frame data used for one prediction step.
struct FrameData
{
  double e_phi{0.0};
  double e_y{0.0};
  double s_d{0.0};
};

struct ContinuousModel
{
  StateMatrix A{StateMatrix::Zero()};
  StateVector B{StateVector::Zero()};
  StateVector L{StateVector::Zero()};
};

struct DiscreteModel
{
  StateMatrix A{StateMatrix::Identity()};
  StateVector B{StateVector::Zero()};
  StateVector L{StateVector::Zero()};
};

struct StepModel
{
  double dt{0.0};
  ContinuousModel continuous;
  DiscreteModel discrete;
  RearTireLinearization linearization;
  FrameData frame;
};

using CurvatureFn = std::function<double(double)>;

/// Rear slip angle of a predicted CP state, small-angle form.
double rear_slip_of(const StateVector & x, const vehicle::VehicleParams & params, double x_dot_p);

/// Shifts a per-step sequence forward by one controller tick and repeats the
/// final entry: [v1..vN] -> [v2..vN, vN].
template <typename T>
std::vector<T> shift_and_hold(std::span<const T> values)
{
  std::vector<T> out(values.begin(), values.end());
  if (out.size() > 1) {
    out.erase(out.begin());
    out.push_back(out.back());
  }
  return out;
}

/// Linearization slip angles for each prediction step. `previous_states` holds
/// the previous controller tick's predicted states s_0..s_Np (empty on a cold
/// start, in which case every entry is the measured rear slip angle).
std::vector<double> predict_slip_sequence(
  std::span<const StateVector> previous_states, const vehicle::ErrorState & measurement,
  const vehicle::VehicleParams & params, double x_dot_p, int horizon);

/// Frozen frame data per step, shifted from the previous prediction or held
/// at the measurement on a cold start.
std::vector<FrameData> predict_frame_sequence(
  std::span<const StateVector> previous_states, const vehicle::ErrorState & measurement,
  int horizon);

RearTireLinearization linearize_rear_tire(double alpha_bar, const vehicle::VehicleParams & params);

ContinuousModel build_continuous_matrices(
  const RearTireLinearization & lin, const FrameData & frame, double x_dot_p,
  const vehicle::VehicleParams & params, const CurvatureFn & curvature);

/// Exact zero-order-hold discretization of x' = A x + B u + L.
DiscreteModel discretize_zoh(
  const StateMatrix & A, const StateVector & B, const StateVector & L, double dt);

/// Full pipeline: slip prediction, per-step rear tire linearization, frozen
/// frame data, continuous matrices and ZOH over the grid.
std::vector<StepModel> build_prediction_models(
  const vehicle::ErrorState & measurement, std::span<const StateVector> previous_states,
  const CurvatureFn & curvature, const vehicle::VehicleParams & params, const TimeGrid & grid,
  double x_dot_p, ExecutionPolicy policy = ExecutionPolicy::kParallel);

/// Path distance expected at the start of each prediction step 1..N_p when
/// driving at x_dot_p from the measured path distance.
std::vector<double> sample_path_distances(double s_d, double x_dot_p, const TimeGrid & grid);

}  // namespace rmpc::ltv
