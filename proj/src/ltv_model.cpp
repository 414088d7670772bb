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

#include "rmpc/ltv_model.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <string>

namespace rmpc::ltv
{

double TimeGrid::time_at(int i) const
{
  const int n_s = std::min(i, n_short);
  const int n_l = std::max(0, i - n_short);
  return n_s * dt_short + n_l * dt_long;
}

void TimeGrid::validate() const
{
  if (n_short <= 0 || n_long < 0 || n_control <= 0 || n_control > n_short) {
    throw InvalidArgument("time grid requires 0 < n_control <= n_short and n_long >= 0");
  }
  if (!(dt_short > 0.0) || !(dt_long > 0.0)) {
    throw InvalidArgument("time grid step durations must be positive");
  }
}

double rear_slip_of(const StateVector & x, const vehicle::VehicleParams & params, double x_dot_p)
{
  // alpha_r = (y_dot - b r) / x_dot with y_dot = y_dot_p - p r
  const double p = params.cp_distance();
  return (x(kLatVelCp) - (p + params.cg_to_rear) * x(kYawRate)) / x_dot_p;
}

std::vector<double> predict_slip_sequence(
  std::span<const StateVector> previous_states, const vehicle::ErrorState & measurement,
  const vehicle::VehicleParams & params, double x_dot_p, int horizon)
{
  if (previous_states.size() < static_cast<std::size_t>(horizon)) {
    return std::vector<double>(
      horizon, rear_slip_of(measurement.to_vector(), params, x_dot_p));
  }
  std::vector<double> previous(horizon);
  for (int i = 0; i < horizon; ++i) {
    previous[i] = rear_slip_of(previous_states[i], params, x_dot_p);
  }
  return shift_and_hold<double>(previous);
}

std::vector<FrameData> predict_frame_sequence(
  std::span<const StateVector> previous_states, const vehicle::ErrorState & measurement,
  int horizon)
{
  if (previous_states.size() < static_cast<std::size_t>(horizon)) {
    return std::vector<FrameData>(horizon, {measurement.e_phi, measurement.e_y, measurement.s_d});
  }
  std::vector<FrameData> previous(horizon);
  for (int i = 0; i < horizon; ++i) {
    const auto & x = previous_states[i];
    previous[i] = {x(kHeadingError), x(kLateralError), x(kPathDistance)};
  }
  return shift_and_hold<FrameData>(previous);
}

RearTireLinearization linearize_rear_tire(double alpha_bar, const vehicle::VehicleParams & params)
{
  RearTireLinearization lin;
  lin.alpha_bar = alpha_bar;
  lin.force_bar = vehicle::brush_tire_force(
    alpha_bar, params.stiffness_rear, params.friction, params.normal_load_rear);
  lin.stiffness_bar = vehicle::brush_tire_local_stiffness(
    alpha_bar, params.stiffness_rear, params.friction, params.normal_load_rear);
  return lin;
}

ContinuousModel build_continuous_matrices(
  const RearTireLinearization & lin, const FrameData & frame, double x_dot_p,
  const vehicle::VehicleParams & params, const CurvatureFn & curvature)
{
  if (!(x_dot_p > 0.0)) {
    throw InvalidArgument("prediction model requires positive speed");
  }
  const double kappa = curvature(frame.s_d);
  const double denom = 1.0 - kappa * frame.e_y;
  if (!(denom > 0.0)) {
    throw FrameError("frozen frame singular: 1 - kappa * e_y = " + std::to_string(denom));
  }

  const double m = params.mass;
  const double iz = params.yaw_inertia;
  const double a = params.cg_to_front;
  const double b = params.cg_to_rear;
  const double p = params.cp_distance();
  const double c_bar = lin.stiffness_bar;

  ContinuousModel model;
  auto & A = model.A;
  A(kLatVelCp, kYawRate) = -x_dot_p;
  A(kYawRate, kLatVelCp) = 2.0 * b * c_bar / (iz * x_dot_p);
  A(kYawRate, kYawRate) = -2.0 * b * (b + p) * c_bar / (iz * x_dot_p);
  A(kHeadingError, kYawRate) = 1.0;
  A(kLateralError, kLatVelCp) = 1.0;
  A(kLateralError, kYawRate) = -p;
  A(kLateralError, kHeadingError) = x_dot_p;
  A(kPathDistance, kLatVelCp) = -frame.e_phi / denom;
  A(kPathDistance, kYawRate) = p * frame.e_phi / denom;

  model.B(kLatVelCp) = 2.0 / m + 2.0 * a / (m * b);
  model.B(kYawRate) = 2.0 * a / iz;

  model.L(kYawRate) = -2.0 * b * lin.force_bar / iz - 2.0 * b * c_bar / iz * lin.alpha_bar;
  model.L(kHeadingError) = -x_dot_p * kappa;
  model.L(kPathDistance) = x_dot_p;
  return model;
}

DiscreteModel discretize_zoh(
  const StateMatrix & A, const StateVector & B, const StateVector & L, double dt)
{
  if (!(dt > 0.0)) {
    throw InvalidArgument("discretization step must be positive");
  }
  // exp([A B L; 0 0 0; 0 0 0] dt) = [A_d B_d L_d; 0 I 0; 0 0 I]
  Eigen::Matrix<double, kNumStates + 2, kNumStates + 2> M =
    Eigen::Matrix<double, kNumStates + 2, kNumStates + 2>::Zero();
  M.topLeftCorner<kNumStates, kNumStates>() = A;
  M.block<kNumStates, 1>(0, kNumStates) = B;
  M.block<kNumStates, 1>(0, kNumStates + 1) = L;
  const Eigen::Matrix<double, kNumStates + 2, kNumStates + 2> E = (M * dt).exp();

  DiscreteModel d;
  d.A = E.topLeftCorner<kNumStates, kNumStates>();
  d.B = E.block<kNumStates, 1>(0, kNumStates);
  d.L = E.block<kNumStates, 1>(0, kNumStates + 1);
  return d;
}

std::vector<StepModel> build_prediction_models(
  const vehicle::ErrorState & measurement, std::span<const StateVector> previous_states,
  const CurvatureFn & curvature, const vehicle::VehicleParams & params, const TimeGrid & grid,
  double x_dot_p, ExecutionPolicy policy)
{
  grid.validate();
  const int n = grid.horizon();
  const auto slips = predict_slip_sequence(previous_states, measurement, params, x_dot_p, n);
  const auto frames = predict_frame_sequence(previous_states, measurement, n);

  std::vector<StepModel> models(n);
  auto build_one = [&](int i) {
    auto & step = models[i];
    step.dt = grid.dt(i);
    step.frame = frames[i];
    step.linearization = linearize_rear_tire(slips[i], params);
    step.continuous =
      build_continuous_matrices(step.linearization, step.frame, x_dot_p, params, curvature);
    step.discrete =
      discretize_zoh(step.continuous.A, step.continuous.B, step.continuous.L, step.dt);
  };

  if (policy == ExecutionPolicy::kSerial) {
    for (int i = 0; i < n; ++i) {
      build_one(i);
    }
    return models;
  }

  // Exceptions must not escape an OpenMP region; surface the first one after.
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      build_one(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return models;
}

std::vector<double> sample_path_distances(double s_d, double x_dot_p, const TimeGrid & grid)
{
  std::vector<double> s(grid.horizon());
  for (int i = 0; i < grid.horizon(); ++i) {
    s[i] = s_d + x_dot_p * grid.time_at(i + 1);
  }
  return s;
}

}  // namespace rmpc::ltv
