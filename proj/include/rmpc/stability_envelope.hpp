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

#include <array>
#include <string_view>

namespace rmpc::stability
{

enum class YawBound {
  kNeutralSteer,  // mu g / x_dot
  kAxleLimited,   // min over axles of the steady-state force limit
};

/// Four half-planes over the error state, in the fixed order
/// [lat-vel upper, lat-vel lower, yaw upper, yaw lower].
struct StabConstraints
{
  static constexpr int kRows = 4;
  Eigen::Matrix<double, kRows, kNumStates> E{Eigen::Matrix<double, kRows, kNumStates>::Zero()};
  Eigen::Matrix<double, kRows, 1> G{Eigen::Matrix<double, kRows, 1>::Zero()};

  static constexpr std::array<std::string_view, kRows> kLabels{
    "latvel_upper", "latvel_lower", "yaw_upper", "yaw_lower"};

  /// Per-row slack E x - G (positive when violated).
  Eigen::Matrix<double, kRows, 1> violation(const StateVector & x) const { return E * x - G; }
  bool contains(const StateVector & x, double tol = 0.0) const;
};

double yaw_rate_bound(
  double mu, double x_dot_p, const vehicle::VehicleParams & params = {},
  YawBound mode = YawBound::kNeutralSteer);

/// Rows encoding +-(y_dot_p - (p + b) r) <= x_dot_p * alpha_sat_r.
void lat_vel_rows(
  const vehicle::VehicleParams & params, double x_dot_p, StabConstraints & out);

StabConstraints assemble_stab_constraints(
  const vehicle::VehicleParams & params, double x_dot_p,
  YawBound mode = YawBound::kNeutralSteer);

}  // namespace rmpc::stability
