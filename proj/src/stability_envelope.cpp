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

#include "rmpc/stability_envelope.hpp"

#include <algorithm>
#include <cmath>

namespace rmpc::stability
{

bool StabConstraints::contains(const StateVector & x, double tol) const
{
  return (violation(x).array() <= tol).all();
}

double yaw_rate_bound(
  double mu, double x_dot_p, const vehicle::VehicleParams & params, YawBound mode)
{
  if (!(x_dot_p > 0.0)) {
    throw InvalidArgument("yaw rate bound requires positive speed");
  }
  if (mode == YawBound::kNeutralSteer) {
    return mu * kGravity / x_dot_p;
  }
  // Steady-state cornering: each axle force F = m_axle * x_dot * r with static
  // axle share m_f = m b / L, m_r = m a / L.
  const double l = params.wheelbase();
  const double f_front_max = mu * 2.0 * params.normal_load_front;
  const double f_rear_max = mu * 2.0 * params.normal_load_rear;
  const double r_front = f_front_max * l / (params.mass * params.cg_to_rear * x_dot_p);
  const double r_rear = f_rear_max * l / (params.mass * params.cg_to_front * x_dot_p);
  return std::min(r_front, r_rear);
}

void lat_vel_rows(const vehicle::VehicleParams & params, double x_dot_p, StabConstraints & out)
{
  if (!(x_dot_p > 0.0)) {
    throw InvalidArgument("lateral velocity bound requires positive speed");
  }
  const double alpha_sat = vehicle::tire_saturation_angle(
    params.stiffness_rear, params.friction, params.normal_load_rear);
  const double lever = params.cp_distance() + params.cg_to_rear;
  out.E(0, kLatVelCp) = 1.0;
  out.E(0, kYawRate) = -lever;
  out.E(1, kLatVelCp) = -1.0;
  out.E(1, kYawRate) = lever;
  out.G(0) = x_dot_p * alpha_sat;
  out.G(1) = x_dot_p * alpha_sat;
}

StabConstraints assemble_stab_constraints(
  const vehicle::VehicleParams & params, double x_dot_p, YawBound mode)
{
  StabConstraints c;
  lat_vel_rows(params, x_dot_p, c);
  const double r_max = yaw_rate_bound(params.friction, x_dot_p, params, mode);
  c.E(2, kYawRate) = 1.0;
  c.E(3, kYawRate) = -1.0;
  c.G(2) = r_max;
  c.G(3) = r_max;
  return c;
}

}  // namespace rmpc::stability
