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

#include <functional>

namespace rmpc::vehicle
{

/// Physical constants of the single-track model. Tire quantities are per tire;
/// the factor two for each axle lives in the dynamics.
struct VehicleParams
{
  double mass{1260.0};          // kg
  double yaw_inertia{1343.1};   // kg m^2
  double cg_to_front{1.04};     // m
  double cg_to_rear{1.56};      // m
  double width{1.695};          // m
  double stiffness_front{51650.0};  // N/rad
  double stiffness_rear{38160.0};   // N/rad
  double normal_load_front{2704.4};  // N
  double normal_load_rear{2704.4};   // N
  double friction{0.55};

  double wheelbase() const { return cg_to_front + cg_to_rear; }

  /// Distance from the CG forward to the center of percussion, Iz / (m b).
  double cp_distance() const { return yaw_inertia / (mass * cg_to_rear); }

  /// Throws InvalidArgument unless every constant is finite and positive.
  void validate() const;
};

/// Error-state vector of the prediction model.
struct ErrorState
{
  double y_dot_p{0.0};  // lateral velocity at CP, m/s
  double phi_dot{0.0};  // yaw rate, rad/s
  double e_phi{0.0};    // heading error, rad
  double e_y{0.0};      // lateral error, m (left positive)
  double s_d{0.0};      // path distance, m

  StateVector to_vector() const;
  static ErrorState from_vector(const StateVector & x);
};

/// Rigid-body pose and velocities in the global frame.
struct GlobalState
{
  double x{0.0};
  double y{0.0};
  double phi{0.0};
  double y_dot{0.0};  // body lateral velocity at CG
  double x_dot{0.0};  // body longitudinal velocity, > 0
  double phi_dot{0.0};
};

/// Full plant state: global rigid-body state plus the path-frame errors of
/// the CG, integrated together.
struct PlantState
{
  GlobalState body;
  double e_phi{0.0};
  double e_y{0.0};
  double s_d{0.0};
};

/// Time derivative of [x, y, phi, y_dot, phi_dot, e_phi, e_y, s_d].
/// The longitudinal speed is held constant and has no entry.
using PlantVector = Eigen::Matrix<double, 8, 1>;

PlantVector pack(const PlantState & state);
PlantState unpack(const PlantVector & v, double x_dot);

enum class SlipForm { kSmallAngle, kExact };

struct SlipAngles
{
  double front{0.0};
  double rear{0.0};
};

struct BodyAccelerations
{
  double y_ddot{0.0};    // d/dt of body lateral velocity at CG
  double phi_ddot{0.0};  // yaw acceleration
};

/// Brush tire lateral force for slip angle alpha. Saturates at -mu Fz sgn(alpha).
double brush_tire_force(double alpha, double stiffness, double mu, double normal_load);

/// Local cornering stiffness -dF/dalpha of the brush model; zero in saturation.
double brush_tire_local_stiffness(
  double alpha, double stiffness, double mu, double normal_load);

/// atan(3 mu Fz / C).
double tire_saturation_angle(double stiffness, double mu, double normal_load);

/// Slip angle producing the requested force on the unsaturated branch.
/// Requests beyond the friction limit clamp to the saturation angle.
double inverse_tire_force(double force, double stiffness, double mu, double normal_load);

SlipAngles slip_angles(
  const GlobalState & state, double steering, const VehicleParams & params, SlipForm form);

/// y_dot + p * phi_dot
double cp_lateral_velocity(double y_dot, double phi_dot, double cp_distance);

/// Rigid-body accelerations for given per-tire lateral forces in the body frame.
BodyAccelerations body_accelerations(
  const GlobalState & state, double front_force, double rear_force,
  const VehicleParams & params);

/// Right-hand side of the nonlinear single-track model with exact slip angles,
/// brush tires at friction `mu_actual`, and path-error kinematics along a path
/// of curvature `curvature(s_d)`.
PlantVector plant_derivative(
  const PlantState & state, double steering, const VehicleParams & params,
  double mu_actual, const std::function<double(double)> & curvature);

/// Body lateral acceleration (v_dot + x_dot * phi_dot) of the nonlinear plant.
double lateral_acceleration(
  const PlantState & state, double steering, const VehicleParams & params, double mu_actual);

struct SteadyCornering
{
  double y_dot{0.0};    // body lateral velocity at CG
  double phi_dot{0.0};
  double e_phi{0.0};    // heading error holding e_y constant
  double steering{0.0};
};

/// Equilibrium of the nonlinear plant on a circle of curvature `kappa` with
/// e_y = 0. Throws Error when the demanded axle forces exceed friction.
SteadyCornering steady_state_cornering(
  const VehicleParams & params, double mu_actual, double x_dot, double kappa);

/// Controller measurement of the plant.
ErrorState measure(const PlantState & state, const VehicleParams & params);

}  // namespace rmpc::vehicle
