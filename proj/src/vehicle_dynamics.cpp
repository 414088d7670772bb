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

#include "rmpc/vehicle_dynamics.hpp"

#include <cmath>
#include <string>

namespace rmpc::vehicle
{
namespace
{

void check_tire_args(double stiffness, double mu, double normal_load)
{
  if (!(stiffness > 0.0) || !(mu > 0.0) || !(normal_load > 0.0)) {
    throw InvalidArgument("tire model requires positive stiffness, friction and normal load");
  }
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void VehicleParams::validate() const
{
  const double values[] = {mass,           yaw_inertia,       cg_to_front,       cg_to_rear,
                           width,          stiffness_front,   stiffness_rear,    normal_load_front,
                           normal_load_rear, friction};
  for (double v : values) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw InvalidArgument("vehicle parameters must be finite and positive");
    }
  }
}

StateVector ErrorState::to_vector() const
{
  StateVector x;
  x << y_dot_p, phi_dot, e_phi, e_y, s_d;
  return x;
}

ErrorState ErrorState::from_vector(const StateVector & x)
{
  return {x(kLatVelCp), x(kYawRate), x(kHeadingError), x(kLateralError), x(kPathDistance)};
}

PlantVector pack(const PlantState & s)
{
  PlantVector v;
  v << s.body.x, s.body.y, s.body.phi, s.body.y_dot, s.body.phi_dot, s.e_phi, s.e_y, s.s_d;
  return v;
}

PlantState unpack(const PlantVector & v, double x_dot)
{
  PlantState s;
  s.body = {v(0), v(1), v(2), v(3), x_dot, v(4)};
  s.e_phi = v(5);
  s.e_y = v(6);
  s.s_d = v(7);
  return s;
}

double tire_saturation_angle(double stiffness, double mu, double normal_load)
{
  check_tire_args(stiffness, mu, normal_load);
  return std::atan(3.0 * mu * normal_load / stiffness);
}

double brush_tire_force(double alpha, double stiffness, double mu, double normal_load)
{
  check_tire_args(stiffness, mu, normal_load);
  if (!std::isfinite(alpha)) {
    throw InvalidArgument("slip angle must be finite");
  }
  const double theta = 3.0 * mu * normal_load / stiffness;
  if (std::abs(alpha) >= std::atan(theta)) {
    return -mu * normal_load * sign(alpha);
  }
  const double t = std::tan(alpha);
  return -stiffness * t + stiffness / theta * std::abs(t) * t -
         stiffness / (3.0 * theta * theta) * t * t * t;
}

double brush_tire_local_stiffness(double alpha, double stiffness, double mu, double normal_load)
{
  check_tire_args(stiffness, mu, normal_load);
  if (!std::isfinite(alpha)) {
    throw InvalidArgument("slip angle must be finite");
  }
  const double theta = 3.0 * mu * normal_load / stiffness;
  if (std::abs(alpha) >= std::atan(theta)) {
    return 0.0;
  }
  // dF/dalpha = -C (1 - |tan a| / theta)^2 sec^2 a
  const double t = std::tan(alpha);
  const double r = 1.0 - std::abs(t) / theta;
  return stiffness * r * r * (1.0 + t * t);
}

double inverse_tire_force(double force, double stiffness, double mu, double normal_load)
{
  check_tire_args(stiffness, mu, normal_load);
  const double f_max = mu * normal_load;
  const double alpha_sat = std::atan(3.0 * mu * normal_load / stiffness);
  if (!(std::abs(force) < f_max)) {
    return -sign(force) * alpha_sat;
  }
  // On |u| < 1 with u = tan(alpha) / theta: F = -sgn(u) mu Fz (1 - (1 - |u|)^3).
  const double theta = 3.0 * mu * normal_load / stiffness;
  const double u = -sign(force) * (1.0 - std::cbrt(1.0 - std::abs(force) / f_max));
  return std::atan(theta * u);
}

SlipAngles slip_angles(
  const GlobalState & state, double steering, const VehicleParams & params, SlipForm form)
{
  if (!(state.x_dot > 0.0)) {
    throw InvalidArgument("slip angles require positive longitudinal velocity");
  }
  const double front_ratio = (state.y_dot + params.cg_to_front * state.phi_dot) / state.x_dot;
  const double rear_ratio = (state.y_dot - params.cg_to_rear * state.phi_dot) / state.x_dot;
  if (form == SlipForm::kExact) {
    return {std::atan(front_ratio) - steering, std::atan(rear_ratio)};
  }
  return {front_ratio - steering, rear_ratio};
}

double cp_lateral_velocity(double y_dot, double phi_dot, double cp_distance)
{
  return y_dot + cp_distance * phi_dot;
}

BodyAccelerations body_accelerations(
  const GlobalState & state, double front_force, double rear_force,
  const VehicleParams & params)
{
  BodyAccelerations acc;
  acc.y_ddot = -state.x_dot * state.phi_dot + 2.0 * (front_force + rear_force) / params.mass;
  acc.phi_ddot =
    (2.0 * params.cg_to_front * front_force - 2.0 * params.cg_to_rear * rear_force) /
    params.yaw_inertia;
  return acc;
}

namespace
{

struct AxleForces
{
  double front{0.0};  // body-frame lateral component, per tire
  double rear{0.0};
};

AxleForces tire_forces(
  const GlobalState & body, double steering, const VehicleParams & params, double mu_actual)
{
  const auto slip = slip_angles(body, steering, params, SlipForm::kExact);
  const double cornering_front =
    brush_tire_force(slip.front, params.stiffness_front, mu_actual, params.normal_load_front);
  const double cornering_rear =
    brush_tire_force(slip.rear, params.stiffness_rear, mu_actual, params.normal_load_rear);
  // No longitudinal tire force: F_yf = F_cf cos(delta).
  return {cornering_front * std::cos(steering), cornering_rear};
}

}  // namespace

PlantVector plant_derivative(
  const PlantState & state, double steering, const VehicleParams & params, double mu_actual,
  const std::function<double(double)> & curvature)
{
  const auto & body = state.body;
  const auto forces = tire_forces(body, steering, params, mu_actual);
  const auto acc = body_accelerations(body, forces.front, forces.rear, params);

  const double kappa = curvature(state.s_d);
  const double frame = 1.0 - kappa * state.e_y;
  if (!(frame > 0.0)) {
    throw FrameError(
      "path frame singular: 1 - kappa * e_y = " + std::to_string(frame));
  }
  const double c = std::cos(state.e_phi);
  const double s = std::sin(state.e_phi);
  const double s_d_dot = (body.x_dot * c - body.y_dot * s) / frame;

  PlantVector d;
  d(0) = body.x_dot * std::cos(body.phi) - body.y_dot * std::sin(body.phi);
  d(1) = body.x_dot * std::sin(body.phi) + body.y_dot * std::cos(body.phi);
  d(2) = body.phi_dot;
  d(3) = acc.y_ddot;
  d(4) = acc.phi_ddot;
  d(5) = body.phi_dot - kappa * s_d_dot;
  d(6) = body.y_dot * c + body.x_dot * s;
  d(7) = s_d_dot;
  return d;
}

double lateral_acceleration(
  const PlantState & state, double steering, const VehicleParams & params, double mu_actual)
{
  const auto forces = tire_forces(state.body, steering, params, mu_actual);
  return 2.0 * (forces.front + forces.rear) / params.mass;
}

SteadyCornering steady_state_cornering(
  const VehicleParams & params, double mu_actual, double x_dot, double kappa)
{
  if (!(x_dot > 0.0)) {
    throw InvalidArgument("steady cornering requires positive speed");
  }
  const double m = params.mass;
  const double a = params.cg_to_front;
  const double b = params.cg_to_rear;
  const double l = params.wheelbase();
  const double f_rear_max = mu_actual * params.normal_load_rear;
  const double f_front_max = mu_actual * params.normal_load_front;

  SteadyCornering ss;
  double speed = x_dot;
  for (int it = 0; it < 100; ++it) {
    const double phi_dot = kappa * speed;
    // Axle force split from the moment balance, per tire.
    const double rear = m * x_dot * phi_dot * a / (2.0 * l);
    const double front_body = m * x_dot * phi_dot * b / (2.0 * l);
    if (std::abs(rear) >= f_rear_max || std::abs(front_body) >= f_front_max) {
      throw Error("steady cornering demands more than the available friction");
    }
    const double alpha_r =
      inverse_tire_force(rear, params.stiffness_rear, mu_actual, params.normal_load_rear);
    const double y_dot = x_dot * std::tan(alpha_r) + b * phi_dot;
    double delta = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double alpha_f = inverse_tire_force(
        front_body / std::cos(delta), params.stiffness_front, mu_actual,
        params.normal_load_front);
      const double next = std::atan((y_dot + a * phi_dot) / x_dot) - alpha_f;
      const bool done = std::abs(next - delta) < 1e-15;
      delta = next;
      if (done) {
        break;
      }
    }
    const double next_speed = std::hypot(x_dot, y_dot);
    ss = {y_dot, phi_dot, -std::atan2(y_dot, x_dot), delta};
    if (std::abs(next_speed - speed) < 1e-13) {
      break;
    }
    speed = next_speed;
  }
  return ss;
}

ErrorState measure(const PlantState & state, const VehicleParams & params)
{
  return {
    cp_lateral_velocity(state.body.y_dot, state.body.phi_dot, params.cp_distance()),
    state.body.phi_dot, state.e_phi, state.e_y, state.s_d};
}

}  // namespace rmpc::vehicle
