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

#include "rmpc/admissible_tube.hpp"
#include "rmpc/common.hpp"
#include "rmpc/lqr.hpp"
#include "rmpc/ltv_model.hpp"
#include "rmpc/path_frame.hpp"
#include "rmpc/qp_solver.hpp"
#include "rmpc/stability_envelope.hpp"
#include "rmpc/vehicle_dynamics.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rmpc::control
{

enum class Mode { kRmpc, kDmpc };
enum class WeightSet { kAvoidance, kTracking };

/// Cost weights and the normalization scales they act on.
struct QpWeights
{
  StateVector Q{StateVector::Zero()};
  double R{4.0};
  double S{4.0};
  double lambda_coll{1e5};
  StabVector lambda_stab{StabVector::Ones()};
  double e_y_scale{3.8};          // m
  double heading_scale{0.2};      // rad
  double lat_vel_factor{0.2};     // lateral velocity scale / x_dot_p
  double yaw_rate_factor{0.9};    // yaw rate scale / (mu g / x_dot_p)
  double du_max{12000.0};         // N/s

  static QpWeights avoidance();
  static QpWeights tracking();

  /// Per-state normalization [u_yp, r, dphi, e_y, 1] at speed x_dot_p.
  StateVector state_scales(double x_dot_p, double mu) const;
  /// Force scale U_max = mu Fz_f (per tire).
  static double input_scale(const vehicle::VehicleParams & params);
};

struct ControllerConfig
{
  vehicle::VehicleParams params;  // controller model, friction = mu_c
  ltv::TimeGrid grid;
  QpWeights avoidance{QpWeights::avoidance()};
  QpWeights tracking{QpWeights::tracking()};
  tube::DisturbanceSet w{tube::default_disturbance_set()};
  Mode mode{Mode::kRmpc};
  double steering_limit{0.5235987755982988};  // rad, 30 deg
  stability::YawBound yaw_bound{stability::YawBound::kNeutralSteer};
  tube::TighteningOptions tightening;
  qp::QpOptions qp;
  ExecutionPolicy policy{ExecutionPolicy::kParallel};

  void validate() const;
};

/// Everything the controller needs from the world at one tick.
struct StepContext
{
  double time{0.0};
  double x_dot_p{0.0};
  const path::ReferencePath * path{nullptr};
  const path::RoadBounds * road{nullptr};
  std::span<const tube::Obstacle> obstacles;  // currently perceived, unstretched
};

struct ControlSolution
{
  std::vector<double> c;              // N_c force perturbations, N per tire
  std::vector<StateVector> states;    // nominal s_0..s_Np
  StabVector eps_stab{StabVector::Zero()};
  double eps_coll{0.0};
  double objective{0.0};
  int iterations{0};
  qp::KktResiduals residuals;
};

/// Condensed QP over z = [c / U_max, eps_stab / sigma, eps_coll / e_y_scale].
struct CondensedQp
{
  qp::QpProblem problem;
  double objective_constant{0.0};
  double input_scale{1.0};
  StabVector stab_scales{StabVector::Ones()};
  double coll_scale{1.0};
  std::vector<StateVector> free_response;          // a_i, i = 0..N_p
  std::vector<Eigen::MatrixXd> input_response;     // M_i (5 x N_c)
  int n_control{0};

  int num_vars() const { return n_control + 5; }
  ControlSolution recover(const Eigen::VectorXd & z) const;
};

struct QpInputs
{
  std::span<const ltv::StepModel> models;
  std::span<const GainRow> gains;  // per step, scheduled
  const tube::TubeBounds * tube{nullptr};
  const stability::StabConstraints * stab{nullptr};
  const QpWeights * weights{nullptr};
  StateVector x0{StateVector::Zero()};
  double c_prev{0.0};
  double x_dot_p{0.0};
  double mu{0.55};
  double input_bound{0.0};  // |c| limit, N per tire
  double input_scale{1.0};
  const ltv::TimeGrid * grid{nullptr};
};

CondensedQp assemble_qp(const QpInputs & in);

lqr::LqrWeights lqr_weights(const QpWeights & w, double x_dot_p, const vehicle::VehicleParams & p);

struct StepOutput
{
  double steering{0.0};
  double u_star{0.0};
  bool ok{true};
  std::string failure;
  bool solver_failure{false};
  WeightSet weight_set{WeightSet::kTracking};
  ControlSolution solution;
  tube::TubeBounds tube;
  tube::Tightening tightening;
  stability::StabConstraints stab;
  lqr::GainSchedule gains;
  std::vector<ltv::StepModel> models;
  qp::QpProblem problem;  // the condensed QP that was solved
  double objective_constant{0.0};
  double setup_ms{0.0};   // model, gain and tightening setup
  double solve_ms{0.0};   // QP only
};

/// Chooses the weight set: avoidance whenever a stretched obstacle overlaps
/// the path stretch covered by the horizon.
WeightSet select_weight_set(
  std::span<const tube::Obstacle> stretched, double s_d, double x_dot_p,
  const ltv::TimeGrid & grid, const vehicle::VehicleParams & params);

/// Front per-tire force produced by `steering` at the measured state, small-angle
/// slip. Inverse of steering_from_force inside the steering limit.
double force_from_steering(
  double steering, const vehicle::ErrorState & x, double x_dot_p,
  const vehicle::VehicleParams & params);

/// Steering angle delivering front per-tire force `u_star` at the measured state.
double steering_from_force(
  double u_star, const vehicle::ErrorState & x, double x_dot_p,
  const vehicle::VehicleParams & params, double limit);

/// Stateful receding-horizon controller. One instance per vehicle; not
/// thread-safe.
class Controller
{
public:
  explicit Controller(ControllerConfig config);

  StepOutput step(const vehicle::ErrorState & measurement, const StepContext & context);

  const ControllerConfig & config() const { return config_; }
  const std::vector<StateVector> & previous_states() const { return previous_states_; }
  double last_steering() const { return last_steering_; }
  void reset();
  /// Steering already applied when the controller takes over. Seeds the
  /// input-rate constraint of the first step; without it c_prev starts at 0.
  void set_applied_steering(double steering);

private:
  ControllerConfig config_;
  std::vector<StateVector> previous_states_;
  double c_prev_{0.0};
  double last_steering_{0.0};
  bool seed_from_steering_{false};
};

}  // namespace rmpc::control
