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

#include "rmpc/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace rmpc::control
{

QpWeights QpWeights::avoidance()
{
  QpWeights w;
  w.Q << 1.0, 1.0, 1.0, 5.0, 0.0;
  w.lambda_stab << 5.0, 5.0, 1e3, 1e3;
  w.lambda_stab *= 1e2;
  w.e_y_scale = 3.8;
  return w;
}

QpWeights QpWeights::tracking()
{
  QpWeights w;
  w.Q << 1.0, 5.0, 1.0, 10.0, 0.0;
  w.lambda_stab << 5.0, 5.0, 1e2, 1e2;
  w.lambda_stab *= 1e4;
  w.e_y_scale = 3.1;
  return w;
}

StateVector QpWeights::state_scales(double x_dot_p, double mu) const
{
  StateVector s;
  s << lat_vel_factor * x_dot_p, yaw_rate_factor * mu * kGravity / x_dot_p, heading_scale,
    e_y_scale, 1.0;
  return s;
}

double QpWeights::input_scale(const vehicle::VehicleParams & params)
{
  return params.friction * params.normal_load_front;
}

void ControllerConfig::validate() const
{
  params.validate();
  grid.validate();
  if ((w.array() < 0.0).any()) {
    throw InvalidArgument("disturbance half-widths must be nonnegative");
  }
  if (!(steering_limit > 0.0)) {
    throw InvalidArgument("steering limit must be positive");
  }
  for (const auto * q : {&avoidance, &tracking}) {
    if ((q->Q.array() < 0.0).any() || !(q->R > 0.0) || !(q->S > 0.0) ||
        !(q->lambda_coll > 0.0) || !(q->lambda_stab.array() > 0.0).all()) {
      throw InvalidArgument("weights require Q >= 0 and positive R, S and slack costs");
    }
  }
}

lqr::LqrWeights lqr_weights(const QpWeights & w, double x_dot_p, const vehicle::VehicleParams & p)
{
  const StateVector scale = w.state_scales(x_dot_p, p.friction);
  lqr::LqrWeights out;
  out.Q.setZero();
  for (int j = 0; j < kNumStabStates; ++j) {
    out.Q(j, j) = w.Q(j) / (scale(j) * scale(j));
  }
  const double u = QpWeights::input_scale(p);
  out.R = w.R / (u * u);
  return out;
}

ControlSolution CondensedQp::recover(const Eigen::VectorXd & z) const
{
  ControlSolution sol;
  Eigen::VectorXd c = input_scale * z.head(n_control);
  sol.c.assign(c.data(), c.data() + c.size());
  sol.states.resize(free_response.size());
  for (std::size_t i = 0; i < free_response.size(); ++i) {
    sol.states[i] = free_response[i] + input_response[i] * c;
  }
  for (int r = 0; r < 4; ++r) {
    sol.eps_stab(r) = stab_scales(r) * z(n_control + r);
  }
  sol.eps_coll = coll_scale * z(n_control + 4);
  sol.objective = problem.objective(z) + objective_constant;
  return sol;
}

namespace
{

// Accumulates weight * (r + v'z)^2 into 1/2 z'Hz + g'z + const.
struct CostBuilder
{
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double constant{0.0};

  explicit CostBuilder(int n) : H(Eigen::MatrixXd::Zero(n, n)), g(Eigen::VectorXd::Zero(n)) {}

  void add_square(double weight, double r, const Eigen::RowVectorXd & v)
  {
    H.noalias() += 2.0 * weight * v.transpose() * v;
    g += 2.0 * weight * r * v.transpose();
    constant += weight * r * r;
  }
};

struct RowBuilder
{
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;

  void add(const Eigen::RowVectorXd & row, double b)
  {
    const double scale = row.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      rows.push_back(row / scale);
      rhs.push_back(b / scale);
    } else {
      rows.push_back(row);
      rhs.push_back(b);
    }
  }
};

}  // namespace

CondensedQp assemble_qp(const QpInputs & in)
{
  if (!in.tube || !in.stab || !in.weights || !in.grid) {
    throw InvalidArgument("assemble_qp: missing inputs");
  }
  const auto & grid = *in.grid;
  const int n_p = grid.horizon();
  const int n_c = grid.n_control;
  if (static_cast<int>(in.models.size()) < n_p || static_cast<int>(in.gains.size()) < n_p ||
      static_cast<int>(in.tube->size()) < n_p) {
    throw InvalidArgument("assemble_qp: per-step data shorter than the horizon");
  }
  const auto & w = *in.weights;
  const int n = n_c + 5;
  const int i_stab = n_c;
  const int i_coll = n_c + 4;
  const double u_scale = in.input_scale;

  CondensedQp out;
  out.n_control = n_c;
  out.input_scale = u_scale;
  const StateVector sigma = w.state_scales(in.x_dot_p, in.mu);
  out.stab_scales << sigma(kLatVelCp), sigma(kLatVelCp), sigma(kYawRate), sigma(kYawRate);
  out.coll_scale = w.e_y_scale;

  // Forward substitution s_i = a_i + M_i c.
  out.free_response.resize(n_p + 1);
  out.input_response.assign(n_p + 1, Eigen::MatrixXd::Zero(kNumStates, n_c));
  out.free_response[0] = in.x0;
  for (int i = 0; i < n_p; ++i) {
    const auto & d = in.models[i].discrete;
    const StateMatrix phi = d.A + d.B * in.gains[i];
    out.free_response[i + 1] = phi * out.free_response[i] + d.L;
    out.input_response[i + 1] = phi * out.input_response[i];
    out.input_response[i + 1].col(std::min(i, n_c - 1)) += d.B;
  }

  auto state_row = [&](int i, const GainRow & e) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
    v.head(n_c) = u_scale * (e * out.input_response[i]);
    return v;
  };
  auto unit = [&](int j, double value = 1.0) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
    v(j) = value;
    return v;
  };

  CostBuilder cost(n);
  for (int i = 0; i < n_p; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      if (w.Q(j) == 0.0) {
        continue;
      }
      GainRow e = GainRow::Zero();
      e(j) = 1.0;
      cost.add_square(w.Q(j) / (sigma(j) * sigma(j)), out.free_response[i](j), state_row(i, e));
    }
    cost.add_square(w.R, 0.0, unit(std::min(i, n_c - 1)));
  }
  for (int i = 0; i < n_c; ++i) {
    const double rate_scale = w.du_max * grid.dt(i);
    Eigen::RowVectorXd v = unit(i, u_scale / rate_scale);
    double r = 0.0;
    if (i == 0) {
      r = -in.c_prev / rate_scale;
    } else {
      v(i - 1) = -u_scale / rate_scale;
    }
    cost.add_square(w.S, r, v);
  }
  // Quadratic plus exact linear penalty on the normalized slacks.
  for (int r = 0; r < 4; ++r) {
    cost.H(i_stab + r, i_stab + r) += 2.0 * w.lambda_stab(r);
    cost.g(i_stab + r) += w.lambda_stab(r);
  }
  cost.H(i_coll, i_coll) += 2.0 * w.lambda_coll;
  cost.g(i_coll) += w.lambda_coll;

  RowBuilder rows;
  GainRow ey = GainRow::Zero();
  ey(kLateralError) = 1.0;
  const auto & stab = *in.stab;
  for (int i = 1; i <= n_p; ++i) {
    const auto & iv = (*in.tube)[i - 1].final_interval;
    const double a_ey = out.free_response[i](kLateralError);
    Eigen::RowVectorXd row = state_row(i, ey);
    row(i_coll) = -out.coll_scale;
    rows.add(row, iv.upper - a_ey);
    row = -state_row(i, ey);
    row(i_coll) = -out.coll_scale;
    rows.add(row, a_ey - iv.lower);

    for (int r = 0; r < stability::StabConstraints::kRows; ++r) {
      const GainRow e = stab.E.row(r);
      Eigen::RowVectorXd srow = state_row(i, e);
      srow(i_stab + r) = -out.stab_scales(r);
      rows.add(srow, stab.G(r) - e.dot(out.free_response[i]));
    }
  }
  const double bound = in.input_bound / u_scale;
  for (int j = 0; j < n_c; ++j) {
    rows.add(unit(j), bound);
    rows.add(unit(j, -1.0), bound);
    const double rate = w.du_max * grid.dt(j);
    if (j == 0) {
      rows.add(unit(0, u_scale), in.c_prev + rate);
      rows.add(unit(0, -u_scale), rate - in.c_prev);
    } else {
      Eigen::RowVectorXd v = unit(j, u_scale);
      v(j - 1) = -u_scale;
      rows.add(v, rate);
      rows.add(-v, rate);
    }
  }
  for (int r = 0; r < 5; ++r) {
    rows.add(unit(i_stab + r, -1.0), 0.0);
  }

  auto & qp = out.problem;
  qp.H = 0.5 * (cost.H + cost.H.transpose());
  qp.g = cost.g;
  qp.G.resize(static_cast<Eigen::Index>(rows.rows.size()), n);
  qp.h.resize(static_cast<Eigen::Index>(rows.rhs.size()));
  for (std::size_t k = 0; k < rows.rows.size(); ++k) {
    qp.G.row(static_cast<Eigen::Index>(k)) = rows.rows[k];
    qp.h(static_cast<Eigen::Index>(k)) = rows.rhs[k];
  }
  out.objective_constant = cost.constant;
  return out;
}

WeightSet select_weight_set(
  std::span<const tube::Obstacle> stretched, double s_d, double x_dot_p,
  const ltv::TimeGrid & grid, const vehicle::VehicleParams & params)
{
  const double lo = s_d - params.cg_to_rear;
  const double hi = s_d + x_dot_p * grid.duration();
  for (const auto & o : stretched) {
    if (o.s_end >= lo && o.s_start <= hi) {
      return WeightSet::kAvoidance;
    }
  }
  return WeightSet::kTracking;
}

double steering_from_force(
  double u_star, const vehicle::ErrorState & x, double x_dot_p,
  const vehicle::VehicleParams & params, double limit)
{
  const double alpha_f = vehicle::inverse_tire_force(
    u_star, params.stiffness_front, params.friction, params.normal_load_front);
  const double y_dot = x.y_dot_p - params.cp_distance() * x.phi_dot;
  const double delta = (y_dot + params.cg_to_front * x.phi_dot) / x_dot_p - alpha_f;
  return std::clamp(delta, -limit, limit);
}

double force_from_steering(
  double steering, const vehicle::ErrorState & x, double x_dot_p,
  const vehicle::VehicleParams & params)
{
  const double y_dot = x.y_dot_p - params.cp_distance() * x.phi_dot;
  const double alpha_f = (y_dot + params.cg_to_front * x.phi_dot) / x_dot_p - steering;
  return vehicle::brush_tire_force(
    alpha_f, params.stiffness_front, params.friction, params.normal_load_front);
}

Controller::Controller(ControllerConfig config) : config_(std::move(config))
{
  config_.validate();
}

void Controller::reset()
{
  previous_states_.clear();
  c_prev_ = 0.0;
  last_steering_ = 0.0;
  seed_from_steering_ = false;
}

void Controller::set_applied_steering(double steering)
{
  last_steering_ = steering;
  seed_from_steering_ = true;
}

namespace
{

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
    .count();
}

}  // namespace

StepOutput Controller::step(const vehicle::ErrorState & measurement, const StepContext & ctx)
{
  StepOutput out;
  out.steering = last_steering_;
  const auto & cfg = config_;
  const auto & grid = cfg.grid;
  const int n_p = grid.horizon();
  try {
    if (!ctx.path || !ctx.road) {
      throw InvalidArgument("step context requires a path and road bounds");
    }
    if (!(ctx.x_dot_p > 0.0)) {
      throw InvalidArgument("controller requires positive speed");
    }
    const auto t_setup = std::chrono::steady_clock::now();
    const auto * path = ctx.path;
    const ltv::CurvatureFn curvature = [path](double s) { return path->curvature_at(s); };

    out.models = ltv::build_prediction_models(
      measurement, previous_states_, curvature, cfg.params, grid, ctx.x_dot_p, cfg.policy);

    const auto inflated = tube::inflate_for_footprint(ctx.obstacles, cfg.params);
    const auto stretched = tube::stretch_obstacles(inflated, ctx.x_dot_p, grid, measurement.s_d);
    out.weight_set =
      select_weight_set(stretched, measurement.s_d, ctx.x_dot_p, grid, cfg.params);
    const QpWeights & weights =
      out.weight_set == WeightSet::kAvoidance ? cfg.avoidance : cfg.tracking;

    out.gains = lqr::compute_lqr_gains(
      out.models, grid, lqr_weights(weights, ctx.x_dot_p, cfg.params));
    const auto per_step = out.gains.per_step(grid);
    const auto phi = tube::error_transition(out.models, per_step);

    const auto s_samples = ltv::sample_path_distances(measurement.s_d, ctx.x_dot_p, grid);
    const auto corridor = tube::build_active_constraints(stretched, *ctx.road, cfg.params.width);
    const auto raw = tube::discretize_tube(corridor, s_samples);

    const tube::DisturbanceSet w =
      cfg.mode == Mode::kRmpc ? cfg.w : tube::DisturbanceSet::Zero();
    auto topt = cfg.tightening;
    topt.policy = cfg.policy;
    out.tightening = tube::tighten_bounds(raw, phi, w, grid.n_control, topt);

    std::vector<double> e_phi_prev(n_p);
    for (int i = 1; i <= n_p; ++i) {
      e_phi_prev[i - 1] = out.models[std::min(i, n_p - 1)].frame.e_phi;
    }
    out.tube = tube::convexify_width(raw, out.tightening, e_phi_prev, cfg.params);
    out.stab = stability::assemble_stab_constraints(cfg.params, ctx.x_dot_p, cfg.yaw_bound);

    QpInputs in;
    in.models = out.models;
    in.gains = per_step;
    in.tube = &out.tube;
    in.stab = &out.stab;
    in.weights = &weights;
    in.x0 = measurement.to_vector();
    if (seed_from_steering_ && previous_states_.empty()) {
      const double u_applied =
        force_from_steering(last_steering_, measurement, ctx.x_dot_p, cfg.params);
      c_prev_ = u_applied - per_step.front().dot(measurement.to_vector());
    }
    in.c_prev = c_prev_;
    in.x_dot_p = ctx.x_dot_p;
    in.mu = cfg.params.friction;
    in.input_scale = QpWeights::input_scale(cfg.params);
    in.input_bound = in.input_scale;
    in.grid = &grid;
    const CondensedQp qp = assemble_qp(in);
    out.setup_ms = elapsed_ms(t_setup);
    out.problem = qp.problem;
    out.objective_constant = qp.objective_constant;

    const auto t_solve = std::chrono::steady_clock::now();
    const auto res = qp::solve_qp(qp.problem, cfg.qp);
    out.solve_ms = elapsed_ms(t_solve);

    out.solution = qp.recover(res.x);
    out.solution.iterations = res.iterations;
    out.solution.residuals = res.residuals;

    out.u_star = per_step[0].dot(in.x0) + out.solution.c[0];
    out.steering = steering_from_force(
      out.u_star, measurement, ctx.x_dot_p, cfg.params, cfg.steering_limit);

    previous_states_ = out.solution.states;
    c_prev_ = out.solution.c[0];
    seed_from_steering_ = false;
    last_steering_ = out.steering;
  } catch (const qp::QpSolveError & e) {
    out.ok = false;
    out.solver_failure = true;
    out.failure = e.what();
    out.steering = last_steering_;
  } catch (const Error & e) {
    out.ok = false;
    out.failure = e.what();
    out.steering = last_steering_;
  }
  return out;
}

}  // namespace rmpc::control
