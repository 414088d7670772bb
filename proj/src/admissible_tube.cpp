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

#include "rmpc/admissible_tube.hpp"

#include "rmpc/linear_program.hpp"

#include <algorithm>
#include <cmath>

namespace rmpc::tube
{

std::vector<Obstacle> stretch_obstacles(
  std::span<const Obstacle> obstacles, double x_dot_p, const ltv::TimeGrid & grid, double s_now)
{
  const double short_end = s_now + x_dot_p * grid.n_short * grid.dt_short;
  std::vector<Obstacle> out;
  out.reserve(obstacles.size());
  for (Obstacle o : obstacles) {
    if (!o.stretched) {
      const double dt = o.s_end <= short_end ? grid.dt_short : grid.dt_long;
      o.s_start -= x_dot_p * dt;
      o.s_end += x_dot_p * dt;
      o.stretched = true;
    }
    out.push_back(o);
  }
  return out;
}

std::vector<Obstacle> inflate_for_footprint(
  std::span<const Obstacle> obstacles, const vehicle::VehicleParams & params)
{
  std::vector<Obstacle> out(obstacles.begin(), obstacles.end());
  for (auto & o : out) {
    o.s_start -= params.cg_to_front;
    o.s_end += params.cg_to_rear;
  }
  return out;
}

std::vector<Obstacle> merge_obstacles(std::span<const Obstacle> obstacles)
{
  std::vector<Obstacle> sorted(obstacles.begin(), obstacles.end());
  std::sort(sorted.begin(), sorted.end(), [](const Obstacle & a, const Obstacle & b) {
    return a.s_start < b.s_start;
  });
  std::vector<Obstacle> merged;
  for (const auto & o : sorted) {
    if (!(o.s_start < o.s_end)) {
      throw InvalidArgument("obstacle requires s_start < s_end");
    }
    if (!merged.empty() && o.s_start <= merged.back().s_end) {
      auto & m = merged.back();
      m.s_end = std::max(m.s_end, o.s_end);
      m.e_y_min = std::min(m.e_y_min, o.e_y_min);
      m.e_y_max = std::max(m.e_y_max, o.e_y_max);
      m.appear_time = std::min(m.appear_time, o.appear_time);
      m.stretched = m.stretched || o.stretched;
    } else {
      merged.push_back(o);
    }
  }
  return merged;
}

Corridor::Corridor(path::RoadBounds road, std::vector<Obstacle> obstacles, double vehicle_width)
: road_(std::move(road)), obstacles_(merge_obstacles(obstacles)), vehicle_width_(vehicle_width)
{
}

Interval Corridor::at(double s) const
{
  const auto & sec = road_.at(s);
  Interval iv{sec.right, sec.left, false};
  for (const auto & o : obstacles_) {
    if (s >= o.s_start && s <= o.s_end) {
      iv.lower = std::max(iv.lower, o.e_y_max);
    }
  }
  iv.infeasible = iv.width() < vehicle_width_;
  return iv;
}

Corridor build_active_constraints(
  std::span<const Obstacle> obstacles, const path::RoadBounds & road, double vehicle_width)
{
  return Corridor(road, std::vector<Obstacle>(obstacles.begin(), obstacles.end()), vehicle_width);
}

std::vector<Interval> discretize_tube(const Corridor & corridor, std::span<const double> s_samples)
{
  std::vector<Interval> out;
  out.reserve(s_samples.size());
  for (double s : s_samples) {
    out.push_back(corridor.at(s));
  }
  return out;
}

std::vector<StateMatrix> error_transition(
  std::span<const ltv::StepModel> models, std::span<const GainRow> gains)
{
  if (models.size() != gains.size()) {
    throw InvalidArgument("error_transition: one gain per prediction step required");
  }
  std::vector<StateMatrix> phi(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    phi[i] = models[i].discrete.A + models[i].discrete.B * gains[i];
  }
  return phi;
}

double box_support(const GainRow & direction, const StateVector & half_width)
{
  return direction.cwiseAbs().dot(half_width.transpose());
}

namespace
{

// h_i for one constraint direction, decomposed into the support of the new
// disturbance and the support of the propagated set S^{i-1}.
struct Support
{
  double value{0.0};
  int maximizations{0};
};

Support reach_support_closed_form(
  const GainRow & e, std::span<const StateMatrix> phi, int i, const StateVector & w,
  const StateVector & w0)
{
  // term m carries E Phi^{i-1} ... Phi^{m+1}; m = i-1 is E itself
  GainRow v = e;
  double total = box_support(v, w);
  for (int m = i - 2; m >= 0; --m) {
    v = v * phi[m + 1];
    total += box_support(v, w);
  }
  v = v * phi[0];
  total += box_support(v, w0);
  return {total, 2};
}

Support reach_support_lp(
  const GainRow & e, std::span<const StateMatrix> phi, int i, const StateVector & w,
  const StateVector & w0)
{
  const double fresh = lp::maximize_over_box(e.transpose(), w).objective;

  // S^{i-1} generated by x0 in W0 and w_0..w_{i-2} in W.
  const GainRow d = e * phi[i - 1];
  const int n_blocks = i;
  Eigen::VectorXd c(kNumStates * n_blocks);
  Eigen::VectorXd bounds(kNumStates * n_blocks);
  GainRow v = d;
  for (int m = i - 2; m >= 0; --m) {
    c.segment<kNumStates>(kNumStates * (m + 1)) = v.transpose();
    bounds.segment<kNumStates>(kNumStates * (m + 1)) = w;
    v = v * phi[m];
  }
  c.head<kNumStates>() = v.transpose();
  bounds.head<kNumStates>() = w0;
  const double propagated = lp::maximize_over_box(c, bounds).objective;
  return {fresh + propagated, 2};
}

}  // namespace

Tightening tighten_bounds(
  std::span<const Interval> raw, std::span<const StateMatrix> transitions,
  const DisturbanceSet & w, int n_control, const TighteningOptions & options)
{
  const int n_p = static_cast<int>(raw.size());
  if (static_cast<int>(transitions.size()) < n_p) {
    throw InvalidArgument("tighten_bounds: need one transition matrix per step");
  }
  if ((w.array() < 0.0).any() || (options.initial_error.array() < 0.0).any()) {
    throw InvalidArgument("tighten_bounds: disturbance half-widths must be nonnegative");
  }
  if (n_control <= 0 || n_control > n_p) {
    throw InvalidArgument("tighten_bounds: control horizon out of range");
  }
  const int n_eval = options.tail == TailMode::kFrozen ? n_control : n_p;

  GainRow up = GainRow::Zero();
  up(kLateralError) = 1.0;
  const GainRow down = -up;
  const auto & w0 = options.initial_error;

  Tightening t;
  t.h_upper.assign(n_p, 0.0);
  t.h_lower.assign(n_p, 0.0);
  std::vector<int> counts(n_eval, 0);

  auto eval = [&](int k) {
    const int i = k + 1;
    const Support su = options.backend == TighteningBackend::kClosedForm
                         ? reach_support_closed_form(up, transitions, i, w, w0)
                         : reach_support_lp(up, transitions, i, w, w0);
    const Support sl = options.backend == TighteningBackend::kClosedForm
                         ? reach_support_closed_form(down, transitions, i, w, w0)
                         : reach_support_lp(down, transitions, i, w, w0);
    t.h_upper[k] = su.value;
    t.h_lower[k] = sl.value;
    counts[k] = su.maximizations + sl.maximizations;
  };

  if (options.policy == ExecutionPolicy::kSerial) {
    for (int k = 0; k < n_eval; ++k) {
      eval(k);
    }
  } else {
    std::vector<std::exception_ptr> errors(n_eval);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_eval; ++k) {
      try {
        eval(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (const auto & e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  }

  for (int k = n_eval; k < n_p; ++k) {
    t.h_upper[k] = t.h_upper[n_eval - 1];
    t.h_lower[k] = t.h_lower[n_eval - 1];
  }

  if (options.backend == TighteningBackend::kClosedForm) {
    t.h0_upper = box_support(up, w0);
    t.h0_lower = box_support(down, w0);
  } else {
    t.h0_upper = lp::maximize_over_box(up.transpose(), w0).objective;
    t.h0_lower = lp::maximize_over_box(down.transpose(), w0).objective;
  }
  t.lp_count = 2;
  for (int c : counts) {
    t.lp_count += c;
  }

  t.intervals.resize(n_p);
  for (int k = 0; k < n_p; ++k) {
    Interval iv{raw[k].lower + t.h_lower[k], raw[k].upper - t.h_upper[k], raw[k].infeasible};
    if (iv.empty()) {
      const double mid = 0.5 * (iv.lower + iv.upper);
      iv = {mid, mid, true};
    }
    t.intervals[k] = iv;
  }
  return t;
}

double effective_half_width(double e_phi, const vehicle::VehicleParams & params)
{
  return 0.5 * params.width * std::abs(std::cos(e_phi)) +
         params.cg_to_front * std::abs(std::sin(e_phi));
}

TubeBounds convexify_width(
  std::span<const Interval> raw, const Tightening & tightened,
  std::span<const double> e_phi_prev, const vehicle::VehicleParams & params)
{
  const std::size_t n = raw.size();
  if (tightened.intervals.size() != n || e_phi_prev.size() != n) {
    throw InvalidArgument("convexify_width: sequence lengths differ");
  }
  TubeBounds out(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto & step = out[k];
    step.raw = raw[k];
    step.h_lower = tightened.h_lower[k];
    step.h_upper = tightened.h_upper[k];
    step.f_width = effective_half_width(e_phi_prev[k], params);
    const auto & t = tightened.intervals[k];
    Interval fin{t.lower + step.f_width, t.upper - step.f_width, t.infeasible};
    if (fin.empty()) {
      const double mid = 0.5 * (fin.lower + fin.upper);
      fin = {mid, mid, true};
    }
    step.final_interval = fin;
  }
  return out;
}

}  // namespace rmpc::tube
