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

#include "rmpc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rmpc::sim
{

std::array<Point, 4> footprint(
  double x, double y, double phi, const vehicle::VehicleParams & params,
  const path::ReferencePath & path)
{
  const double half = 0.5 * params.width;
  const std::array<std::array<double, 2>, 4> body{
    {{params.cg_to_front, half},
     {params.cg_to_front, -half},
     {-params.cg_to_rear, -half},
     {-params.cg_to_rear, half}}};
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  std::array<Point, 4> out;
  for (std::size_t k = 0; k < body.size(); ++k) {
    const double gx = x + body[k][0] * c - body[k][1] * s;
    const double gy = y + body[k][0] * s + body[k][1] * c;
    const auto err = path.global_to_path_errors({gx, gy, phi});
    out[k] = {err.s_d, err.e_y};
  }
  return out;
}

namespace
{

double segment_distance(const Point & p, const Point & a, const Point & b)
{
  const double dx = b.s - a.s;
  const double dy = b.e_y - a.e_y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.s - a.s) * dx + (p.e_y - a.e_y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.s - (a.s + t * dx), p.e_y - (a.e_y + t * dy));
}

template <std::size_t N, std::size_t M>
double separating_gap(const std::array<Point, N> & p, const std::array<Point, M> & q)
{
  double best = -std::numeric_limits<double>::infinity();
  auto test_axes = [&](const auto & poly) {
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const auto & a = poly[k];
      const auto & b = poly[(k + 1) % poly.size()];
      double nx = -(b.e_y - a.e_y);
      double ny = b.s - a.s;
      const double len = std::hypot(nx, ny);
      if (len == 0.0) {
        continue;
      }
      nx /= len;
      ny /= len;
      auto project = [&](const auto & poly2) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto & v : poly2) {
          const double d = v.s * nx + v.e_y * ny;
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
        return std::pair{lo, hi};
      };
      const auto [plo, phi] = project(p);
      const auto [qlo, qhi] = project(q);
      best = std::max(best, std::max(qlo - phi, plo - qhi));
    }
  };
  test_axes(p);
  test_axes(q);
  return best;
}

}  // namespace

double footprint_clearance(const std::array<Point, 4> & quad, const tube::Obstacle & obstacle)
{
  const std::array<Point, 4> rect{
    {{obstacle.s_start, obstacle.e_y_min},
     {obstacle.s_end, obstacle.e_y_min},
     {obstacle.s_end, obstacle.e_y_max},
     {obstacle.s_start, obstacle.e_y_max}}};
  const double gap = separating_gap(quad, rect);
  if (gap < 0.0) {
    return gap;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, segment_distance(quad[i], rect[j], rect[(j + 1) % 4]));
      best = std::min(best, segment_distance(rect[i], quad[j], quad[(j + 1) % 4]));
    }
  }
  return best;
}

namespace
{

struct Monitor
{
  const ScenarioConfig & config;
  const path::ReferencePath & path;
  const path::RoadBounds & road;
  const vehicle::VehicleParams & params;
  RunLog & log;

  // Returns true on collision.
  bool check(const vehicle::PlantState & st, double t)
  {
    const auto quad = footprint(st.body.x, st.body.y, st.body.phi, params, path);
    for (const auto & p : quad) {
      const auto & sec = road.at(p.s);
      log.road_excursion =
        std::max({log.road_excursion, p.e_y - sec.left, sec.right - p.e_y});
    }
    bool hit = false;
    for (const auto & o : config.obstacles) {
      const double c = footprint_clearance(quad, o);
      log.min_clearance = std::min(log.min_clearance, c);
      hit = hit || c < 0.0;
    }
    if (hit && !log.collision) {
      log.collision = true;
      log.collision_time = t;
    }
    return hit;
  }
};

vehicle::PlantVector rk4_step(
  const vehicle::PlantVector & v, double h, double steering, double x_dot,
  const vehicle::VehicleParams & params, double mu, const std::function<double(double)> & kappa)
{
  auto f = [&](const vehicle::PlantVector & s) {
    return vehicle::plant_derivative(vehicle::unpack(s, x_dot), steering, params, mu, kappa);
  };
  const vehicle::PlantVector k1 = f(v);
  const vehicle::PlantVector k2 = f(v + 0.5 * h * k1);
  const vehicle::PlantVector k3 = f(v + 0.5 * h * k2);
  const vehicle::PlantVector k4 = f(v + h * k3);
  return v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

RunLog run_scenario(const ScenarioConfig & config, const StepObserver & observer)
{
  config.validate();
  const auto path = config.make_path();
  const auto road = config.make_road();
  const auto & params = config.controller.params;
  const std::function<double(double)> kappa = [&path](double s) { return path.curvature_at(s); };

  RunLog log;
  Monitor monitor{config, path, road, params, log};

  vehicle::PlantState plant;
  double e_phi0 = config.initial.e_phi;
  double y_dot0 = config.initial.y_dot;
  double phi_dot0 = config.initial.phi_dot;
  double delta0 = 0.0;
  if (config.initial.steady_state) {
    const auto ss = vehicle::steady_state_cornering(
      params, config.mu_plant, config.speed, path.curvature_at(config.initial.s_d));
    e_phi0 = ss.e_phi;
    y_dot0 = ss.y_dot;
    phi_dot0 = ss.phi_dot;
    delta0 = ss.steering;
  }
  const auto pose = path.path_to_global(config.initial.e_y, e_phi0, config.initial.s_d);
  plant.body = {pose.x, pose.y, pose.phi, y_dot0, config.speed, phi_dot0};
  plant.e_phi = e_phi0;
  plant.e_y = config.initial.e_y;
  plant.s_d = config.initial.s_d;

  control::Controller controller(config.controller);
  controller.set_applied_steering(delta0);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const double dt = config.controller_dt;
  const int n_ticks = static_cast<int>(std::floor(config.duration / dt + 1e-9));
  const int n_sub = static_cast<int>(std::lround(dt / config.substep));
  const double h = dt / n_sub;

  if (monitor.check(plant, 0.0)) {
    log.truncated = true;
    log.reason = "collision at start";
    return log;
  }

  std::vector<tube::Obstacle> visible;
  for (int k = 0; k < n_ticks; ++k) {
    const double t = k * dt;
    const auto truth = vehicle::measure(plant, params);
    StateVector meas_v = truth.to_vector();
    if (config.noise) {
      for (int j = 0; j < kNumStates; ++j) {
        meas_v(j) += config.noise_bounds(j) * unit(rng);
      }
    }
    const auto meas = vehicle::ErrorState::from_vector(meas_v);

    visible.clear();
    for (const auto & o : config.obstacles) {
      if (o.appear_time <= t + 1e-9) {
        visible.push_back(o);
      }
    }
    control::StepContext ctx;
    ctx.time = t;
    ctx.x_dot_p = config.speed;
    ctx.path = &path;
    ctx.road = &road;
    ctx.obstacles = visible;
    const auto out = controller.step(meas, ctx);

    LogRow row;
    row.t = t;
    row.x = plant.body.x;
    row.y = plant.body.y;
    row.phi = plant.body.phi;
    row.ydot_p = truth.y_dot_p;
    row.phidot = truth.phi_dot;
    row.e_phi = truth.e_phi;
    row.e_y = truth.e_y;
    row.s_d = truth.s_d;
    row.delta = out.steering;
    StepDiagnostics diag;
    diag.ok = out.ok;
    diag.solver_failure = out.solver_failure;
    diag.failure = out.failure;
    diag.weight_set = out.weight_set;
    diag.measurement = meas_v;
    if (out.ok) {
      row.u_star = out.u_star;
      row.c0 = out.solution.c.front();
      row.eps_coll = out.solution.eps_coll;
      row.eps_stab = out.solution.eps_stab;
      row.ey_min_0 = out.tube.front().final_interval.lower;
      row.ey_max_0 = out.tube.front().final_interval.upper;
      row.h_nc = out.tightening.h_upper[config.controller.grid.n_control - 1];
      row.solve_ms = config.timing ? out.setup_ms + out.solve_ms : 0.0;
      diag.iterations = out.solution.iterations;
      diag.residuals = out.solution.residuals;
      diag.objective = out.solution.objective;
      diag.lp_count = out.tightening.lp_count;
      diag.setup_ms = out.setup_ms;
      diag.solve_ms = out.solve_ms;
      diag.s_samples = ltv::sample_path_distances(meas.s_d, config.speed, config.controller.grid);
      diag.tube = out.tube;
      diag.model0 = out.models.front().discrete;
    } else {
      ++log.controller_failures;
      log.solver_failures += out.solver_failure ? 1 : 0;
    }

    try {
      row.ay = vehicle::lateral_acceleration(plant, out.steering, params, config.mu_plant);
    } catch (const Error & e) {
      log.truncated = true;
      log.reason = e.what();
      break;
    }
    log.rows.push_back(row);
    log.diagnostics.push_back(std::move(diag));
    if (observer) {
      observer(meas, out, row);
    }

    bool stop = false;
    try {
      vehicle::PlantVector v = vehicle::pack(plant);
      for (int j = 0; j < n_sub; ++j) {
        v = rk4_step(v, h, out.steering, config.speed, params, config.mu_plant, kappa);
        plant = vehicle::unpack(v, config.speed);
        if (monitor.check(plant, t + (j + 1) * h)) {
          stop = true;
          break;
        }
      }
    } catch (const Error & e) {
      log.truncated = true;
      log.reason = e.what();
      break;
    }
    if (stop) {
      log.truncated = true;
      log.reason = "collision";
      break;
    }
  }
  return log;
}

}  // namespace rmpc::sim
