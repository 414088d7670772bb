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


#include "oracles.hpp"
#include "rmpc/controller.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rmpc::control
{
namespace
{

struct World
{
  path::ReferencePath path{path::ReferencePath::arc(600.0, 1.0 / 400.0)};
  path::RoadBounds road{path::RoadBounds::constant(-1.85, 5.55)};
  std::vector<tube::Obstacle> obstacles;

  StepContext context(double t = 0.0) const
  {
    StepContext c;
    c.time = t;
    c.x_dot_p = 18.0;
    c.path = &path;
    c.road = &road;
    c.obstacles = obstacles;
    return c;
  }
};

ControllerConfig serial_config(Mode mode = Mode::kRmpc)
{
  ControllerConfig cfg;
  cfg.mode = mode;
  cfg.policy = ExecutionPolicy::kSerial;
  return cfg;
}

TEST(Controller, StraightOnPathNeedsNoSteering)
{
  World world;
  world.path = path::ReferencePath::straight(600.0);
  Controller ctl(serial_config());
  const auto out = ctl.step({}, world.context());
  ASSERT_TRUE(out.ok) << out.failure;
  EXPECT_NEAR(out.steering, 0.0, 1e-9);
  EXPECT_NEAR(out.u_star, 0.0, 1e-6);
  EXPECT_EQ(out.weight_set, WeightSet::kTracking);
}

TEST(Controller, CondensedProblemShape)
{
  World world;
  world.obstacles = {{37.0, 42.0, -0.9, 0.9, 0.0}};
  Controller ctl(serial_config());
  const auto out = ctl.step({}, world.context());
  ASSERT_TRUE(out.ok) << out.failure;
  const int n_c = ctl.config().grid.n_control;
  const int n_p = ctl.config().grid.horizon();
  EXPECT_EQ(out.problem.H.rows(), n_c + 5);
  // two corridor rows and four envelope rows per step, box and rate rows
  // per control move, and nonnegativity of the five slacks
  EXPECT_EQ(out.problem.G.rows(), 6 * n_p + 2 * n_c + 2 * n_c + 5);
  EXPECT_EQ(out.weight_set, WeightSet::kAvoidance);
  EXPECT_LE(out.solution.residuals.worst(), 1e-6);
}

TEST(Controller, NominalStatesFollowTheClosedLoopModels)
{
  World world;
  world.obstacles = {{37.0, 42.0, -0.9, 0.9, 0.0}};
  Controller ctl(serial_config());
  const vehicle::ErrorState x0{0.1, 0.02, 0.01, 0.2, 0.0};
  const auto out = ctl.step(x0, world.context());
  ASSERT_TRUE(out.ok) << out.failure;
  const auto & grid = ctl.config().grid;
  const auto gains = out.gains.per_step(grid);
  StateVector s = x0.to_vector();
  for (int i = 0; i < grid.horizon(); ++i) {
    const auto & d = out.models[i].discrete;
    const double c = out.solution.c[std::min(i, grid.n_control - 1)];
    s = d.A * s + d.B * (gains[i].dot(s) + c) + d.L;
    EXPECT_LT((s - out.solution.states[i + 1]).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + s.cwiseAbs().maxCoeff()))
      << i;
  }
  EXPECT_DOUBLE_EQ(out.u_star, gains[0].dot(x0.to_vector()) + out.solution.c[0]);
}

TEST(Controller, ObjectiveMatchesActiveSetOracle)
{
  World world;
  world.obstacles = {{37.0, 42.0, -0.9, 0.9, 0.0}};
  Controller ctl(serial_config());
  vehicle::ErrorState x{0.0, 0.0, 0.0, 0.0, 0.0};
  double c_prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto out = ctl.step(x, world.context(0.03 * k));
    ASSERT_TRUE(out.ok) << out.failure;
    const int n_c = ctl.config().grid.n_control;
    // holding the previous input satisfies the box and rate rows
    Eigen::VectorXd start = Eigen::VectorXd::Zero(out.problem.H.rows());
    start.head(n_c).setConstant(c_prev / QpWeights::input_scale(ctl.config().params));
    c_prev = out.solution.c.front();
    const auto feasible = oracle::lift_slacks(out.problem, start, n_c);
    ASSERT_TRUE(feasible.has_value());
    const auto ref = oracle::active_set_qp(out.problem, *feasible);
    ASSERT_TRUE(ref.converged);
    const auto ipm = qp::solve_qp(out.problem);
    const double cost = ref.objective + out.objective_constant;
    EXPECT_NEAR(ipm.objective + out.objective_constant, cost, 1e-6 * std::max(1.0, std::abs(cost)));
    x.s_d += 18.0 * 0.03;
  }
}

TEST(Controller, DmpcHasNoTightening)
{
  World world;
  world.obstacles = {{37.0, 42.0, -0.9, 0.9, 0.0}};
  Controller ctl(serial_config(Mode::kDmpc));
  const auto out = ctl.step({}, world.context());
  ASSERT_TRUE(out.ok);
  for (double h : out.tightening.h_upper) {
    EXPECT_EQ(h, 0.0);
  }
  Controller robust(serial_config(Mode::kRmpc));
  const auto r = robust.step({}, world.context());
  EXPECT_GT(r.tightening.h_upper.back(), 0.0);
}

TEST(Controller, SerialAndParallelGiveIdenticalSteering)
{
  World world;
  world.obstacles = {{37.0, 42.0, -0.9, 0.9, 0.0}};
  auto cfg = serial_config();
  Controller a(cfg);
  cfg.policy = ExecutionPolicy::kParallel;
  Controller b(cfg);
  vehicle::ErrorState x{};
  for (int k = 0; k < 5; ++k) {
    const auto oa = a.step(x, world.context());
    const auto ob = b.step(x, world.context());
    EXPECT_EQ(oa.steering, ob.steering);
    x.s_d += 0.54;
    x.e_y += 0.01;
  }
}

TEST(Controller, FailureHoldsThePreviousSteering)
{
  World world;
  Controller ctl(serial_config());
  auto ctx = world.context();
  ctx.road = nullptr;
  const auto out = ctl.step({}, ctx);
  EXPECT_FALSE(out.ok);
  EXPECT_FALSE(out.solver_failure);
  EXPECT_EQ(out.steering, ctl.last_steering());
}

TEST(WeightSelection, AvoidanceOnlyWithinTheHorizon)
{
  const ltv::TimeGrid g;
  const vehicle::VehicleParams p;
  const double reach = 18.0 * g.duration();
  std::vector<tube::Obstacle> near{{reach - 1.0, reach + 4.0, -1, 1, 0, true}};
  std::vector<tube::Obstacle> far{{reach + 5.0, reach + 9.0, -1, 1, 0, true}};
  std::vector<tube::Obstacle> behind{{-20.0, -p.cg_to_rear - 0.1, -1, 1, 0, true}};
  EXPECT_EQ(select_weight_set(near, 0.0, 18.0, g, p), WeightSet::kAvoidance);
  EXPECT_EQ(select_weight_set(far, 0.0, 18.0, g, p), WeightSet::kTracking);
  EXPECT_EQ(select_weight_set(behind, 0.0, 18.0, g, p), WeightSet::kTracking);
}

TEST(SteeringFromForce, InvertsTheFrontTire)
{
  const vehicle::VehicleParams p;
  const vehicle::ErrorState x{0.2, 0.05, 0.0, 0.0, 0.0};
  const double u = 800.0;
  const double delta = steering_from_force(u, x, 18.0, p, 0.5);
  const double y_dot = x.y_dot_p - p.cp_distance() * x.phi_dot;
  const vehicle::GlobalState body{0, 0, 0, y_dot, 18.0, x.phi_dot};
  const auto slip = vehicle::slip_angles(body, delta, p, vehicle::SlipForm::kSmallAngle);
  EXPECT_NEAR(
    vehicle::brush_tire_force(slip.front, p.stiffness_front, p.friction, p.normal_load_front), u,
    1e-6 * u);
  EXPECT_DOUBLE_EQ(steering_from_force(1e9, x, 18.0, p, 0.05), 0.05);
}

}  // namespace
}  // namespace rmpc::control
