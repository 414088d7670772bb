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


#include "rmpc/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

namespace rmpc::sim
{
namespace
{

TEST(ScenarioParser, ReadsTheShippedScenarios)
{
  for (const char * name : {"scenario1_static.cfg", "scenario2_popup.cfg",
                            "scenario3_popup_low_mu.cfg", "scenario4_straight_popup.cfg"}) {
    const auto c = load_scenario(std::filesystem::path(RMPC_SCENARIO_DIR) / name);
    EXPECT_EQ(c.speed, 18.0) << name;
    EXPECT_EQ(c.controller.params.friction, 0.55) << name;
    EXPECT_EQ(c.obstacles.size(), 1u) << name;
  }
  const auto s3 = load_scenario(std::filesystem::path(RMPC_SCENARIO_DIR) / "scenario3_popup_low_mu.cfg");
  EXPECT_EQ(s3.mu_plant, 0.35);
  EXPECT_EQ(s3.obstacles[0].appear_time, 1.4);
  EXPECT_DOUBLE_EQ(s3.segments[0].curvature, 1.0 / 400.0);
}

TEST(ScenarioParser, FullKeySet)
{
  const auto c = parse_scenario(R"(
name = everything   # trailing comment
duration = 4
speed = 15
mu_controller = 0.7
mu_plant = 0.5
mode = dmpc
controller_dt = 0.03
substep = 0.0005
seed = 9
noise = on
noise_bounds = 0.01 0.01 0.001 0.002 0.002
timing = off
w = 0.1 0.1 0.01 0.01 0.01
path.segment = 50 0
path.segment = 100 0.01
road = 0 -2 4
road = 60 -1 3
obstacle = 30 35 -1 1
obstacle = 70 72 -0.5 0.5 2.5
initial.e_y = 0.3
initial.e_phi = 0.01
initial.s_d = 1
initial.y_dot = 0.1
initial.phi_dot = 0.02
initial.steady_state = off
grid.n_short = 20
grid.n_long = 4
grid.n_control = 8
grid.dt_short = 0.03
grid.dt_long = 0.25
vehicle.mass = 1500
vehicle.width = 1.8
weights.avoidance.Q = 1 2 3 4 0
weights.tracking.R = 7
weights.tracking.lambda_stab = 1 2 3 4
controller.steering_limit_deg = 20
controller.yaw_bound = axle
controller.policy = serial
tightening.backend = lp
tightening.tail = full
tightening.initial_error = 0 0 0 0.01 0
)");
  EXPECT_EQ(c.name, "everything");
  EXPECT_EQ(c.controller.mode, control::Mode::kDmpc);
  EXPECT_TRUE(c.noise);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.segments.size(), 2u);
  EXPECT_EQ(c.road.size(), 2u);
  EXPECT_EQ(c.obstacles[1].appear_time, 2.5);
  EXPECT_FALSE(c.initial.steady_state);
  EXPECT_EQ(c.controller.grid.n_control, 8);
  EXPECT_EQ(c.controller.params.mass, 1500.0);
  EXPECT_EQ(c.controller.avoidance.Q(3), 4.0);
  EXPECT_EQ(c.controller.tracking.R, 7.0);
  EXPECT_EQ(c.controller.tracking.lambda_stab(3), 4.0);
  EXPECT_NEAR(c.controller.steering_limit, 20.0 * M_PI / 180.0, 1e-15);
  EXPECT_EQ(c.controller.yaw_bound, stability::YawBound::kAxleLimited);
  EXPECT_EQ(c.controller.tightening.backend, tube::TighteningBackend::kLinearProgram);
  EXPECT_EQ(c.controller.tightening.tail, tube::TailMode::kFull);
  EXPECT_EQ(c.controller.w(0), 0.1);
}

TEST(ScenarioParser, DefaultsFillMissingGeometry)
{
  const auto c = parse_scenario("name = bare\n");
  EXPECT_EQ(c.segments.size(), 1u);
  EXPECT_EQ(c.road.size(), 1u);
  EXPECT_TRUE(c.obstacles.empty());
}

TEST(ScenarioParser, RejectsMalformedInput)
{
  const char * bad[] = {
    "speed\n",
    "colour = red\n",
    "speed = fast\n",
    "speed = -3\n",
    "mode = mpc\n",
    "substep = 0.007\n",
    "path.segment = 10\n",
    "path.segment = 2000 0.01\n",
    "obstacle = 5 4 -1 1\n",
    "obstacle = 4 5 -1\n",
    "road = 0 2 1\n",
    "noise = maybe\n",
    "seed = 1.5\n",
    "w = 1 2 3\n",
    "grid.n_control = 40\n",
    "tightening.backend = simplex\n",
  };
  for (const char * text : bad) {
    EXPECT_THROW(parse_scenario(text), ConfigError) << text;
  }
  EXPECT_THROW(load_scenario("/nonexistent/file.cfg"), ConfigError);
}

TEST(ScenarioParser, ErrorsNameTheLine)
{
  try {
    parse_scenario("name = x\n\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError & e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

}  // namespace
}  // namespace rmpc::sim
