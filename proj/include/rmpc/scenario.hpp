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
#include "rmpc/controller.hpp"
#include "rmpc/path_frame.hpp"
#include "rmpc/vehicle_dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rmpc::sim
{

/// Raised for malformed or inconsistent scenario files.
class ConfigError : public InvalidArgument
{
public:
  using InvalidArgument::InvalidArgument;
};

struct InitialState
{
  double e_y{0.0};
  double e_phi{0.0};
  double s_d{0.0};
  double y_dot{0.0};
  double phi_dot{0.0};
  /// Start in the plant's steady cornering equilibrium for the local curvature;
  /// overrides y_dot, phi_dot and e_phi.
  bool steady_state{true};
};

struct ScenarioConfig
{
  std::string name{"scenario"};
  std::vector<path::Segment> segments{{1000.0, 0.0}};
  std::vector<path::RoadBounds::Section> road{{0.0, -1.85, 5.55}};
  std::vector<tube::Obstacle> obstacles;
  double speed{18.0};
  double mu_plant{0.55};
  double duration{10.0};
  double controller_dt{0.03};
  double substep{0.001};
  InitialState initial;
  bool noise{false};
  StateVector noise_bounds{StateVector::Zero()};  // half-widths of sensor noise
  std::uint64_t seed{1};
  bool timing{false};  // record wall-clock solve times in run.csv
  control::ControllerConfig controller;

  void validate() const;
  path::ReferencePath make_path() const;
  path::RoadBounds make_road() const;
};

ScenarioConfig parse_scenario(const std::string & text);
ScenarioConfig load_scenario(const std::filesystem::path & file);

}  // namespace rmpc::sim
