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
#include "rmpc/ltv_model.hpp"
#include "rmpc/scenario.hpp"

#include <span>
#include <string>

namespace rmpc::sim
{

/// x_next - (A_d x + B_d u + L_d)
StateVector one_step_residual(
  const ltv::DiscreteModel & model, const StateVector & x, double u, const StateVector & x_next);

struct IdentificationResult
{
  tube::DisturbanceSet w{tube::DisturbanceSet::Zero()};
  StateVector max_residual{StateVector::Zero()};
  int samples{0};
};

/// Runs each trial in closed loop and bounds the one-step prediction error
/// of the controller's step-0 model, then adds `sensor_margin`.
IdentificationResult estimate_disturbance_set(
  std::span<const ScenarioConfig> trials, const StateVector & sensor_margin = StateVector::Zero());

/// "w = ..." line loadable by the scenario parser.
std::string disturbance_fragment(const tube::DisturbanceSet & w);

}  // namespace rmpc::sim
