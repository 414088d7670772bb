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

#include "rmpc/identification.hpp"

#include "rmpc/simulation.hpp"

#include <fmt/format.h>

namespace rmpc::sim
{

StateVector one_step_residual(
  const ltv::DiscreteModel & model, const StateVector & x, double u, const StateVector & x_next)
{
  return x_next - (model.A * x + model.B * u + model.L);
}

IdentificationResult estimate_disturbance_set(
  std::span<const ScenarioConfig> trials, const StateVector & sensor_margin)
{
  if (trials.empty()) {
    throw InvalidArgument("disturbance identification needs at least one trial");
  }
  IdentificationResult res;
  for (const auto & trial : trials) {
    const RunLog log = run_scenario(trial);
    for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
      const auto & d = log.diagnostics[k];
      if (!d.ok || !log.diagnostics[k + 1].ok) {
        continue;
      }
      const StateVector r = one_step_residual(
        d.model0, d.measurement, log.rows[k].u_star, log.diagnostics[k + 1].measurement);
      res.max_residual = res.max_residual.cwiseMax(r.cwiseAbs());
      ++res.samples;
    }
  }
  res.w = res.max_residual + sensor_margin;
  return res;
}

std::string disturbance_fragment(const tube::DisturbanceSet & w)
{
  return fmt::format("w = {} {} {} {} {}\n", w(0), w(1), w(2), w(3), w(4));
}

}  // namespace rmpc::sim
