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


// Serial reference vs OpenMP kernels on a controller state taken just before
// the avoidance maneuver of the static-obstacle scenario.

#include "rmpc/admissible_tube.hpp"
#include "rmpc/controller.hpp"

#include <benchmark/benchmark.h>

namespace
{

using namespace rmpc;

struct Fixture
{
  path::ReferencePath path{path::ReferencePath::arc(600.0, 1.0 / 400.0)};
  path::RoadBounds road{path::RoadBounds::constant(-1.85, 5.55)};
  std::vector<tube::Obstacle> obstacles{{37.0, 42.0, -0.9, 0.9, 0.0}};
  control::Controller warm{config(ExecutionPolicy::kParallel)};
  control::Controller warm_serial{config(ExecutionPolicy::kSerial)};
  vehicle::ErrorState x{};
  control::StepOutput last;

  Fixture()
  {
    for (int k = 0; k < 20; ++k) {
      last = warm.step(x, context());
      warm_serial.step(x, context());
      x.s_d += 18.0 * 0.03;
    }
  }

  static control::ControllerConfig config(ExecutionPolicy policy)
  {
    control::ControllerConfig c;
    c.policy = policy;
    return c;
  }

  control::StepContext context() const
  {
    control::StepContext c;
    c.x_dot_p = 18.0;
    c.path = &path;
    c.road = &road;
    c.obstacles = obstacles;
    return c;
  }
};

const Fixture & fixture()
{
  static const Fixture f;
  return f;
}

ExecutionPolicy policy_of(const benchmark::State & state)
{
  return state.range(0) == 0 ? ExecutionPolicy::kSerial : ExecutionPolicy::kParallel;
}

void BM_PredictionModels(benchmark::State & state)
{
  const auto & f = fixture();
  const auto & cfg = f.warm.config();
  const ltv::CurvatureFn kappa = [&f](double s) { return f.path.curvature_at(s); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltv::build_prediction_models(
      f.x, f.warm.previous_states(), kappa, cfg.params, cfg.grid, 18.0, policy_of(state)));
  }
}

void tightening(benchmark::State & state, tube::TighteningBackend backend)
{
  const auto & f = fixture();
  const auto & cfg = f.warm.config();
  const auto phi = tube::error_transition(f.last.models, f.last.gains.per_step(cfg.grid));
  std::vector<tube::Interval> raw;
  for (const auto & st : f.last.tube) {
    raw.push_back(st.raw);
  }
  tube::TighteningOptions opt;
  opt.backend = backend;
  opt.policy = policy_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tube::tighten_bounds(raw, phi, cfg.w, cfg.grid.n_control, opt));
  }
}

void BM_TighteningClosedForm(benchmark::State & state)
{
  tightening(state, tube::TighteningBackend::kClosedForm);
}

void BM_TighteningLinearProgram(benchmark::State & state)
{
  tightening(state, tube::TighteningBackend::kLinearProgram);
}

void BM_ControllerStep(benchmark::State & state)
{
  const auto & f = fixture();
  const auto & source = state.range(0) == 0 ? f.warm_serial : f.warm;
  for (auto _ : state) {
    state.PauseTiming();
    control::Controller ctl = source;
    state.ResumeTiming();
    benchmark::DoNotOptimize(ctl.step(f.x, f.context()));
  }
}

}  // namespace

// Arg 0 runs the serial reference, 1 the OpenMP path.
BENCHMARK(BM_PredictionModels)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TighteningClosedForm)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TighteningLinearProgram)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ControllerStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
