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

#include "rmpc/lqr.hpp"

#include <fmt/format.h>

namespace rmpc::lqr
{

RiccatiResult solve_dare(
  const StabMatrix & A, const StabVector & B, const StabMatrix & Q, double R,
  const RiccatiOptions & options, const StabMatrix * warm_start)
{
  if (!(R > 0.0)) {
    throw InvalidArgument("riccati: input weight must be positive");
  }
  RiccatiResult res;
  StabMatrix P = warm_start ? *warm_start : Q;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const StabVector PB = P * B;
    const double denom = R + B.dot(PB);
    const Eigen::Matrix<double, 1, kNumStabStates> BtPA = PB.transpose() * A;
    StabMatrix next = Q + A.transpose() * P * A - BtPA.transpose() * BtPA / denom;
    next = 0.5 * (next + next.transpose());
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (change <= options.tolerance * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      res.iterations = it;
      res.P = P;
      const StabVector PBf = P * B;
      res.K = -(PBf.transpose() * A) / (R + B.dot(PBf));
      return res;
    }
  }
  throw Error(fmt::format(
    "riccati iteration did not converge in {} iterations (|P| = {:.3e})", options.max_iterations,
    P.cwiseAbs().maxCoeff()));
}

const GainRow & GainSchedule::at(int i, const ltv::TimeGrid & grid) const
{
  if (i >= grid.n_short) {
    return long_step;
  }
  return short_steps[std::min<std::size_t>(i, short_steps.size() - 1)];
}

std::vector<GainRow> GainSchedule::per_step(const ltv::TimeGrid & grid) const
{
  std::vector<GainRow> out(grid.horizon());
  for (int i = 0; i < grid.horizon(); ++i) {
    out[i] = at(i, grid);
  }
  return out;
}

namespace
{

GainRow pad(const Eigen::Matrix<double, 1, kNumStabStates> & k)
{
  GainRow g = GainRow::Zero();
  g.head<kNumStabStates>() = k;
  return g;
}

}  // namespace

GainSchedule compute_lqr_gains(
  std::span<const ltv::StepModel> models, const ltv::TimeGrid & grid, const LqrWeights & weights,
  const RiccatiOptions & options)
{
  if (static_cast<int>(models.size()) < grid.horizon()) {
    throw InvalidArgument("compute_lqr_gains: one model per prediction step required");
  }
  GainSchedule schedule;
  schedule.short_steps.reserve(grid.n_control + 1);
  StabMatrix warm = weights.Q;
  const StabMatrix * seed = nullptr;
  for (int i = 0; i <= grid.n_control; ++i) {
    const auto & d = models[i].discrete;
    const auto r = solve_dare(
      d.A.topLeftCorner<kNumStabStates, kNumStabStates>(), d.B.head<kNumStabStates>(), weights.Q,
      weights.R, options, seed);
    schedule.short_steps.push_back(pad(r.K));
    warm = r.P;
    seed = &warm;
  }
  if (grid.n_long > 0) {
    const auto & d = models[grid.n_short].discrete;
    const auto r = solve_dare(
      d.A.topLeftCorner<kNumStabStates, kNumStabStates>(), d.B.head<kNumStabStates>(), weights.Q,
      weights.R, options);
    schedule.long_step = pad(r.K);
  } else {
    schedule.long_step = schedule.short_steps.back();
  }
  return schedule;
}

}  // namespace rmpc::lqr
