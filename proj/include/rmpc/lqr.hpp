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

#include "rmpc/common.hpp"
#include "rmpc/ltv_model.hpp"

#include <span>
#include <vector>

namespace rmpc::lqr
{

struct RiccatiOptions
{
  double tolerance{1e-10};  // on max |P_{k+1} - P_k|, relative to max(1, |P|)
  int max_iterations{10000};
};

struct RiccatiResult
{
  StabMatrix P{StabMatrix::Zero()};
  Eigen::Matrix<double, 1, kNumStabStates> K{Eigen::Matrix<double, 1, kNumStabStates>::Zero()};
  int iterations{0};
};

/// Steady-state discrete Riccati solution by fixed-point iteration of the
/// backward recursion; K = -(R + B'PB)^{-1} B'PA. `warm_start` seeds P.
RiccatiResult solve_dare(
  const StabMatrix & A, const StabVector & B, const StabMatrix & Q, double R,
  const RiccatiOptions & options = {}, const StabMatrix * warm_start = nullptr);

/// Ancillary feedback gains: one per short step 0..N_c and one for the long tail.
struct GainSchedule
{
  std::vector<GainRow> short_steps;  // K^0..K^{N_c}, zero on s_d
  GainRow long_step{GainRow::Zero()};

  /// Gain applied at prediction step i: K^i for i <= N_c, K^{N_c} up to the
  /// last short step, K^{N_ss} on long steps.
  const GainRow & at(int i, const ltv::TimeGrid & grid) const;
  std::vector<GainRow> per_step(const ltv::TimeGrid & grid) const;
};

struct LqrWeights
{
  StabMatrix Q{StabMatrix::Identity()};
  double R{1.0};
};

GainSchedule compute_lqr_gains(
  std::span<const ltv::StepModel> models, const ltv::TimeGrid & grid, const LqrWeights & weights,
  const RiccatiOptions & options = {});

}  // namespace rmpc::lqr
