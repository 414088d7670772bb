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

#include <Eigen/Core>

namespace rmpc::lp
{

struct LpResult
{
  Eigen::VectorXd x;
  double objective{0.0};
  int pivots{0};
};

/// Dense tableau simplex for  max c'x  s.t.  A x <= b, x >= 0  with b >= 0,
/// so the origin is a feasible starting basis. Bland's rule prevents cycling.
/// Throws Error if the problem is unbounded.
LpResult maximize(const Eigen::VectorXd & c, const Eigen::MatrixXd & A, const Eigen::VectorXd & b);

/// max c'x over the symmetric box |x_j| <= half_width_j, posed as an LP.
LpResult maximize_over_box(const Eigen::VectorXd & c, const Eigen::VectorXd & half_width);

}  // namespace rmpc::lp
