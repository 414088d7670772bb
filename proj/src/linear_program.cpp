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

#include "rmpc/linear_program.hpp"

#include "rmpc/common.hpp"

#include <limits>

namespace rmpc::lp
{

LpResult maximize(const Eigen::VectorXd & c, const Eigen::MatrixXd & A, const Eigen::VectorXd & b)
{
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (c.size() != n || b.size() != m) {
    throw InvalidArgument("lp: dimension mismatch");
  }
  if ((b.array() < 0.0).any()) {
    throw InvalidArgument("lp: right-hand side must be nonnegative");
  }
  constexpr double kEps = 1e-12;

  // Tableau [A I b; -c 0 0], basis starts at the slacks.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  T.topLeftCorner(m, n) = A;
  T.block(0, n, m, m).setIdentity();
  T.topRightCorner(m, 1) = b;
  T.bottomLeftCorner(1, n) = -c.transpose();
  Eigen::VectorXi basis(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    basis(r) = static_cast<int>(n + r);
  }

  LpResult result;
  const Eigen::Index rhs = n + m;
  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (T(m, j) < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      break;
    }
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < m; ++r) {
      if (T(r, enter) > kEps) {
        const double ratio = T(r, rhs) / T(r, enter);
        if (ratio < best - kEps || (ratio <= best + kEps && leave >= 0 && basis(r) < basis(leave))) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) {
      throw Error("lp: objective unbounded");
    }
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index r = 0; r <= m; ++r) {
      if (r != leave && T(r, enter) != 0.0) {
        T.row(r) -= T(r, enter) * T.row(leave);
      }
    }
    basis(leave) = static_cast<int>(enter);
    ++result.pivots;
  }

  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (basis(r) < n) {
      result.x(basis(r)) = T(r, rhs);
    }
  }
  result.objective = c.dot(result.x);
  return result;
}

LpResult maximize_over_box(const Eigen::VectorXd & c, const Eigen::VectorXd & half_width)
{
  if (c.size() != half_width.size()) {
    throw InvalidArgument("lp: dimension mismatch");
  }
  // Shift x = y - w so that 0 <= y <= 2w.
  const Eigen::Index n = c.size();
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  LpResult shifted = maximize(c, A, 2.0 * half_width);
  shifted.x -= half_width;
  shifted.objective = c.dot(shifted.x);
  return shifted;
}

}  // namespace rmpc::lp
