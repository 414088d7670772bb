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

#include <Eigen/Core>

namespace rmpc::qp
{

/// min 1/2 x'Hx + g'x  s.t.  G x <= h
struct QpProblem
{
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  double objective(const Eigen::VectorXd & x) const { return 0.5 * x.dot(H * x) + g.dot(x); }
  void validate() const;
};

/// KKT residuals in normalized units.
struct KktResiduals
{
  double stationarity{0.0};     // |Hx + g + G'l|_inf / max(1, |Hx|, |g|, |G'l|)
  double primal{0.0};           // |max(Gx - h, 0)|_inf / max(1, |h|)
  double dual{0.0};             // |min(l, 0)|_inf
  double complementarity{0.0};  // sum |l_i (h - Gx)_i| / max(1, |f(x)|)

  double worst() const;
};

KktResiduals kkt_residuals(
  const QpProblem & problem, const Eigen::VectorXd & x, const Eigen::VectorXd & lambda);

struct QpOptions
{
  double tolerance{1e-10};
  // Returned instead of failing when progress stalls above `tolerance`.
  double acceptable_tolerance{1e-8};
  int stall_iterations{15};
  int max_iterations{200};
};

struct QpResult
{
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  double objective{0.0};
  int iterations{0};
  KktResiduals residuals;
};

/// Raised when the iteration cap is hit or the Newton system breaks down.
class QpSolveError : public Error
{
public:
  QpSolveError(const std::string & what, QpResult best) : Error(what), best_(std::move(best)) {}
  const QpResult & best_iterate() const { return best_; }

private:
  QpResult best_;
};

/// Dense Mehrotra predictor-corrector interior-point method. H must be
/// positive definite.
QpResult solve_qp(const QpProblem & problem, const QpOptions & options = {});

}  // namespace rmpc::qp
