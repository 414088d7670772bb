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

#include "rmpc/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmpc::qp
{

void QpProblem::validate() const
{
  const Eigen::Index n = H.rows();
  if (H.cols() != n || g.size() != n || G.cols() != n || G.rows() != h.size()) {
    throw InvalidArgument("qp: inconsistent problem dimensions");
  }
  if (!H.allFinite() || !g.allFinite() || !G.allFinite() || !h.allFinite()) {
    throw InvalidArgument("qp: problem data must be finite");
  }
}

double KktResiduals::worst() const
{
  return std::max({stationarity, primal, dual, complementarity});
}

KktResiduals kkt_residuals(
  const QpProblem & problem, const Eigen::VectorXd & x, const Eigen::VectorXd & lambda)
{
  const Eigen::VectorXd hx = problem.H * x;
  const Eigen::VectorXd gtl = problem.G.transpose() * lambda;
  const Eigen::VectorXd slack = problem.h - problem.G * x;
  auto inf = [](const Eigen::VectorXd & v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };

  KktResiduals r;
  const double stat_scale = std::max({1.0, inf(hx), inf(problem.g), inf(gtl)});
  r.stationarity = inf(hx + problem.g + gtl) / stat_scale;
  r.primal = inf((-slack).cwiseMax(0.0)) / std::max(1.0, inf(problem.h));
  r.dual = inf((-lambda).cwiseMax(0.0));
  r.complementarity = lambda.cwiseProduct(slack).cwiseAbs().sum() /
                      std::max(1.0, std::abs(problem.objective(x)));
  return r;
}

namespace
{

double step_to_boundary(const Eigen::VectorXd & v, const Eigen::VectorXd & dv)
{
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) {
      alpha = std::min(alpha, -v(i) / dv(i));
    }
  }
  return alpha;
}

}  // namespace

QpResult solve_qp(const QpProblem & problem, const QpOptions & options)
{
  problem.validate();
  const Eigen::Index n = problem.H.rows();
  const Eigen::Index m = problem.G.rows();
  const auto & H = problem.H;
  const auto & G = problem.G;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (problem.h - G * x).cwiseMax(1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);

  QpResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  auto snapshot = [&](int it) {
    QpResult r;
    r.x = x;
    r.lambda = lam;
    r.objective = problem.objective(x);
    r.iterations = it;
    r.residuals = kkt_residuals(problem, x, lam);
    return r;
  };

  const double h_scale = std::max(1.0, m ? problem.h.cwiseAbs().maxCoeff() : 0.0);
  const double g_scale = std::max(1.0, problem.g.cwiseAbs().maxCoeff());

  for (int it = 0; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd r_d = H * x + problem.g + G.transpose() * lam;
    const Eigen::VectorXd r_p = G * x + s - problem.h;
    const double mu = m ? s.dot(lam) / static_cast<double>(m) : 0.0;

    const double res_d = r_d.cwiseAbs().maxCoeff() / g_scale;
    const double res_p = m ? r_p.cwiseAbs().maxCoeff() / h_scale : 0.0;
    const double merit = std::max({res_d, res_p, mu});
    if (merit < best_merit) {
      best_merit = merit;
      best = snapshot(it);
      best_iteration = it;
    }
    if (merit <= options.tolerance) {
      return snapshot(it);
    }
    if (best_merit <= options.acceptable_tolerance &&
        it - best_iteration >= options.stall_iterations) {
      return best;
    }
    if (it == options.max_iterations) {
      break;
    }

    // Reduced system (H + G' S^-1 L G) dx = -r_d - G' S^-1 (L r_p - r_c)
    const Eigen::VectorXd w = lam.cwiseQuotient(s);
    Eigen::MatrixXd M = H + G.transpose() * w.asDiagonal() * G;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    // Near convergence lam / s spans many decades and M can lose definiteness
    // in floating point; retry with a growing diagonal shift.
    const double diag_scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    for (double reg = 1e-14; llt.info() != Eigen::Success; reg *= 100.0) {
      if (reg > 1e-6) {
        if (best_merit <= options.acceptable_tolerance) {
    return best;
  }
  throw QpSolveError("qp: Newton system not positive definite", best);
      }
      M.diagonal().array() += reg * diag_scale;
      llt.compute(M);
    }

    auto solve_direction = [&](const Eigen::VectorXd & r_c, Eigen::VectorXd & dx,
                               Eigen::VectorXd & ds, Eigen::VectorXd & dl) {
      const Eigen::VectorXd t = (lam.cwiseProduct(r_p) - r_c).cwiseQuotient(s);
      dx = llt.solve(-r_d - G.transpose() * t);
      ds = -r_p - G * dx;
      dl = (-r_c - lam.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dx_a, ds_a, dl_a;
    const Eigen::VectorXd r_c_aff = s.cwiseProduct(lam);
    solve_direction(r_c_aff, dx_a, ds_a, dl_a);
    const double a_aff = std::min(step_to_boundary(s, ds_a), step_to_boundary(lam, dl_a));
    const double mu_aff =
      (s + a_aff * ds_a).dot(lam + a_aff * dl_a) / static_cast<double>(std::max<Eigen::Index>(m, 1));
    const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;

    Eigen::VectorXd dx, ds, dl;
    const Eigen::VectorXd r_c =
      r_c_aff + ds_a.cwiseProduct(dl_a) - Eigen::VectorXd::Constant(m, sigma * mu);
    solve_direction(r_c, dx, ds, dl);
    const double alpha =
      std::min(1.0, 0.99 * std::min(step_to_boundary(s, ds), step_to_boundary(lam, dl)));

    x += alpha * dx;
    s += alpha * ds;
    lam += alpha * dl;
  }
  if (best_merit <= options.acceptable_tolerance) {
    return best;
  }
  throw QpSolveError(
    fmt::format(
      "qp: no convergence in {} iterations (best merit {:.3e})", options.max_iterations,
      best_merit),
    best);
}

}  // namespace rmpc::qp
