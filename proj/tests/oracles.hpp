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


// Independent reference implementations used only by the tests. Each one is
// deliberately slower or simpler than the production path it checks.

#pragma once

#include "rmpc/common.hpp"
#include "rmpc/qp_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace rmpc::oracle
{

/// Brush tire force evaluated in long double from the saturation form
/// F = -sgn(a) mu Fz (1 - (1 - |tan a| / theta)^3).
inline long double brush_force_ld(long double alpha, long double c, long double mu, long double fz)
{
  const long double theta = 3.0L * mu * fz / c;
  const long double u = std::fabs(std::tan(alpha)) / theta;
  const long double sgn = alpha > 0 ? 1.0L : (alpha < 0 ? -1.0L : 0.0L);
  if (u >= 1.0L) {
    return -sgn * mu * fz;
  }
  const long double r = 1.0L - u;
  return -sgn * mu * fz * (1.0L - r * r * r);
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
template <typename F>
double bisect(F f, double lo, double hi, int iterations = 200)
{
  double flo = f(lo);
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Propagates x' = A x + B u + L over dt with `n` classical RK4 substeps.
inline StateVector rk4_affine(
  const StateMatrix & A, const StateVector & B, const StateVector & L, const StateVector & x0,
  double u, double dt, int n)
{
  auto f = [&](const StateVector & x) -> StateVector { return A * x + B * u + L; };
  StateVector x = x0;
  const double h = dt / n;
  for (int k = 0; k < n; ++k) {
    const StateVector k1 = f(x);
    const StateVector k2 = f(x + 0.5 * h * k1);
    const StateVector k3 = f(x + 0.5 * h * k2);
    const StateVector k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// max over the 2^5 vertices of the box |x_j| <= w_j of d . x
inline double vertex_support(const GainRow & d, const StateVector & w)
{
  double best = -std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << kNumStates); ++mask) {
    StateVector v;
    for (int j = 0; j < kNumStates; ++j) {
      v(j) = (mask >> j) & 1 ? w(j) : -w(j);
    }
    best = std::max(best, d.dot(v.transpose()));
  }
  return best;
}

/// Support of S^i = Phi^{i-1} S^{i-1} + W with S^0 = W0 in direction e,
/// built by explicit matrix products and vertex enumeration per term.
inline double reach_support_brute_force(
  const GainRow & e, std::span<const StateMatrix> phi, int i, const StateVector & w,
  const StateVector & w0)
{
  double total = 0.0;
  for (int m = 0; m < i; ++m) {
    // disturbance injected after step m travels through Phi^{m+1}..Phi^{i-1}
    StateMatrix prod = StateMatrix::Identity();
    for (int k = m + 1; k <= i - 1; ++k) {
      prod = phi[k] * prod;
    }
    total += vertex_support(e * prod, w);
  }
  StateMatrix prod = StateMatrix::Identity();
  for (int k = 0; k <= i - 1; ++k) {
    prod = phi[k] * prod;
  }
  total += vertex_support(e * prod, w0);
  return total;
}

struct ActiveSetResult
{
  Eigen::VectorXd x;
  double objective{0.0};
  int iterations{0};
  bool converged{false};
};

/// Primal active-set method for min 1/2 x'Hx + g'x s.t. Gx <= h, started from
/// a feasible point. Each equality-constrained subproblem is solved through
/// the full KKT matrix with a rank-revealing LU.
inline ActiveSetResult active_set_qp(
  const qp::QpProblem & p, Eigen::VectorXd x, int max_iterations = 2000)
{
  const Eigen::Index n = p.H.rows();
  const Eigen::Index m = p.G.rows();
  const double tol = 1e-11;
  std::vector<Eigen::Index> work;

  auto independent_with = [&](Eigen::Index row) {
    Eigen::MatrixXd a(work.size() + 1, n);
    for (std::size_t k = 0; k < work.size(); ++k) {
      a.row(k) = p.G.row(work[k]);
    }
    a.row(work.size()) = p.G.row(row);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    return lu.rank() == static_cast<Eigen::Index>(work.size() + 1);
  };
  for (Eigen::Index r = 0; r < m; ++r) {
    const double scale = std::max(1.0, std::abs(p.h(r)));
    if (std::abs(p.G.row(r).dot(x) - p.h(r)) <= 1e-9 * scale && static_cast<Eigen::Index>(work.size()) < n &&
        independent_with(r)) {
      work.push_back(r);
    }
  }

  ActiveSetResult res;
  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    const Eigen::Index k = static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
    kkt.topLeftCorner(n, n) = p.H;
    for (Eigen::Index j = 0; j < k; ++j) {
      kkt.block(n + j, 0, 1, n) = p.G.row(work[j]);
      kkt.block(0, n + j, n, 1) = p.G.row(work[j]).transpose();
    }
    rhs.head(n) = -(p.H * x + p.g);
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd step = sol.head(n);
    const Eigen::VectorXd lambda = sol.tail(k);

    if (step.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      Eigen::Index worst = -1;
      double most_negative = -1e-12;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (lambda(j) < most_negative) {
          most_negative = lambda(j);
          worst = j;
        }
      }
      if (worst < 0) {
        res.x = x;
        res.objective = p.objective(x);
        res.converged = true;
        return res;
      }
      work.erase(work.begin() + worst);
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (std::find(work.begin(), work.end(), r) != work.end()) {
        continue;
      }
      const double gp = p.G.row(r).dot(step);
      if (gp > 1e-14) {
        const double a = std::max(0.0, (p.h(r) - p.G.row(r).dot(x)) / gp);
        if (a < alpha) {
          alpha = a;
          blocking = r;
        }
      }
    }
    x += alpha * step;
    if (blocking >= 0) {
      work.push_back(blocking);
    }
  }
  res.x = x;
  res.objective = p.objective(x);
  return res;
}

/// Makes `x` feasible for Gx <= h by raising variables that appear with a
/// negative coefficient (the soft-constraint slacks) in violated rows.
inline std::optional<Eigen::VectorXd> lift_slacks(
  const qp::QpProblem & p, Eigen::VectorXd x, Eigen::Index first_slack)
{
  for (int pass = 0; pass < 50; ++pass) {
    bool changed = false;
    for (Eigen::Index r = 0; r < p.G.rows(); ++r) {
      const double excess = p.G.row(r).dot(x) - p.h(r);
      if (excess <= 0.0) {
        continue;
      }
      Eigen::Index j = -1;
      for (Eigen::Index c = first_slack; c < p.G.cols(); ++c) {
        if (p.G(r, c) < 0.0) {
          j = c;
          break;
        }
      }
      if (j < 0) {
        return std::nullopt;
      }
      x(j) += excess / -p.G(r, j) * (1.0 + 1e-12) + 1e-12;
      changed = true;
    }
    if (!changed) {
      return x;
    }
  }
  return std::nullopt;
}

}  // namespace rmpc::oracle
