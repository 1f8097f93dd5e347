// Copyright 2026 The mlcca Authors.
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

// Dense solvers for the handful-of-variables problems that arise in core
// payment computations: a tableau simplex for
//     max 1^T y  s.t.  G y <= h, y >= 0   (h >= 0)
// and a primal active-set method for the Euclidean projection
//     min ||x - target||^2  s.t.  A x >= b
// started from a feasible point.

#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "mlcca/core.hpp"

namespace mlcca::detail {

/// Maximizes sum(y) over {G y <= h, y >= 0}; requires h >= 0 so the slack
/// basis is feasible. Bland's rule, so no cycling.
inline Eigen::VectorXd simplex_max_sum(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double tol = 1e-12) {
  const Eigen::Index rows = G.rows();
  const Eigen::Index n = G.cols();
  for (Eigen::Index r = 0; r < rows; ++r)
    if (h[r] < 0.0) throw ValidationError("simplex: right-hand side must be nonnegative");
  // Tableau columns: n structural, rows slack, 1 rhs.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(rows + 1, n + rows + 1);
  T.block(0, 0, rows, n) = G;
  T.block(0, n, rows, rows).setIdentity();
  T.block(0, n + rows, rows, 1) = h;
  T.block(rows, 0, 1, n).setConstant(-1.0);  // reduced costs of max sum(y)
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = n + r;

  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index q = 0; q < n + rows; ++q)
      if (T(rows, q) < -tol) {
        enter = q;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (T(r, enter) > tol) {
        const double ratio = T(r, n + rows) / T(r, enter);
        if (ratio < best_ratio - tol ||
            (ratio <= best_ratio + tol && leave >= 0 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) throw ValidationError("simplex: problem is unbounded");
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index r = 0; r <= rows; ++r)
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto b = basis[static_cast<std::size_t>(r)];
    if (b < n) y[b] = std::max(0.0, T(r, n + rows));
  }
  return y;
}

/// Projects `target` onto {x : A x >= b} starting from feasible x0.
inline Eigen::VectorXd project_onto_polytope(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                             const Eigen::VectorXd& target, Eigen::VectorXd x, double tol = 1e-10) {
  const Eigen::Index rows = A.rows();
  std::vector<Eigen::Index> working;

  auto independent_with = [&](Eigen::Index r) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(working.size()) + 1, A.cols());
    for (std::size_t k = 0; k < working.size(); ++k) M.row(static_cast<Eigen::Index>(k)) = A.row(working[k]);
    M.row(static_cast<Eigen::Index>(working.size())) = A.row(r);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-10);
    return lu.rank() == M.rows();
  };

  for (Eigen::Index r = 0; r < rows; ++r)
    if (std::abs(A.row(r).dot(x) - b[r]) <= 1e-9 * (1.0 + std::abs(b[r])) && independent_with(r)) working.push_back(r);

  for (int iter = 0; iter < 10000; ++iter) {
    const Eigen::VectorXd g = x - target;
    const auto k = static_cast<Eigen::Index>(working.size());
    Eigen::MatrixXd Aw(k, A.cols());
    for (Eigen::Index q = 0; q < k; ++q) Aw.row(q) = A.row(working[static_cast<std::size_t>(q)]);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd d = -g;
    if (k > 0) {
      // lambda = argmin ||Aw^T lambda - g||, d = -(g - Aw^T lambda).
      lambda = Aw.transpose().completeOrthogonalDecomposition().solve(g);
      d = -(g - Aw.transpose() * lambda);
    }
    if (d.norm() <= tol * (1.0 + target.norm())) {
      Eigen::Index worst = -1;
      double most_negative = -1e-10;
      for (Eigen::Index q = 0; q < k; ++q)
        if (lambda[q] < most_negative) {
          most_negative = lambda[q];
          worst = q;
        }
      if (worst < 0) return x;
      working.erase(working.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      const double ad = A.row(r).dot(d);
      if (ad < -1e-14) {
        const double step = (b[r] - A.row(r).dot(x)) / ad;
        if (step < alpha) {
          alpha = std::max(0.0, step);
          blocking = r;
        }
      }
    }
    x += alpha * d;
    if (blocking >= 0) {
      if (independent_with(blocking)) working.push_back(blocking);
      else if (alpha == 0.0) throw ValidationError("projection: degenerate active set");
    }
  }
  throw ValidationError("projection: active-set method did not converge");
}

}  // namespace mlcca::detail
