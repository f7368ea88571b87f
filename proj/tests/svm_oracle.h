// Copyright 2026 The TaxoForge Authors.
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

#ifndef TAXOFORGE_TESTS_SVM_ORACLE_H_
#define TAXOFORGE_TESTS_SVM_ORACLE_H_

// Exact SVM dual reference used by the solver tests. Shares no code with
// the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "taxoforge/matrix.h"

namespace taxoforge::oracle {

// Optimum of the box-constrained SVM dual
//   max sum a - 1/2 a' Q a,  Q_ij = y_i y_j K_ij,  y' a = 0,  0 <= a <= C_i
// by enumerating every (lower, upper, free) partition and solving the
// equality-constrained stationarity system on the free set. Exact for the
// strictly convex case; intended for n <= 8.
inline double svm_dual_optimum(const Matrix& k, std::span<const int> y, std::span<const double> c) {
  const std::size_t n = y.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> state(n);
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t rest = code;
    std::vector<std::size_t> free;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rest % 3);
      rest /= 3;
      if (state[i] == 1) alpha[static_cast<Eigen::Index>(i)] = c[i];
      if (state[i] == 2) free.push_back(i);
    }
    double fixed_balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) fixed_balance += y[i] * alpha[static_cast<Eigen::Index>(i)];
    if (!free.empty()) {
      const auto m = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
      for (Eigen::Index a = 0; a < m; ++a) {
        const std::size_t i = free[static_cast<std::size_t>(a)];
        double r = 1.0;
        for (std::size_t j = 0; j < n; ++j)
          if (state[j] == 1) r -= y[i] * y[j] * k(i, j) * c[j];
        rhs[a] = r;
        for (Eigen::Index b = 0; b < m; ++b) {
          const std::size_t j = free[static_cast<std::size_t>(b)];
          sys(a, b) = y[i] * y[j] * k(i, j);
        }
        sys(a, m) = y[i];
        sys(m, a) = y[i];
      }
      rhs[m] = -fixed_balance;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd sol = lu.solve(rhs);
      bool ok = true;
      for (Eigen::Index a = 0; a < m; ++a) {
        const double v = sol[a];
        const std::size_t i = free[static_cast<std::size_t>(a)];
        if (!(v > -1e-12 && v < c[i] + 1e-12)) ok = false;
        alpha[static_cast<Eigen::Index>(i)] = std::clamp(v, 0.0, c[i]);
      }
      if (!ok) continue;
    } else if (std::abs(fixed_balance) > 1e-12) {
      continue;
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      obj += alpha[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < n; ++j)
        obj -= 0.5 * alpha[static_cast<Eigen::Index>(i)] * alpha[static_cast<Eigen::Index>(j)] * y[i] *
               y[j] * k(i, j);
    }
    best = std::max(best, obj);
  }
  return best;
}

// Largest KKT violation for f(x_i) = sum_j a_j y_j K_ij + b, with alphas
// within `eps` of a bound treated as at the bound.
inline double kkt_violation(const Matrix& k, std::span<const int> y, std::span<const double> c,
                            std::span<const double> alpha, double b, double eps = 1e-9) {
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double f = b;
    for (std::size_t j = 0; j < y.size(); ++j) f += alpha[j] * y[j] * k(i, j);
    const double m = y[i] * f;
    if (alpha[i] <= eps)
      worst = std::max(worst, 1.0 - m);
    else if (alpha[i] >= c[i] - eps)
      worst = std::max(worst, m - 1.0);
    else
      worst = std::max(worst, std::abs(m - 1.0));
  }
  return worst;
}

}  // namespace taxoforge::oracle

#endif  // TAXOFORGE_TESTS_SVM_ORACLE_H_
