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

#include "taxoforge/smo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

constexpr double kTau = 1e-12;

bool at_upper(double a, double c) { return a >= c; }
bool at_lower(double a) { return a <= 0.0; }

bool in_up(int y, double a, double c) { return y > 0 ? !at_upper(a, c) : !at_lower(a); }
bool in_low(int y, double a, double c) { return y > 0 ? !at_lower(a) : !at_upper(a, c); }

double objective_from_gradient(std::span<const double> alpha, std::span<const double> grad) {
  // f = 1/2 a'Qa - e'a = 1/2 sum a_i (G_i - 1); the dual objective is -f.
  double f = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) f += alpha[i] * (grad[i] - 1.0);
  return -0.5 * f;
}

}  // namespace

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

RbfKernel::RbfKernel(const Matrix& points, double gamma, std::size_t cache_bytes)
    : points_(points), gamma_(gamma) {
  const std::size_t row_bytes = std::max<std::size_t>(1, points.rows()) * sizeof(double);
  capacity_ = std::max<std::size_t>(2, cache_bytes / row_bytes);
}

std::span<const double> RbfKernel::row(std::size_t i) {
  if (auto it = rows_.find(i); it != rows_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return it->second.first;
  }
  if (rows_.size() >= capacity_) {
    rows_.erase(lru_.back());
    lru_.pop_back();
  }
  std::vector<double> values(points_.rows());
  const auto xi = points_.row(i);
  for (std::size_t j = 0; j < points_.rows(); ++j) values[j] = rbf_kernel(xi, points_.row(j), gamma_);
  lru_.push_front(i);
  auto [pos, _] = rows_.emplace(i, std::make_pair(std::move(values), lru_.begin()));
  return pos->second.first;
}

SmoResult solve_smo(KernelSource& kernel, std::span<const int> targets,
                    std::span<const double> upper_bounds, const SmoOptions& options) {
  const std::size_t n = kernel.size();
  if (targets.size() != n || upper_bounds.size() != n)
    throw InvalidArgument("solve_smo: targets/bounds size mismatch");
  if (n == 0) throw InvalidArgument("solve_smo: empty problem");
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] != 1 && targets[i] != -1) throw InvalidArgument("solve_smo: targets must be +-1");
    if (!(upper_bounds[i] >= 0.0)) throw InvalidArgument("solve_smo: negative box bound");
  }

  const std::span<const int> y = targets;
  const std::span<const double> c = upper_bounds;
  SmoResult res;
  res.alpha.assign(n, 0.0);
  std::vector<double>& alpha = res.alpha;
  std::vector<double> grad(n, -1.0);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = kernel.diagonal(i);

  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> row_i(n);
  while (res.iterations < options.max_iterations) {
    // i: maximal -y G over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_up(y[t], alpha[t], c[t])) continue;
      const double v = -y[t] * grad[t];
      if (v > gmax) {
        gmax = v;
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    if (i != n) {
      const auto ki = kernel.row(i);
      std::copy(ki.begin(), ki.end(), row_i.begin());
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n; ++t) {
        if (!in_low(y[t], alpha[t], c[t])) continue;
        const double v = y[t] * grad[t];
        gmax2 = std::max(gmax2, v);
        const double b = gmax + v;
        if (b > 0.0) {
          double a = qd[i] + qd[t] - 2.0 * row_i[t];
          if (a <= 0.0) a = kTau;
          const double score = -(b * b) / a;
          if (score < best) {
            best = score;
            j = t;
          }
        }
      }
    }
    gap = (i == n || gmax2 == -std::numeric_limits<double>::infinity()) ? 0.0 : gmax + gmax2;
    if (gap < options.tolerance || j == n) {
      converged = true;
      break;
    }

    const auto kj_span = kernel.row(j);
    const std::vector<double> row_j(kj_span.begin(), kj_span.end());
    const double kij = row_i[j];
    const double ci = c[i];
    const double cj = c[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += y[i] * y[k] * row_i[k] * dai + y[j] * y[k] * row_j[k] * daj;
      if (!std::isfinite(grad[k])) {
        std::ostringstream msg;
        msg << "solve_smo: non-finite gradient at row " << k;
        throw NumericalError(msg.str());
      }
    }
    ++res.iterations;
    if (options.record_objective) res.objective_trace.push_back(objective_from_gradient(alpha, grad));
  }
  res.gap = gap;
  if (!converged) {
    std::ostringstream msg;
    msg << "SMO did not converge in " << options.max_iterations
        << " iterations; KKT violation " << gap;
    throw ConvergenceError(msg.str(), gap);
  }

  // Bias: average over free vectors, otherwise the middle of the feasible range.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(alpha[t], c[t])) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(alpha[t])) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double r;
  if (n_free > 0) {
    r = sum_free / static_cast<double>(n_free);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    r = 0.5 * (ub + lb);
  } else {
    r = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  res.bias = -r;
  res.objective = objective_from_gradient(alpha, grad);
  return res;
}

double dual_objective(const Matrix& kernel, std::span<const int> targets,
                      std::span<const double> alpha) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j)
      quad += alpha[i] * alpha[j] * targets[i] * targets[j] * kernel(i, j);
  }
  return linear - 0.5 * quad;
}

double kkt_residual(const Matrix& kernel, std::span<const int> targets,
                    std::span<const double> upper_bounds, std::span<const double> alpha,
                    double bias) {
  double worst = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    double f = bias;
    for (std::size_t j = 0; j < alpha.size(); ++j) f += alpha[j] * targets[j] * kernel(i, j);
    const double margin = targets[i] * f;
    double v;
    if (alpha[i] <= 0.0) {
      v = std::max(0.0, 1.0 - margin);
    } else if (alpha[i] >= upper_bounds[i]) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace taxoforge
