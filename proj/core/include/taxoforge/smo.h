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

#ifndef TAXOFORGE_SMO_H_
#define TAXOFORGE_SMO_H_

// Sequential minimal optimization for the weighted soft-margin dual
//
//   max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
//   s.t.   0 <= a_i <= C_i,  sum_i a_i y_i = 0
//
// with a per-row box bound C_i. Working pairs are picked by the maximal
// violating pair / second-order rule.

#include <cstddef>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "taxoforge/matrix.h"

namespace taxoforge {

class KernelSource {
 public:
  virtual ~KernelSource() = default;
  virtual std::size_t size() const = 0;
  // Row i of the kernel matrix. Valid until the next call to row().
  virtual std::span<const double> row(std::size_t i) = 0;
  virtual double diagonal(std::size_t i) const = 0;
};

// K(x, z) = exp(-gamma |x - z|^2).
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

// RBF kernel over the rows of a matrix with an LRU cache of kernel rows.
class RbfKernel final : public KernelSource {
 public:
  RbfKernel(const Matrix& points, double gamma, std::size_t cache_bytes = std::size_t{256} << 20);

  std::size_t size() const override { return points_.rows(); }
  std::span<const double> row(std::size_t i) override;
  double diagonal(std::size_t) const override { return 1.0; }

 private:
  const Matrix& points_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
      rows_;
};

// A fully materialized kernel matrix.
class PrecomputedKernel final : public KernelSource {
 public:
  explicit PrecomputedKernel(Matrix k) : k_(std::move(k)) {}
  std::size_t size() const override { return k_.rows(); }
  std::span<const double> row(std::size_t i) override { return k_.row(i); }
  double diagonal(std::size_t i) const override { return k_(i, i); }

 private:
  Matrix k_;
};

struct SmoOptions {
  double tolerance = 1e-3;
  std::size_t max_iterations = 100000;
  // Record the dual objective after every accepted pair update.
  bool record_objective = false;
};

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
  // Dual objective (maximization form) at the returned alpha.
  double objective = 0.0;
  std::size_t iterations = 0;
  // Maximal violating pair gap at termination.
  double gap = 0.0;
  std::vector<double> objective_trace;
};

// Targets are +1/-1. Throws ConvergenceError carrying the final gap when
// max_iterations is reached first, InvalidArgument on malformed input.
SmoResult solve_smo(KernelSource& kernel, std::span<const int> targets,
                    std::span<const double> upper_bounds, const SmoOptions& options);

// Dual objective sum a - 1/2 a' Q a.
double dual_objective(const Matrix& kernel, std::span<const int> targets,
                      std::span<const double> alpha);

// Largest KKT residual over all rows for decision f(x_i) = sum_j a_j y_j K_ij + b.
double kkt_residual(const Matrix& kernel, std::span<const int> targets,
                    std::span<const double> upper_bounds, std::span<const double> alpha,
                    double bias);

}  // namespace taxoforge

#endif  // TAXOFORGE_SMO_H_
