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

#ifndef TAXOFORGE_PU_CLASSIFIER_H_
#define TAXOFORGE_PU_CLASSIFIER_H_

// Cost-sensitive RBF kernel classifier for negative/unlabeled (NU) data.
//
// Only negatives are labeled (by the stop-word rule). Unlabeled rows are
// trained as the positive class, labeled negatives as the negative class,
// and the two per-class costs are set from the class prior pi and the
// labeled proportion eta:
//
//   c_labeled / c_unlabeled = 2 pi (1 - eta) / eta
//
// Calibrated probabilities come from a sigmoid fitted to cross-validated
// decision values.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taxoforge/candidates.h"
#include "taxoforge/features.h"
#include "taxoforge/matrix.h"

namespace taxoforge {

// 2 pi (1 - eta) / eta. Throws InvalidArgument unless 0 < pi < 1 and
// 0 < eta <= 1.
double cost_ratio(double pi, double eta);

// Which side of the ratio each class sits on.
enum class CostAssignment {
  // c_labeled / c_unlabeled = ratio (labeled class carries c_1).
  kLabeledOverUnlabeled,
  // c_unlabeled / c_labeled = ratio.
  kUnlabeledOverLabeled,
};

struct PUConfig {
  double pi = 0.5;
  // Proportion of labeled rows; computed from the labels when unset.
  std::optional<double> eta;
  double base_cost = 1.0;
  // nullopt: 1 / (dimension * variance of the training features).
  std::optional<double> kernel_gamma;
  double smo_tolerance = 1e-3;
  // Pair-update budget; 0 means max(10 n, 1000).
  std::size_t max_passes = 0;
  double threshold = 0.5;
  CostAssignment assignment = CostAssignment::kLabeledOverUnlabeled;
  // Replaces cost_ratio(pi, eta) when set (ablations).
  std::optional<double> cost_ratio_override;
  std::size_t calibration_folds = 3;
  bool record_objective = false;

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

struct TrainStats {
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  double objective = 0.0;
  std::vector<double> objective_trace;
  double eta = 0.0;
  double cost_ratio = 0.0;
  double unlabeled_cost = 0.0;
  double labeled_cost = 0.0;
  std::size_t rows = 0;
};

struct TermClassifier {
  std::string layout_version{kFeatureLayoutVersion};
  std::vector<std::string> columns;
  Scaler scaler;
  // Training rows with nonzero dual coefficient and their positions.
  std::vector<std::size_t> support_indices;
  Matrix support_vectors;
  // alpha_i * y_i, aligned with support_indices.
  std::vector<double> dual_coefficients;
  double bias = 0.0;
  double kernel_gamma = 1.0;
  double platt_a = 1.0;
  double platt_b = 0.0;
  bool calibrated = false;
  TrainStats stats;

  // f(x) = sum_s coef_s K(sv_s, x) + bias on a standardized row.
  double decision_value(std::span<const double> standardized_row) const;
  // sigma(a f(x) + b).
  double probability(std::span<const double> standardized_row) const;
  double probability_from_decision(double decision) const;
  // Applies the stored scaler first.
  double probability_raw(std::span<const double> raw_row) const;
};

// Rows must already be standardized. Unlabeled rows get target +1,
// negatives -1. Throws InvalidArgument unless both labels occur, and
// ConvergenceError when SMO runs out of budget.
TermClassifier train(const Matrix& standardized, std::span<const PuLabel> labels,
                     const PUConfig& cfg);
TermClassifier train(const FeatureMatrix& features, std::span<const PuLabel> labels,
                     const PUConfig& cfg);

struct SigmoidParams {
  double a = 1.0;
  double b = 0.0;
};

// Maximum-likelihood fit of P(positive | f) = sigma(a f + b) by Newton's
// method with backtracking; `positive` holds 0/1. With `smooth_targets` the
// 0/1 targets become 1/(N- + 2) and (N+ + 1)/(N+ + 2). Optional per-row
// weights scale each log-likelihood term (and the class totals N+, N-).
// Throws CalibrationError on a single class, constant decision values or a
// non-positive slope.
SigmoidParams fit_sigmoid(std::span<const double> decision, std::span<const int> positive,
                          bool smooth_targets = true, std::span<const double> weights = {});

// Fits the sigmoid on cfg.calibration_folds-fold cross-validated decision
// values (unlabeled = positive), each row weighted by its class cost.
// Throws CalibrationError when a fold has a single class.
TermClassifier calibrate(TermClassifier model, const Matrix& standardized,
                         std::span<const PuLabel> labels, const PUConfig& cfg);

struct ScoredTerm {
  std::string surface;
  std::vector<std::string> words;
  double probability = 0.0;

  bool operator==(const ScoredTerm&) const = default;
};

using TermSet = std::vector<ScoredTerm>;

// Unlabeled candidates whose calibrated probability is >= threshold, in
// table order. `features` rows must align with the table; raw values are
// scaled with the model's scaler.
TermSet filter_terms(const CandidateTable& table, const FeatureMatrix& features,
                     const TermClassifier& model, double threshold);

void write_model_json(std::ostream& out, const TermClassifier& model);
TermClassifier read_model_json(std::istream& in);

// JSONL: surface, probability, words.
void write_term_set(std::ostream& out, const TermSet& terms);
TermSet read_term_set(std::istream& in);

}  // namespace taxoforge

#endif  // TAXOFORGE_PU_CLASSIFIER_H_
