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

#include "taxoforge/pu_classifier.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"
#include "taxoforge/smo.h"

namespace taxoforge {
namespace {

using nlohmann::json;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double auto_gamma(const Matrix& x) {
  const std::size_t total = x.rows() * x.cols();
  if (total == 0) return 1.0;
  double sum = 0.0;
  for (double v : x.data()) sum += v;
  const double mean = sum / static_cast<double>(total);
  double ss = 0.0;
  for (double v : x.data()) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(total);
  const double d = static_cast<double>(x.cols());
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

}  // namespace

double cost_ratio(double pi, double eta) {
  if (!(pi > 0.0 && pi < 1.0))
    throw InvalidArgument("cost_ratio: class prior pi must lie in (0, 1)");
  if (!(eta > 0.0 && eta <= 1.0))
    throw InvalidArgument("cost_ratio: labeled proportion eta must lie in (0, 1]");
  return 2.0 * pi * (1.0 - eta) / eta;
}

void PUConfig::validate() const {
  if (!(pi > 0.0 && pi < 1.0)) throw InvalidArgument("pu.pi must lie in (0, 1)");
  if (eta && !(*eta > 0.0 && *eta <= 1.0)) throw InvalidArgument("pu.eta must lie in (0, 1]");
  if (!(base_cost > 0.0)) throw InvalidArgument("pu.base_cost must be > 0");
  if (kernel_gamma && !(*kernel_gamma > 0.0))
    throw InvalidArgument("pu.kernel_gamma must be > 0 or auto");
  if (!(smo_tolerance > 0.0)) throw InvalidArgument("pu.smo_tolerance must be > 0");
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw InvalidArgument("pu.threshold must lie in [0, 1)");
  if (cost_ratio_override && !(*cost_ratio_override > 0.0))
    throw InvalidArgument("pu.cost_ratio_override must be > 0");
  if (calibration_folds < 2) throw InvalidArgument("pu.calibration_folds must be >= 2");
}

double TermClassifier::decision_value(std::span<const double> standardized_row) const {
  double f = bias;
  for (std::size_t s = 0; s < dual_coefficients.size(); ++s)
    f += dual_coefficients[s] * rbf_kernel(support_vectors.row(s), standardized_row, kernel_gamma);
  return f;
}

double TermClassifier::probability_from_decision(double decision) const {
  return sigmoid(platt_a * decision + platt_b);
}

double TermClassifier::probability(std::span<const double> standardized_row) const {
  return probability_from_decision(decision_value(standardized_row));
}

double TermClassifier::probability_raw(std::span<const double> raw_row) const {
  const std::vector<double> x = scaler.mean.empty()
                                    ? std::vector<double>(raw_row.begin(), raw_row.end())
                                    : scaler.apply(raw_row);
  return probability(x);
}

TermClassifier train(const Matrix& x, std::span<const PuLabel> labels, const PUConfig& cfg) {
  cfg.validate();
  const std::size_t n = x.rows();
  if (labels.size() != n) throw InvalidArgument("train: labels/rows size mismatch");
  const auto n_labeled = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), PuLabel::kNegative));
  if (n_labeled == 0 || n_labeled == n)
    throw InvalidArgument("train: need at least one labeled negative and one unlabeled row");

  TermClassifier model;
  TrainStats& st = model.stats;
  st.rows = n;
  st.eta = cfg.eta.value_or(static_cast<double>(n_labeled) / static_cast<double>(n));
  st.cost_ratio = cfg.cost_ratio_override ? *cfg.cost_ratio_override : cost_ratio(cfg.pi, st.eta);
  if (!(st.cost_ratio > 0.0)) throw InvalidArgument("train: cost ratio must be positive");
  if (cfg.assignment == CostAssignment::kLabeledOverUnlabeled) {
    st.unlabeled_cost = cfg.base_cost;
    st.labeled_cost = cfg.base_cost * st.cost_ratio;
  } else {
    st.labeled_cost = cfg.base_cost;
    st.unlabeled_cost = cfg.base_cost * st.cost_ratio;
  }

  std::vector<int> y(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool negative = labels[i] == PuLabel::kNegative;
    y[i] = negative ? -1 : 1;
    c[i] = negative ? st.labeled_cost : st.unlabeled_cost;
  }

  model.kernel_gamma = cfg.kernel_gamma.value_or(auto_gamma(x));
  RbfKernel kernel(x, model.kernel_gamma);
  SmoOptions opts;
  opts.tolerance = cfg.smo_tolerance;
  opts.max_iterations = cfg.max_passes != 0 ? cfg.max_passes : std::max<std::size_t>(10 * n, 1000);
  opts.record_objective = cfg.record_objective;
  SmoResult res = solve_smo(kernel, y, c, opts);

  for (std::size_t i = 0; i < n; ++i) {
    if (res.alpha[i] > 0.0) {
      model.support_indices.push_back(i);
      model.dual_coefficients.push_back(res.alpha[i] * y[i]);
    }
  }
  model.support_vectors = x.select_rows(model.support_indices);
  model.bias = res.bias;
  st.iterations = res.iterations;
  st.kkt_gap = res.gap;
  st.objective = res.objective;
  st.objective_trace = std::move(res.objective_trace);
  return model;
}

TermClassifier train(const FeatureMatrix& features, std::span<const PuLabel> labels,
                     const PUConfig& cfg) {
  TermClassifier model = train(features.standardized, labels, cfg);
  model.layout_version = features.layout_version;
  model.columns = features.columns;
  model.scaler = features.scaler;
  return model;
}

SigmoidParams fit_sigmoid(std::span<const double> dec, std::span<const int> positive,
                          bool smooth_targets, std::span<const double> weights) {
  const std::size_t n = dec.size();
  if (positive.size() != n) throw InvalidArgument("fit_sigmoid: size mismatch");
  if (!weights.empty() && weights.size() != n)
    throw InvalidArgument("fit_sigmoid: weight count mismatch");
  std::vector<double> w(n, 1.0);
  if (!weights.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(weights[i] > 0.0 && std::isfinite(weights[i])))
        throw InvalidArgument("fit_sigmoid: weights must be positive and finite");
      w[i] = weights[i];
    }
  }
  double prior1 = 0.0;
  double prior0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) (positive[i] != 0 ? prior1 : prior0) += w[i];
  if (prior1 == 0.0 || prior0 == 0.0)
    throw CalibrationError("calibration needs both classes among the decision values");
  const auto [lo, hi] = std::minmax_element(dec.begin(), dec.end());
  if (!(*hi - *lo > 1e-12 * std::max(1.0, std::abs(*hi))))
    throw CalibrationError("calibration: decision values are all equal");

  const double hi_target = smooth_targets ? (prior1 + 1.0) / (prior1 + 2.0) : 1.0;
  const double lo_target = smooth_targets ? 1.0 / (prior0 + 2.0) : 0.0;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = positive[i] != 0 ? hi_target : lo_target;

  // Internally P = 1 / (1 + exp(A f + B)); returned as a = -A, b = -B.
  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fab = dec[i] * a + b;
      f += w[i] * (fab >= 0.0 ? t[i] * fab + std::log1p(std::exp(-fab))
                              : (t[i] - 1.0) * fab + std::log1p(std::exp(fab)));
    }
    return f;
  };
  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;
  double A = 0.0;
  double B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(A, B);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fab = dec[i] * A + B;
      double p, q;
      if (fab >= 0.0) {
        const double e = std::exp(-fab);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(fab);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = w[i] * p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      const double d1 = w[i] * (t[i] - p);
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = A + step * dA;
      const double nb = B + step * dB;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        A = na;
        B = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  if (!std::isfinite(A) || !std::isfinite(B)) throw CalibrationError("calibration diverged");
  const SigmoidParams out{-A, -B};
  if (!(out.a > 0.0))
    throw CalibrationError("calibration slope is not positive; probabilities would not "
                           "increase with the decision value");
  return out;
}

TermClassifier calibrate(TermClassifier model, const Matrix& x, std::span<const PuLabel> labels,
                         const PUConfig& cfg) {
  const std::size_t n = x.rows();
  if (labels.size() != n) throw InvalidArgument("calibrate: labels/rows size mismatch");
  const std::size_t k = cfg.calibration_folds;
  // Stratified round-robin fold assignment, deterministic in row order.
  std::vector<std::size_t> fold(n);
  std::size_t seen_neg = 0, seen_unl = 0;
  for (std::size_t i = 0; i < n; ++i)
    fold[i] = (labels[i] == PuLabel::kNegative ? seen_neg++ : seen_unl++) % k;

  PUConfig fold_cfg = cfg;
  fold_cfg.record_objective = false;
  std::vector<double> decision(n, 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
    if (test_rows.empty()) continue;
    std::vector<PuLabel> sub_labels;
    for (std::size_t i : train_rows) sub_labels.push_back(labels[i]);
    const auto neg = std::count(sub_labels.begin(), sub_labels.end(), PuLabel::kNegative);
    if (neg == 0 || neg == static_cast<long>(sub_labels.size()))
      throw CalibrationError("calibration fold " + std::to_string(f) + " has a single class");
    const Matrix sub = x.select_rows(train_rows);
    fold_cfg.kernel_gamma = model.kernel_gamma;
    const TermClassifier fm = train(sub, sub_labels, fold_cfg);
    for (std::size_t i : test_rows) decision[i] = fm.decision_value(x.row(i));
  }
  // Rows carry their training cost so that the 0.5 cut reproduces the
  // cost-sensitive decision rule instead of P(unlabeled | x).
  std::vector<int> positive(n);
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool unl = labels[i] == PuLabel::kUnlabeled;
    positive[i] = unl ? 1 : 0;
    weight[i] = unl ? model.stats.unlabeled_cost : model.stats.labeled_cost;
  }
  const double scale = *std::min_element(weight.begin(), weight.end());
  for (double& v : weight) v /= scale;
  const SigmoidParams p = fit_sigmoid(decision, positive, true, weight);
  model.platt_a = p.a;
  model.platt_b = p.b;
  model.calibrated = true;
  return model;
}

TermSet filter_terms(const CandidateTable& table, const FeatureMatrix& features,
                     const TermClassifier& model, double threshold) {
  if (features.raw.rows() != table.size())
    throw InvalidArgument("filter_terms: feature rows do not match the candidate table");
  if (!model.columns.empty() && !features.columns.empty() && model.columns != features.columns)
    throw InvalidArgument("filter_terms: feature layout differs from the model's");
  TermSet out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const TermCandidate& c = table[i];
    if (!features.surfaces.empty() && features.surfaces[i] != c.surface)
      throw InvalidArgument("filter_terms: feature row " + std::to_string(i) +
                            " is not candidate '" + c.surface + "'");
    if (c.label == PuLabel::kNegative) continue;
    const double p = model.probability_raw(features.raw.row(i));
    if (p >= threshold) out.push_back({c.surface, c.words, p});
  }
  return out;
}

void write_model_json(std::ostream& out, const TermClassifier& m) {
  json svs = json::array();
  for (std::size_t s = 0; s < m.support_vectors.rows(); ++s) {
    auto r = m.support_vectors.row(s);
    svs.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json obj = {{"layout_version", m.layout_version},
              {"columns", m.columns},
              {"scaler", {{"mean", m.scaler.mean}, {"stddev", m.scaler.stddev}}},
              {"support_indices", m.support_indices},
              {"support_vectors", std::move(svs)},
              {"dual_coefficients", m.dual_coefficients},
              {"bias", m.bias},
              {"kernel_gamma", m.kernel_gamma},
              {"platt_a", m.platt_a},
              {"platt_b", m.platt_b},
              {"calibrated", m.calibrated}};
  out << obj.dump(1) << '\n';
}

TermClassifier read_model_json(std::istream& in) {
  try {
    const json obj = json::parse(in);
    TermClassifier m;
    m.layout_version = obj.at("layout_version").get<std::string>();
    m.columns = obj.at("columns").get<std::vector<std::string>>();
    m.scaler.mean = obj.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.stddev = obj.at("scaler").at("stddev").get<std::vector<double>>();
    m.support_indices = obj.at("support_indices").get<std::vector<std::size_t>>();
    m.dual_coefficients = obj.at("dual_coefficients").get<std::vector<double>>();
    const auto& svs = obj.at("support_vectors");
    const std::size_t d = svs.empty() ? 0 : svs.at(0).size();
    m.support_vectors = Matrix(svs.size(), d);
    for (std::size_t s = 0; s < svs.size(); ++s) {
      const auto r = svs.at(s).get<std::vector<double>>();
      if (r.size() != d) throw FormatError("model: ragged support vectors");
      std::copy(r.begin(), r.end(), m.support_vectors.row(s).begin());
    }
    if (m.dual_coefficients.size() != svs.size() || m.support_indices.size() != svs.size())
      throw FormatError("model: support vector count mismatch");
    m.bias = obj.at("bias").get<double>();
    m.kernel_gamma = obj.at("kernel_gamma").get<double>();
    m.platt_a = obj.at("platt_a").get<double>();
    m.platt_b = obj.at("platt_b").get<double>();
    m.calibrated = obj.at("calibrated").get<bool>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model json: ") + e.what());
  }
}

void write_term_set(std::ostream& out, const TermSet& terms) {
  for (const ScoredTerm& t : terms) {
    json obj = {{"surface", t.surface}, {"probability", t.probability}, {"words", t.words}};
    out << obj.dump() << '\n';
  }
}

TermSet read_term_set(std::istream& in) {
  TermSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      out.push_back({obj.at("surface").get<std::string>(),
                     obj.at("words").get<std::vector<std::string>>(),
                     obj.at("probability").get<double>()});
    } catch (const json::exception& e) {
      throw FormatError("terms line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace taxoforge
