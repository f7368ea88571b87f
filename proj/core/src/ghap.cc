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

#include "taxoforge/ghap.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

void check_finite(const Matrix& m, const char* name) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        std::ostringstream msg;
        msg << "affinity propagation: non-finite " << name << " at (" << i << ", " << j << ")";
        throw NumericalError(msg.str());
      }
    }
  }
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2.0;
}

// splitmix64, mapped to [0, 1).
double jitter(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> refine(const Matrix& s, std::span<const double> prefs,
                                std::vector<std::size_t> exemplars) {
  const std::vector<std::size_t> assignment = assign_members(s, exemplars);
  std::vector<std::size_t> out;
  for (std::size_t e : exemplars) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == e) members.push_back(i);
    std::size_t best = e;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t c : members) {
      double sum = 0.0;
      for (std::size_t i : members) sum += i == c ? prefs[c] : s(i, c);
      if (sum > best_sum) {
        best_sum = sum;
        best = c;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void APConfig::validate() const {
  if (!(damping >= 0.5 && damping < 1.0))
    throw InvalidArgument("ap: damping must lie in [0.5, 1)");
  if (stable_window == 0) throw InvalidArgument("ap: stable_window must be positive");
  if (max_iterations == 0) throw InvalidArgument("ap: max_iterations must be positive");
  if (!std::isfinite(preference_scale))
    throw InvalidArgument("ap: preference scale must be finite");
  if (!(tie_noise >= 0.0 && tie_noise < 1e-3))
    throw InvalidArgument("ap: tie_noise must lie in [0, 1e-3)");
}

std::vector<double> init_preferences(const Matrix& similarity, PreferenceStrategy strategy,
                                     double scale) {
  const std::size_t n = similarity.rows();
  if (n == 0) throw InvalidArgument("init_preferences: empty similarity matrix");
  if (similarity.cols() != n) throw InvalidArgument("init_preferences: matrix is not square");
  if (n == 1) return {scale * similarity(0, 0)};
  std::vector<double> off;
  off.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) off.push_back(similarity(i, j));
  const double base = strategy == PreferenceStrategy::kMedian
                          ? median(std::move(off))
                          : *std::min_element(off.begin(), off.end());
  return std::vector<double>(n, scale * base);
}

APState make_ap_state(const Matrix& similarity, std::vector<double> preferences,
                      const APConfig& cfg) {
  const std::size_t n = similarity.rows();
  if (similarity.cols() != n || preferences.size() != n)
    throw InvalidArgument("ap: similarity and preferences disagree in size");
  APState st;
  st.s = similarity;
  if (cfg.placement != PreferencePlacement::kAvailability)
    for (std::size_t i = 0; i < n; ++i) st.s(i, i) = preferences[i];
  st.a = Matrix(n, n);
  st.r = Matrix(n, n);
  st.preferences = std::move(preferences);
  st.damping = cfg.damping;
  st.preference_in_availability = cfg.placement != PreferencePlacement::kSimilarity;
  st.availability_sum = cfg.availability_sum;
  return st;
}

void ap_iterate(APState& st) {
  const std::size_t n = st.size();
  const double lambda = st.damping;
  const double keep = 1.0 - lambda;

  for (std::size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    double second = best;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = st.a(i, k) + st.s(i, k);
      if (v > best) {
        second = best;
        best = v;
        arg = k;
      } else if (v > second) {
        second = v;
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double m = j == arg ? second : best;
      // Empty max (n = 1) contributes nothing.
      const double computed = std::isinf(m) ? st.s(i, j) : st.s(i, j) - m;
      st.r(i, j) = lambda * st.r(i, j) + keep * computed;
    }
  }
  check_finite(st.r, "responsibility");

  std::vector<double> support(n, 0.0);  // sum_{k != j} max(0, rho_kj)
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      if (k != j) support[j] += std::max(0.0, st.r(k, j));

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = st.preference_in_availability ? st.preferences[j] : 0.0;
      double computed;
      if (i == j) {
        computed = c + support[j];
      } else if (st.availability_sum == AvailabilitySum::kExemplarColumn) {
        computed = std::min(0.0, c + st.r(j, j) + support[j] - std::max(0.0, st.r(i, j)));
      } else {
        computed = std::min(0.0, c + st.r(j, j) + support[i] - std::max(0.0, st.r(j, i)));
      }
      st.a(i, j) = lambda * st.a(i, j) + keep * computed;
    }
  }
  check_finite(st.a, "availability");
  ++st.iteration;
}

std::vector<bool> extract_exemplars(const APState& st) {
  const std::size_t n = st.size();
  std::vector<bool> e(n, false);
  bool any = false;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = st.a(i, i) + st.r(i, i);
    if (v > 0.0) e[i] = any = true;
    if (v > st.a(arg, arg) + st.r(arg, arg)) arg = i;
  }
  if (!any && n > 0) e[arg] = true;
  return e;
}

std::vector<std::size_t> exemplar_indices(const std::vector<bool>& indicator) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < indicator.size(); ++i)
    if (indicator[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> assign_members(const Matrix& similarity,
                                        std::span<const std::size_t> exemplars) {
  if (exemplars.empty()) throw InvalidArgument("assign_members: no exemplars");
  std::vector<std::size_t> sorted(exemplars.begin(), exemplars.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = similarity.rows();
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(sorted.begin(), sorted.end(), i)) {
      out[i] = i;
      continue;
    }
    std::size_t best = sorted.front();
    for (std::size_t e : sorted)
      if (similarity(i, e) > similarity(i, best)) best = e;
    out[i] = best;
  }
  return out;
}

double net_similarity(const Matrix& similarity, std::span<const double> preferences,
                      std::span<const std::size_t> exemplars,
                      std::span<const std::size_t> assignment) {
  double total = 0.0;
  for (std::size_t e : exemplars) total += preferences[e];
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != i) total += similarity(i, assignment[i]);
  return total;
}

ClusterResult cluster_layer(const Matrix& similarity, const APConfig& cfg) {
  cfg.validate();
  const std::size_t n = similarity.rows();
  if (n == 0) throw InvalidArgument("cluster_layer: empty similarity matrix");
  ClusterResult res;
  res.preferences = init_preferences(similarity, cfg.preference, cfg.preference_scale);
  APState st = make_ap_state(similarity, res.preferences, cfg);
  if (cfg.tie_noise > 0.0) {
    double scale = 0.0;
    for (double v : similarity.data()) scale = std::max(scale, std::abs(v));
    const double amp = cfg.tie_noise * (scale > 0.0 ? scale : 1.0);
    std::uint64_t seed = 0x5eed;
    for (double& v : st.s.data()) v += amp * jitter(seed);
  }

  std::vector<bool> prev;
  std::size_t stable = 0;
  while (st.iteration < cfg.max_iterations) {
    ap_iterate(st);
    std::vector<bool> e = extract_exemplars(st);
    if (e == prev) {
      ++stable;
    } else {
      prev = std::move(e);
      stable = 1;
    }
    if (stable >= cfg.stable_window) {
      res.converged = true;
      break;
    }
  }
  res.iterations = st.iteration;
  res.exemplars = exemplar_indices(prev);
  if (cfg.refine_exemplars) res.exemplars = refine(similarity, res.preferences, res.exemplars);
  res.assignment = assign_members(similarity, res.exemplars);
  res.net_similarity = net_similarity(similarity, res.preferences, res.exemplars, res.assignment);
  return res;
}

std::vector<std::size_t> Taxonomy::children(std::size_t k, std::size_t parent) const {
  std::vector<std::size_t> out;
  if (k >= parents.size()) return out;
  for (std::size_t i = 0; i < levels[k].size(); ++i)
    if (parents[k][i] == parent) out.push_back(levels[k][i]);
  return out;
}

Taxonomy build_hierarchy(const Matrix& similarity, std::vector<std::string> terms,
                         const GhapConfig& cfg) {
  const std::size_t n = similarity.rows();
  if (n == 0) throw InvalidArgument("build_hierarchy: no terms");
  if (cfg.levels == 0) throw InvalidArgument("build_hierarchy: levels must be positive");
  if (terms.size() != n) throw InvalidArgument("build_hierarchy: term list size mismatch");
  Taxonomy tax;
  tax.terms = std::move(terms);
  tax.levels.emplace_back(n);
  std::iota(tax.levels[0].begin(), tax.levels[0].end(), std::size_t{0});
  for (std::size_t k = 1; k < cfg.levels; ++k) {
    const std::vector<std::size_t>& below = tax.levels[k - 1];
    const ClusterResult res = cluster_layer(similarity.submatrix(below), cfg.ap);
    std::vector<std::size_t> level;
    for (std::size_t e : res.exemplars) level.push_back(below[e]);
    std::vector<std::size_t> parent(below.size());
    for (std::size_t i = 0; i < below.size(); ++i) parent[i] = below[res.assignment[i]];
    tax.levels.push_back(std::move(level));
    tax.parents.push_back(std::move(parent));
    tax.converged.push_back(res.converged);
  }
  return tax;
}

Taxonomy build_hierarchy(const SimilarityMatrix& matrix, const GhapConfig& cfg) {
  return build_hierarchy(matrix.values, matrix.terms, cfg);
}

void validate_taxonomy(const Taxonomy& tax) {
  auto fail = [](const std::string& what) { throw InvalidArgument("taxonomy: " + what); };
  const std::size_t n = tax.terms.size();
  if (tax.levels.empty()) fail("no levels");
  if (tax.parents.size() + 1 != tax.levels.size()) fail("parent maps do not match levels");
  if (tax.levels[0].size() != n) fail("level 0 must hold every term");
  for (std::size_t i = 0; i < n; ++i)
    if (tax.levels[0][i] != i) fail("level 0 must list terms in order");
  for (std::size_t k = 0; k + 1 < tax.levels.size(); ++k) {
    const auto& below = tax.levels[k];
    const auto& above = tax.levels[k + 1];
    const auto& parent = tax.parents[k];
    if (above.empty()) fail("level " + std::to_string(k + 1) + " is empty");
    if (!std::is_sorted(above.begin(), above.end()) ||
        std::adjacent_find(above.begin(), above.end()) != above.end())
      fail("level " + std::to_string(k + 1) + " is not strictly increasing");
    if (parent.size() != below.size()) fail("level " + std::to_string(k) + " parent map size");
    for (std::size_t e : above) {
      const auto it = std::lower_bound(below.begin(), below.end(), e);
      if (it == below.end() || *it != e)
        fail("exemplar " + std::to_string(e) + " is missing from level " + std::to_string(k));
      if (parent[static_cast<std::size_t>(it - below.begin())] != e)
        fail("exemplar " + std::to_string(e) + " is not its own parent at level " +
             std::to_string(k));
    }
    for (std::size_t p : parent)
      if (!std::binary_search(above.begin(), above.end(), p))
        fail("parent " + std::to_string(p) + " is not an exemplar of level " +
             std::to_string(k + 1));
  }
}

void write_hierarchy_json(std::ostream& out, const Taxonomy& tax) {
  nlohmann::ordered_json j;
  j["terms"] = tax.terms;
  j["levels"] = tax.levels;
  j["parents"] = tax.parents;
  j["converged"] = tax.converged;
  out << j.dump() << '\n';
}

Taxonomy read_hierarchy_json(std::istream& in) {
  Taxonomy tax;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    tax.terms = j.at("terms").get<std::vector<std::string>>();
    tax.levels = j.at("levels").get<std::vector<std::vector<std::size_t>>>();
    tax.parents = j.at("parents").get<std::vector<std::vector<std::size_t>>>();
    tax.converged = j.value("converged", std::vector<bool>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("hierarchy: ") + e.what());
  }
  validate_taxonomy(tax);
  return tax;
}

}  // namespace taxoforge
