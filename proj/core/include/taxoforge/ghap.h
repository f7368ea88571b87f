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

#ifndef TAXOFORGE_GHAP_H_
#define TAXOFORGE_GHAP_H_

// Affinity propagation and its greedy layer-by-layer recursion.
//
// One sweep, with c the preference vector:
//   rho_ij   = s_ij - max_{k != j} (alpha_ik + s_ik)
//   alpha_ii = c_i + sum_{k != i} max(0, rho_ki)
//   alpha_ij = min(0, c_j + rho_jj + sum_{k not in {i, j}} max(0, rho_kj))
// each followed by damping new = lambda old + (1 - lambda) computed.
// Point i is an exemplar when alpha_ii + rho_ii > 0.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "taxoforge/matrix.h"
#include "taxoforge/similarity.h"

namespace taxoforge {

enum class PreferenceStrategy { kMedian, kMinimum };

// Where the preference vector enters the messages.
enum class PreferencePlacement {
  // c in the availability updates and on the diagonal of S.
  kBoth,
  // c in the availability updates only; S keeps its own diagonal.
  kAvailability,
  // c on the diagonal of S only (the classic formulation).
  kSimilarity,
};

// Column used by the off-diagonal availability sum.
enum class AvailabilitySum {
  kExemplarColumn,  // max(0, rho_kj): support for candidate exemplar j
  kPointColumn,     // max(0, rho_ki)
};

struct APConfig {
  double damping = 0.9;
  std::size_t stable_window = 50;
  std::size_t max_iterations = 1000;
  PreferenceStrategy preference = PreferenceStrategy::kMedian;
  double preference_scale = 1.0;
  PreferencePlacement placement = PreferencePlacement::kSimilarity;
  AvailabilitySum availability_sum = AvailabilitySum::kExemplarColumn;
  // Deterministic jitter, relative to max |s|, added to the working copy
  // of S to break exact ties. 0 disables it.
  double tie_noise = 1e-10;
  // After convergence, move each exemplar to the member with the largest
  // summed similarity to its cluster (preference on the diagonal).
  bool refine_exemplars = true;

  // Throws InvalidArgument.
  void validate() const;
};

struct APState {
  Matrix s;  // similarities with the placement-specific diagonal
  Matrix a;
  Matrix r;
  std::vector<double> preferences;
  std::size_t iteration = 0;
  double damping = 0.9;
  bool preference_in_availability = false;
  AvailabilitySum availability_sum = AvailabilitySum::kExemplarColumn;

  std::size_t size() const { return preferences.size(); }
};

// Uniform preference vector: scale times the median (or minimum) of the
// off-diagonal entries. For n = 1 the single diagonal entry is used.
// Throws InvalidArgument for n = 0.
std::vector<double> init_preferences(const Matrix& similarity, PreferenceStrategy strategy,
                                     double scale);

// Zero messages over `similarity` with the diagonal set according to
// cfg.placement.
APState make_ap_state(const Matrix& similarity, std::vector<double> preferences,
                      const APConfig& cfg);

// One synchronous sweep, responsibilities first. Damping 1 leaves the
// state unchanged. Throws NumericalError naming the first non-finite cell.
void ap_iterate(APState& state);

// Exemplar indicator. Falls back to the argmax of alpha_ii + rho_ii
// (lowest index on ties) when no entry is positive.
std::vector<bool> extract_exemplars(const APState& state);
std::vector<std::size_t> exemplar_indices(const std::vector<bool>& indicator);

// Each point goes to the exemplar with the highest similarity, lowest
// exemplar index on ties; exemplars map to themselves.
std::vector<std::size_t> assign_members(const Matrix& similarity,
                                        std::span<const std::size_t> exemplars);

// Sum of exemplar preferences plus s(i, assignment[i]) over non-exemplars.
double net_similarity(const Matrix& similarity, std::span<const double> preferences,
                      std::span<const std::size_t> exemplars,
                      std::span<const std::size_t> assignment);

struct ClusterResult {
  std::vector<std::size_t> exemplars;   // sorted
  std::vector<std::size_t> assignment;  // point -> exemplar index
  std::vector<double> preferences;
  double net_similarity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Iterates until the exemplar set is unchanged for cfg.stable_window
// sweeps or cfg.max_iterations is reached (converged = false).
// Assignment and net similarity use the unjittered matrix.
ClusterResult cluster_layer(const Matrix& similarity, const APConfig& cfg = {});

struct GhapConfig {
  APConfig ap;
  std::size_t levels = 3;
};

// levels[0] holds every term index; levels[k + 1] holds the exemplars
// found when clustering levels[k]. parents[k][i] is the term index of the
// parent of levels[k][i], for every level below the top.
struct Taxonomy {
  std::vector<std::string> terms;
  std::vector<std::vector<std::size_t>> levels;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<bool> converged;  // per clustered layer

  std::size_t num_levels() const { return levels.size(); }
  const std::vector<std::size_t>& roots() const { return levels.back(); }
  // Members of level `k` whose parent is term `parent`, in level order.
  std::vector<std::size_t> children(std::size_t k, std::size_t parent) const;

  bool operator==(const Taxonomy& other) const {
    return terms == other.terms && levels == other.levels && parents == other.parents;
  }
};

// Greedy bottom-up recursion; each layer clusters the restriction of the
// original matrix to the previous layer's exemplars with preferences
// recomputed on that submatrix.
Taxonomy build_hierarchy(const Matrix& similarity, std::vector<std::string> terms,
                         const GhapConfig& cfg = {});
Taxonomy build_hierarchy(const SimilarityMatrix& matrix, const GhapConfig& cfg = {});

// Throws InvalidArgument describing the first violated structural rule.
void validate_taxonomy(const Taxonomy& taxonomy);

void write_hierarchy_json(std::ostream& out, const Taxonomy& taxonomy);
Taxonomy read_hierarchy_json(std::istream& in);

}  // namespace taxoforge

#endif  // TAXOFORGE_GHAP_H_
