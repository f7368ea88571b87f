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

#ifndef TAXOFORGE_FEATURES_H_
#define TAXOFORGE_FEATURES_H_

// Concept-level and word-level features for term classification.
//
// All logarithms are natural. Entropies use H = -sum p log p with
// 0 log 0 := 0, so every entropy is nonnegative.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/candidates.h"
#include "taxoforge/corpus.h"
#include "taxoforge/matrix.h"

namespace taxoforge {

inline constexpr std::string_view kFeatureLayoutVersion = "taxoforge.features.v1";

enum class Side { kLeft, kRight };

struct MarkerConfig {
  std::set<std::string> followed_by{"行业", "业务"};
  std::set<std::string> following{"从事"};
};

struct FeatureConfig {
  MarkerConfig markers;
  std::size_t threads = 1;
};

struct TfIdf {
  double tf = 0.0;
  double idf = 0.0;
};

struct MarkerFlags {
  bool followed_by = false;
  bool following = false;
};

struct IndustryFeatures {
  std::vector<double> tf;   // log(1 + occurrences in class c)
  std::vector<double> idf;  // log(N_c / max(1, docs in class c)), 0 where absent
  double entropy = 0.0;
};

// tf, idf and both boundary entropies of a single word over all of its
// token occurrences.
struct WordFeatures {
  double tf = 0.0;
  double idf = 0.0;
  double left_entropy = 0.0;
  double right_entropy = 0.0;
};

struct TermFeatureVector {
  double mi = 0.0;
  double re = 0.0;
  double le = 0.0;
  double tf = 0.0;
  double idf = 0.0;
  double followed_by = 0.0;
  double following = 0.0;
  std::vector<double> ind_tf;
  std::vector<double> ind_idf;
  double ind_entropy = 0.0;
  WordFeatures first_word;
  WordFeatures last_word;

  std::vector<double> flatten() const;
};

// Sum over adjacent word pairs of p(i,j) log[p(i,j) / (p(i) p(j))] with
// document-level probabilities. Zero for single-word terms. Throws
// UnknownWordError when a word has no document in `index`.
double concept_mutual_information(const TermCandidate& term, const WordIndex& index);

// Entropy of the neighbor token on `side` over the term's occurrences; a
// sentence edge counts as one distinguished boundary neighbor.
double boundary_entropy(const TermCandidate& term, const Corpus& corpus, Side side);

TfIdf concept_tf_idf(const TermCandidate& term, const Corpus& corpus);

MarkerFlags marker_features(const TermCandidate& term, const Corpus& corpus,
                            const MarkerConfig& markers);

// Throws InvalidArgument when the corpus has no classes.
IndustryFeatures industry_features(const TermCandidate& term, const Corpus& corpus);

// Left/right neighbor distributions of every token of a vocabulary,
// gathered in one pass over the corpus.
class WordContext {
 public:
  WordContext(const Corpus& corpus, const std::set<std::string>& vocabulary);

  double entropy(std::string_view word, Side side) const;

 private:
  struct Counts {
    std::map<std::string, std::size_t, std::less<>> left;
    std::map<std::string, std::size_t, std::less<>> right;
  };
  std::map<std::string, Counts, std::less<>> words_;
};

WordFeatures word_features(std::string_view word, const WordIndex& index,
                           const WordContext& context);

TermFeatureVector compute_features(const TermCandidate& term, const Corpus& corpus,
                                   const WordIndex& index, const WordContext& context,
                                   const MarkerConfig& markers);

std::vector<std::string> feature_columns(std::span<const std::string> class_index);

// Per-column standardization. Columns with zero variance map to 0.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Scaler fit(const Matrix& rows);
  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& rows) const;

  bool operator==(const Scaler&) const = default;
};

struct FeatureMatrix {
  std::string layout_version{kFeatureLayoutVersion};
  std::vector<std::string> columns;
  std::vector<std::string> surfaces;
  Matrix raw;
  Matrix standardized;
  Scaler scaler;
  std::vector<std::string> warnings;
};

// One row per candidate, in table order. Throws InvalidArgument on an
// empty table.
FeatureMatrix featurize(const CandidateTable& table, const Corpus& corpus,
                        const FeatureConfig& cfg);

// First line: "#layout=<version>". Second line: "surface,<columns...>".
// Then one row of raw (unscaled) values per candidate, %.17g.
void write_feature_csv(std::ostream& out, const FeatureMatrix& features);
// Fills layout_version, columns, surfaces and raw.
FeatureMatrix read_feature_csv(std::istream& in);

void write_scaler_json(std::ostream& out, const Scaler& scaler,
                       std::span<const std::string> columns);
Scaler read_scaler_json(std::istream& in);

}  // namespace taxoforge

#endif  // TAXOFORGE_FEATURES_H_
