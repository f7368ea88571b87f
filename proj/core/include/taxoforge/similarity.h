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

#ifndef TAXOFORGE_SIMILARITY_H_
#define TAXOFORGE_SIMILARITY_H_

// Co-occurrence term similarity.
//
// Word level:  s(w1, w2) = co(w1, w2) / harmonic_mean(dct(w1), dct(w2))
//                        = co (dct1 + dct2) / (2 dct1 dct2),  in [0, 1].
// Word weight: beta(w) = log(ct(w)) log(N / dct(w)).
// Term level:  s(t1 -> t2) = sum_{i in t1} beta_i max_{j in t2} s(i, j) / len(t1)
//              s(t1, t2)   = (s(t1 -> t2) + s(t2 -> t1)) / 2.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/corpus.h"
#include "taxoforge/matrix.h"
#include "taxoforge/pu_classifier.h"

namespace taxoforge {

enum class CooccurrenceForm {
  // Co-occurrence divided by the harmonic mean of the document counts.
  kProse,
  // 2 co dct1 dct2 / (dct1 + dct2): co-occurrence times the harmonic mean.
  kPrinted,
};

enum class DirectedNormalization {
  kLength,     // divide by the word count of t1
  kWeightSum,  // divide by sum of beta over t1 (0 when that sum is 0)
};

struct SimilarityConfig {
  CooccurrenceForm cooccurrence = CooccurrenceForm::kProse;
  DirectedNormalization normalization = DirectedNormalization::kLength;
  // Unknown words contribute 0 instead of raising UnknownWordError.
  bool lenient = false;
  std::size_t threads = 1;
};

// Document counts, token counts and pairwise co-document counts over a
// fixed vocabulary.
class WordStats {
 public:
  WordStats(const Corpus& corpus, const std::set<std::string>& vocabulary);
  // Explicit counts. Missing co entries are 0; co(w, w) is forced to
  // dct(w). Throws InvalidArgument when co exceeds a member's dct.
  WordStats(std::size_t num_documents, const WordCounts& dct, const WordCounts& ct,
            const PairCounts& co);

  std::size_t num_documents() const { return num_documents_; }
  std::size_t vocabulary_size() const { return words_.size(); }
  std::optional<std::size_t> id(std::string_view word) const;
  const std::string& word(std::size_t id) const { return words_[id]; }

  std::size_t dct(std::size_t id) const { return dct_[id]; }
  std::size_t ct(std::size_t id) const { return ct_[id]; }
  std::size_t co(std::size_t a, std::size_t b) const {
    return co_[a * words_.size() + b];
  }

 private:
  void index_words();

  std::size_t num_documents_ = 0;
  std::vector<std::string> words_;  // sorted
  std::vector<std::size_t> dct_;
  std::vector<std::size_t> ct_;
  std::vector<std::uint32_t> co_;  // dense, symmetric
};

// By id. Throws UnknownWordError when either word has dct = 0.
double word_similarity(std::size_t a, std::size_t b, const WordStats& stats,
                       CooccurrenceForm form = CooccurrenceForm::kProse);
double word_similarity(std::string_view w1, std::string_view w2, const WordStats& stats,
                       CooccurrenceForm form = CooccurrenceForm::kProse);

// beta(w). Throws UnknownWordError when ct or dct is 0.
double word_weight(std::size_t id, const WordStats& stats);
double word_weight(std::string_view w, const WordStats& stats);

// Throws InvalidArgument on an empty term, UnknownWordError on an
// unknown word unless cfg.lenient.
double directed_term_similarity(std::span<const std::string> t1, std::span<const std::string> t2,
                                const WordStats& stats, const SimilarityConfig& cfg = {});
double term_similarity(std::span<const std::string> t1, std::span<const std::string> t2,
                       const WordStats& stats, const SimilarityConfig& cfg = {});

struct TermWords {
  std::string surface;
  std::vector<std::string> words;
};

std::vector<TermWords> term_words(const TermSet& terms);

struct SimilarityMatrix {
  std::vector<std::string> terms;
  Matrix values;
  double mean_offdiag = 0.0;

  std::size_t size() const { return terms.size(); }
};

// Mean of strictly off-diagonal entries; 0 for n < 2.
double mean_offdiagonal(const Matrix& values);

// Full symmetric matrix. Throws UnknownWordError naming the term when a
// word does not occur in the corpus (unless cfg.lenient).
SimilarityMatrix build_similarity_matrix(std::span<const TermWords> terms, const Corpus& corpus,
                                         const SimilarityConfig& cfg = {});
SimilarityMatrix build_similarity_matrix(std::span<const TermWords> terms, const WordStats& stats,
                                         const SimilarityConfig& cfg = {});

inline constexpr std::uint32_t kSimilarityFormatVersion = 1;

// Binary layout, little-endian:
//   "TXSIMMAT" | u32 version | u64 n | n x (u32 byte length, UTF-8 term)
//   | n(n+1)/2 f64, lower triangle row by row (j <= i).
void write_similarity_binary(std::ostream& out, const SimilarityMatrix& m);
SimilarityMatrix read_similarity_binary(std::istream& in);
// {"format_version", "n", "mean_offdiag"}
void write_similarity_sidecar(std::ostream& out, const SimilarityMatrix& m);
// Header row of terms, then one row per term.
void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m);

}  // namespace taxoforge

#endif  // TAXOFORGE_SIMILARITY_H_
