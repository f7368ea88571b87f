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

#ifndef TAXOFORGE_CANDIDATES_H_
#define TAXOFORGE_CANDIDATES_H_

// Concept-term candidate extraction.
//
// Two templates run over every sentence:
//   * noun template: maximal runs of admissible tokens (noun-type, numeral
//     or verb POS) that end in a noun-type token;
//   * attributive template: contiguous spans whose internal dependency arcs
//     are all ATT and which have exactly one token headed outside the span.
// Occurrences are merged by surface into a CandidateTable, and candidates
// containing a stop word are labeled negative for PU training.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/corpus.h"

namespace taxoforge {

enum class PuLabel { kUnlabeled, kNegative };

std::string_view to_string(PuLabel label);
PuLabel parse_pu_label(std::string_view text);

// Location of one candidate occurrence: document index in the corpus,
// sentence index, first token, token count.
struct Occurrence {
  std::uint32_t doc = 0;
  std::uint32_t sentence = 0;
  std::uint32_t begin = 0;
  std::uint32_t length = 0;

  auto operator<=>(const Occurrence&) const = default;
};

struct TermCandidate {
  std::vector<std::string> words;
  std::string surface;
  // Sorted, unique. term_freq() counts these.
  std::vector<Occurrence> occurrences;
  // Sorted unique document indices; the provenance set.
  std::vector<std::size_t> docs;
  PuLabel label = PuLabel::kUnlabeled;

  std::size_t term_freq() const { return occurrences.size(); }
  std::size_t doc_count() const { return docs.size(); }

  bool operator==(const TermCandidate&) const = default;
};

struct CandidateStats {
  std::size_t total = 0;
  std::size_t negatives = 0;
};

class CandidateTable {
 public:
  CandidateTable() = default;
  // Candidates must have unique surfaces; order is kept as given.
  explicit CandidateTable(std::vector<TermCandidate> candidates);

  std::span<const TermCandidate> candidates() const { return candidates_; }
  const TermCandidate& operator[](std::size_t i) const { return candidates_[i]; }
  std::size_t size() const { return candidates_.size(); }
  bool empty() const { return candidates_.empty(); }

  const TermCandidate* find(std::string_view surface) const;
  CandidateStats stats() const;

  bool operator==(const CandidateTable& o) const { return candidates_ == o.candidates_; }

 private:
  std::vector<TermCandidate> candidates_;
  std::map<std::string, std::size_t, std::less<>> by_surface_;
};

struct TemplateConfig {
  std::set<std::string> noun_tags{"n", "nh", "ni", "nl", "ns", "nt", "nz", "j"};
  std::set<std::string> numeral_tags{"m"};
  std::set<std::string> verb_tags{"v"};
  // Surfaces that never join a noun run even when their POS is admissible.
  // Defaults to the "following" context marker so that the marker stays
  // outside the concept it introduces.
  std::set<std::string> run_breakers{"从事"};
  std::string attributive_relation = "ATT";
  std::size_t max_len = 8;
  std::size_t noun_min_len = 1;
  std::size_t attributive_min_len = 2;
  std::size_t min_doc_count = 3;
  // Also emit every noun-final sub-run of a maximal run.
  bool emit_subruns = false;
  std::size_t threads = 1;
};

// Occurrences are tagged with `doc_index`.
std::vector<Occurrence> extract_noun_candidates(const AnnotatedDocument& doc,
                                                std::uint32_t doc_index,
                                                const TemplateConfig& cfg);
std::vector<Occurrence> extract_attributive_candidates(const AnnotatedDocument& doc,
                                                       std::uint32_t doc_index,
                                                       const TemplateConfig& cfg);

// Union of both templates over the corpus, merged by surface, filtered by
// min_doc_count, ordered by descending term_freq then ascending surface.
// All candidates come out unlabeled.
CandidateTable collect_candidates(const Corpus& corpus, const TemplateConfig& cfg);

// Throws InvalidArgument when `stopwords` is empty.
CandidateTable label_negatives(const CandidateTable& table,
                               const std::set<std::string>& stopwords);

// One word per line; '#' starts a comment; surrounding whitespace trimmed.
std::set<std::string> read_stopwords(std::istream& in);
std::set<std::string> load_stopwords(const std::filesystem::path& path);

// JSONL: surface, words, term_freq, doc_count, pu_label, plus doc_ids and
// occurrences ([doc_id, sentence, begin]) so the table can be reloaded
// against the same corpus.
void write_candidates(std::ostream& out, const CandidateTable& table, const Corpus& corpus);
CandidateTable read_candidates(std::istream& in, const Corpus& corpus);

// Words of an occurrence, read back from the corpus.
std::vector<std::string> occurrence_words(const Corpus& corpus, const Occurrence& occ);

}  // namespace taxoforge

#endif  // TAXOFORGE_CANDIDATES_H_
