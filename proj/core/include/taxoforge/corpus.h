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

#ifndef TAXOFORGE_CORPUS_H_
#define TAXOFORGE_CORPUS_H_

// Annotated corpus data model, JSONL loading and document-level counts.
//
// A corpus is a sequence of business-model descriptions, each already
// segmented, POS-tagged and dependency-parsed by an external tool. One
// JSON object per line:
//
//   {"doc_id": str, "company_id": str, "industry_class": str, "year": int,
//    "sentences": [[{"surface": str, "pos": str, "head": int,
//                    "deprel": str}, ...], ...]}
//
// `head` is the 0-based index of the dependency head inside the same
// sentence, or -1 for the root. Surfaces are compared byte-wise.

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

namespace taxoforge {

struct Token {
  std::string surface;
  std::string pos;
  int head = -1;
  std::string deprel;

  bool operator==(const Token&) const = default;
};

using Sentence = std::vector<Token>;

struct AnnotatedDocument {
  std::string doc_id;
  std::string company_id;
  std::string industry_class;
  int year = 0;
  std::vector<Sentence> sentences;

  bool operator==(const AnnotatedDocument&) const = default;
};

// Immutable, validated collection of documents.
class Corpus {
 public:
  Corpus() = default;

  // Validates every document (token invariants, unique doc ids, at least
  // one non-empty sentence) and derives the sorted class index. Throws
  // CorpusError.
  explicit Corpus(std::vector<AnnotatedDocument> documents);

  std::span<const AnnotatedDocument> documents() const { return documents_; }
  const AnnotatedDocument& document(std::size_t i) const { return documents_[i]; }

  // N: total number of documents.
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  // Distinct industry classes, sorted lexicographically.
  std::span<const std::string> class_index() const { return class_index_; }

  // Position of document `i`'s class inside class_index().
  std::size_t class_of(std::size_t i) const { return doc_class_[i]; }

  // Number of documents per class, aligned with class_index().
  std::span<const std::size_t> class_document_counts() const { return class_counts_; }

  std::optional<std::size_t> find_document(std::string_view doc_id) const;

  bool operator==(const Corpus& other) const { return documents_ == other.documents_; }

 private:
  std::vector<AnnotatedDocument> documents_;
  std::vector<std::string> class_index_;
  std::vector<std::size_t> doc_class_;
  std::vector<std::size_t> class_counts_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

struct LoadLimits {
  // Stop after this many documents; 0 reads everything.
  std::size_t max_documents = 0;
  // Reject lines longer than this many bytes; 0 disables the check.
  std::size_t max_line_bytes = 0;
};

// Throws CorpusError carrying the line number (malformed JSON) or the
// doc_id and field (schema violations).
Corpus read_corpus(std::istream& in, const LoadLimits& limits = {});
Corpus load_corpus(const std::filesystem::path& path, const LoadLimits& limits = {});

void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Unordered word pair, stored with first <= second.
struct WordPair {
  std::string first;
  std::string second;

  WordPair() = default;
  WordPair(std::string a, std::string b);

  auto operator<=>(const WordPair&) const = default;
};

using WordCounts = std::map<std::string, std::size_t, std::less<>>;
using PairCounts = std::map<WordPair, std::size_t>;

// dct(w): number of documents containing w at least once.
WordCounts document_counts(const Corpus& corpus, const std::set<std::string>& words);

// co(w1, w2): number of documents containing both words.
PairCounts cooccurrence_counts(const Corpus& corpus, const std::set<WordPair>& pairs);

// Posting lists (sorted document indices) and token counts per word.
// Restricting to a vocabulary keeps memory proportional to what callers
// actually query.
class WordIndex {
 public:
  explicit WordIndex(const Corpus& corpus);
  WordIndex(const Corpus& corpus, const std::set<std::string>& vocabulary);

  std::size_t num_documents() const { return num_documents_; }

  bool contains(std::string_view word) const;
  std::size_t document_count(std::string_view word) const;
  std::size_t token_count(std::string_view word) const;
  std::size_t cooccurrence_count(std::string_view a, std::string_view b) const;

  // Sorted document indices containing `word`; empty when absent.
  std::span<const std::uint32_t> postings(std::string_view word) const;

 private:
  struct Entry {
    std::vector<std::uint32_t> docs;
    std::size_t tokens = 0;
  };
  void build(const Corpus& corpus, const std::set<std::string>* vocabulary);

  std::size_t num_documents_ = 0;
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace taxoforge

#endif  // TAXOFORGE_CORPUS_H_
