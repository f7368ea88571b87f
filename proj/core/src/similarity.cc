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

#include "taxoforge/similarity.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

constexpr std::size_t kUnknown = std::numeric_limits<std::size_t>::max();
constexpr char kMagic[8] = {'T', 'X', 'S', 'I', 'M', 'M', 'A', 'T'};

std::vector<std::size_t> resolve(std::span<const std::string> term, const WordStats& stats,
                                 bool lenient) {
  if (term.empty()) throw InvalidArgument("term similarity: empty term");
  std::vector<std::size_t> ids;
  ids.reserve(term.size());
  for (const std::string& w : term) {
    const auto id = stats.id(w);
    if (id && stats.dct(*id) > 0) {
      ids.push_back(*id);
    } else if (lenient) {
      ids.push_back(kUnknown);
    } else {
      throw UnknownWordError("unknown word '" + w + "'");
    }
  }
  return ids;
}

double directed(std::span<const std::size_t> t1, std::span<const std::size_t> t2,
                std::span<const double> beta, const WordStats& stats,
                const SimilarityConfig& cfg) {
  double num = 0.0;
  double beta_sum = 0.0;
  for (std::size_t i : t1) {
    if (i == kUnknown) continue;
    double best = 0.0;
    for (std::size_t j : t2) {
      if (j == kUnknown) continue;
      best = std::max(best, word_similarity(i, j, stats, cfg.cooccurrence));
    }
    num += beta[i] * best;
    beta_sum += beta[i];
  }
  if (cfg.normalization == DirectedNormalization::kWeightSum)
    return beta_sum > 0.0 ? num / beta_sum : 0.0;
  return num / static_cast<double>(t1.size());
}

std::vector<double> all_weights(const WordStats& stats) {
  std::vector<double> beta(stats.vocabulary_size(), 0.0);
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (stats.dct(i) > 0 && stats.ct(i) > 0) beta[i] = word_weight(i, stats);
  }
  return beta;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  out.write(b, 8);
}

std::uint64_t get_bytes(std::istream& in, int n) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), n))
    throw FormatError("similarity matrix: truncated input");
  std::uint64_t v = 0;
  for (int k = n - 1; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}

}  // namespace

WordStats::WordStats(const Corpus& corpus, const std::set<std::string>& vocabulary)
    : num_documents_(corpus.size()), words_(vocabulary.begin(), vocabulary.end()) {
  const std::size_t v = words_.size();
  dct_.assign(v, 0);
  ct_.assign(v, 0);
  co_.assign(v * v, 0);
  std::vector<std::size_t> present;
  std::vector<char> seen(v, 0);
  for (const AnnotatedDocument& doc : corpus.documents()) {
    present.clear();
    for (const Sentence& s : doc.sentences) {
      for (const Token& t : s) {
        const auto it = std::lower_bound(words_.begin(), words_.end(), t.surface);
        if (it == words_.end() || *it != t.surface) continue;
        const std::size_t id = static_cast<std::size_t>(it - words_.begin());
        ++ct_[id];
        if (!seen[id]) {
          seen[id] = 1;
          present.push_back(id);
        }
      }
    }
    for (std::size_t a : present) {
      ++dct_[a];
      for (std::size_t b : present) ++co_[a * v + b];
    }
    for (std::size_t a : present) seen[a] = 0;
  }
}

WordStats::WordStats(std::size_t num_documents, const WordCounts& dct, const WordCounts& ct,
                     const PairCounts& co)
    : num_documents_(num_documents) {
  std::set<std::string> vocab;
  for (const auto& [w, n] : dct) vocab.insert(w);
  for (const auto& [w, n] : ct) vocab.insert(w);
  for (const auto& [p, n] : co) {
    vocab.insert(p.first);
    vocab.insert(p.second);
  }
  words_.assign(vocab.begin(), vocab.end());
  const std::size_t v = words_.size();
  dct_.assign(v, 0);
  ct_.assign(v, 0);
  co_.assign(v * v, 0);
  for (const auto& [w, n] : dct) dct_[*id(w)] = n;
  for (const auto& [w, n] : ct) ct_[*id(w)] = n;
  for (const auto& [p, n] : co) {
    const std::size_t a = *id(p.first);
    const std::size_t b = *id(p.second);
    if (n > std::min(dct_[a], dct_[b]))
      throw InvalidArgument("word stats: co(" + p.first + ", " + p.second +
                            ") exceeds a member's document count");
    co_[a * v + b] = static_cast<std::uint32_t>(n);
    co_[b * v + a] = static_cast<std::uint32_t>(n);
  }
  for (std::size_t a = 0; a < v; ++a) {
    if (dct_[a] > num_documents_)
      throw InvalidArgument("word stats: dct(" + words_[a] + ") exceeds N");
    co_[a * v + a] = static_cast<std::uint32_t>(dct_[a]);
  }
}

std::optional<std::size_t> WordStats::id(std::string_view word) const {
  const auto it = std::lower_bound(words_.begin(), words_.end(), word);
  if (it == words_.end() || *it != word) return std::nullopt;
  return static_cast<std::size_t>(it - words_.begin());
}

double word_similarity(std::size_t a, std::size_t b, const WordStats& stats,
                       CooccurrenceForm form) {
  const double da = static_cast<double>(stats.dct(a));
  const double db = static_cast<double>(stats.dct(b));
  if (da == 0.0 || db == 0.0)
    throw UnknownWordError("word similarity: zero document count for '" +
                           stats.word(da == 0.0 ? a : b) + "'");
  const double co = static_cast<double>(stats.co(a, b));
  if (form == CooccurrenceForm::kPrinted) return 2.0 * co * da * db / (da + db);
  return co * (da + db) / (2.0 * da * db);
}

double word_similarity(std::string_view w1, std::string_view w2, const WordStats& stats,
                       CooccurrenceForm form) {
  const auto a = stats.id(w1);
  if (!a) throw UnknownWordError("unknown word '" + std::string(w1) + "'");
  const auto b = stats.id(w2);
  if (!b) throw UnknownWordError("unknown word '" + std::string(w2) + "'");
  return word_similarity(*a, *b, stats, form);
}

double word_weight(std::size_t id, const WordStats& stats) {
  const std::size_t ct = stats.ct(id);
  const std::size_t dct = stats.dct(id);
  if (ct == 0 || dct == 0)
    throw UnknownWordError("word weight: '" + stats.word(id) + "' does not occur");
  return std::log(static_cast<double>(ct)) *
         std::log(static_cast<double>(stats.num_documents()) / static_cast<double>(dct));
}

double word_weight(std::string_view w, const WordStats& stats) {
  const auto id = stats.id(w);
  if (!id) throw UnknownWordError("unknown word '" + std::string(w) + "'");
  return word_weight(*id, stats);
}

double directed_term_similarity(std::span<const std::string> t1, std::span<const std::string> t2,
                                const WordStats& stats, const SimilarityConfig& cfg) {
  const auto a = resolve(t1, stats, cfg.lenient);
  const auto b = resolve(t2, stats, cfg.lenient);
  std::vector<double> beta(stats.vocabulary_size(), 0.0);
  for (std::size_t i : a)
    if (i != kUnknown && stats.ct(i) > 0) beta[i] = word_weight(i, stats);
  return directed(a, b, beta, stats, cfg);
}

double term_similarity(std::span<const std::string> t1, std::span<const std::string> t2,
                       const WordStats& stats, const SimilarityConfig& cfg) {
  return (directed_term_similarity(t1, t2, stats, cfg) +
          directed_term_similarity(t2, t1, stats, cfg)) /
         2.0;
}

std::vector<TermWords> term_words(const TermSet& terms) {
  std::vector<TermWords> out;
  out.reserve(terms.size());
  for (const ScoredTerm& t : terms) out.push_back({t.surface, t.words});
  return out;
}

double mean_offdiagonal(const Matrix& values) {
  const std::size_t n = values.rows();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += values(i, j);
  return sum / static_cast<double>(n * (n - 1));
}

SimilarityMatrix build_similarity_matrix(std::span<const TermWords> terms, const Corpus& corpus,
                                         const SimilarityConfig& cfg) {
  std::set<std::string> vocab;
  for (const TermWords& t : terms) vocab.insert(t.words.begin(), t.words.end());
  return build_similarity_matrix(terms, WordStats(corpus, vocab), cfg);
}

SimilarityMatrix build_similarity_matrix(std::span<const TermWords> terms, const WordStats& stats,
                                         const SimilarityConfig& cfg) {
  const std::size_t n = terms.size();
  std::vector<std::vector<std::size_t>> ids;
  ids.reserve(n);
  for (const TermWords& t : terms) {
    try {
      ids.push_back(resolve(t.words, stats, cfg.lenient));
    } catch (const UnknownWordError& e) {
      throw UnknownWordError("term '" + t.surface + "': " + e.what());
    } catch (const InvalidArgument&) {
      throw InvalidArgument("term '" + t.surface + "' has no words");
    }
  }
  const std::vector<double> beta = all_weights(stats);

  SimilarityMatrix out;
  for (const TermWords& t : terms) out.terms.push_back(t.surface);
  out.values = Matrix(n, n);
  // Row i owns entries (i, j) for j >= i; the mirror is filled afterwards.
  auto fill_row = [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      out.values(i, j) = (directed(ids[i], ids[j], beta, stats, cfg) +
                          directed(ids[j], ids[i], beta, stats, cfg)) /
                         2.0;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fill_row(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) fill_row(i);
      });
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out.values(i, j) = out.values(j, i);
  out.mean_offdiag = mean_offdiagonal(out.values);
  return out;
}

void write_similarity_binary(std::ostream& out, const SimilarityMatrix& m) {
  const std::size_t n = m.size();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kSimilarityFormatVersion);
  put_u64(out, n);
  for (const std::string& t : m.terms) {
    put_u32(out, static_cast<std::uint32_t>(t.size()));
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) put_u64(out, std::bit_cast<std::uint64_t>(m.values(i, j)));
  if (!out) throw FormatError("similarity matrix: write failed");
}

SimilarityMatrix read_similarity_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic))
    throw FormatError("similarity matrix: bad magic");
  const auto version = static_cast<std::uint32_t>(get_bytes(in, 4));
  if (version != kSimilarityFormatVersion)
    throw FormatError("similarity matrix: unsupported format version " + std::to_string(version));
  const std::uint64_t n = get_bytes(in, 8);
  if (n > (1u << 20)) throw FormatError("similarity matrix: implausible size");
  SimilarityMatrix m;
  m.terms.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = static_cast<std::size_t>(get_bytes(in, 4));
    std::string t(len, '\0');
    if (!in.read(t.data(), static_cast<std::streamsize>(len)))
      throw FormatError("similarity matrix: truncated term list");
    m.terms.push_back(std::move(t));
  }
  m.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = std::bit_cast<double>(get_bytes(in, 8));
      m.values(i, j) = v;
      m.values(j, i) = v;
    }
  }
  m.mean_offdiag = mean_offdiagonal(m.values);
  return m;
}

void write_similarity_sidecar(std::ostream& out, const SimilarityMatrix& m) {
  nlohmann::ordered_json j;
  j["format_version"] = kSimilarityFormatVersion;
  j["n"] = m.size();
  j["mean_offdiag"] = m.mean_offdiag;
  out << j.dump(2) << '\n';
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  out << "term";
  for (const std::string& t : m.terms) out << ',' << field(t);
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << field(m.terms[i]);
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace taxoforge
