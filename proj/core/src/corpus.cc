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

#include "taxoforge/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

using nlohmann::json;

// Empty string when the document is valid.
std::string validate_document(const AnnotatedDocument& doc) {
  std::ostringstream err;
  err << "doc_id=" << doc.doc_id << ", ";
  if (doc.doc_id.empty()) return "doc_id is empty";
  bool any_tokens = false;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& sentence = doc.sentences[s];
    any_tokens = any_tokens || !sentence.empty();
    const int len = static_cast<int>(sentence.size());
    for (int t = 0; t < len; ++t) {
      const Token& tok = sentence[t];
      if (tok.surface.empty()) {
        err << "token " << t << ": empty surface (sentence " << s << ")";
        return err.str();
      }
      if (tok.pos.empty()) {
        err << "token " << t << ": empty pos (sentence " << s << ")";
        return err.str();
      }
      if (tok.head < -1 || tok.head >= len) {
        err << "token " << t << ": head " << tok.head << " out of range (sentence " << s
            << ")";
        return err.str();
      }
      if (tok.head == t) {
        err << "token " << t << ": head points to itself (sentence " << s << ")";
        return err.str();
      }
    }
  }
  if (!any_tokens) {
    err << "field sentences: no non-empty sentence";
    return err.str();
  }
  return {};
}

template <typename T>
T required(const json& obj, const char* field, const std::string& doc_id) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw CorpusError("doc_id=" + doc_id + ", field " + field + ": missing");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CorpusError("doc_id=" + doc_id + ", field " + field + ": wrong type");
  }
}

AnnotatedDocument parse_document(const std::string& line) {
  const json obj = json::parse(line);
  if (!obj.is_object()) throw CorpusError("expected a JSON object");
  AnnotatedDocument doc;
  doc.doc_id = required<std::string>(obj, "doc_id", "?");
  doc.company_id = required<std::string>(obj, "company_id", doc.doc_id);
  doc.industry_class = required<std::string>(obj, "industry_class", doc.doc_id);
  doc.year = required<int>(obj, "year", doc.doc_id);
  auto it = obj.find("sentences");
  if (it == obj.end() || !it->is_array())
    throw CorpusError("doc_id=" + doc.doc_id + ", field sentences: missing or not an array");
  for (const json& sentence : *it) {
    if (!sentence.is_array())
      throw CorpusError("doc_id=" + doc.doc_id + ", field sentences: sentence is not an array");
    Sentence out;
    out.reserve(sentence.size());
    for (const json& tok : sentence) {
      if (!tok.is_object())
        throw CorpusError("doc_id=" + doc.doc_id + ", field sentences: token is not an object");
      Token t;
      t.surface = required<std::string>(tok, "surface", doc.doc_id);
      t.pos = required<std::string>(tok, "pos", doc.doc_id);
      t.head = required<int>(tok, "head", doc.doc_id);
      t.deprel = required<std::string>(tok, "deprel", doc.doc_id);
      out.push_back(std::move(t));
    }
    doc.sentences.push_back(std::move(out));
  }
  return doc;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

Corpus::Corpus(std::vector<AnnotatedDocument> documents) : documents_(std::move(documents)) {
  std::set<std::string> classes;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const AnnotatedDocument& doc = documents_[i];
    if (std::string err = validate_document(doc); !err.empty()) throw CorpusError(err);
    if (!by_id_.emplace(doc.doc_id, i).second)
      throw CorpusError("duplicate doc_id=" + doc.doc_id);
    classes.insert(doc.industry_class);
  }
  class_index_.assign(classes.begin(), classes.end());
  class_counts_.assign(class_index_.size(), 0);
  doc_class_.reserve(documents_.size());
  for (const AnnotatedDocument& doc : documents_) {
    auto pos = std::lower_bound(class_index_.begin(), class_index_.end(), doc.industry_class);
    const auto c = static_cast<std::size_t>(pos - class_index_.begin());
    doc_class_.push_back(c);
    ++class_counts_[c];
  }
}

std::optional<std::size_t> Corpus::find_document(std::string_view doc_id) const {
  auto it = by_id_.find(doc_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

Corpus read_corpus(std::istream& in, const LoadLimits& limits) {
  std::vector<AnnotatedDocument> docs;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (limits.max_line_bytes != 0 && line.size() > limits.max_line_bytes) {
      throw CorpusError("line " + std::to_string(line_no) + ": exceeds " +
                        std::to_string(limits.max_line_bytes) + " bytes");
    }
    AnnotatedDocument doc;
    try {
      doc = parse_document(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const CorpusError& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (std::string err = validate_document(doc); !err.empty())
      throw CorpusError("line " + std::to_string(line_no) + ": " + err);
    if (!seen.insert(doc.doc_id).second)
      throw CorpusError("line " + std::to_string(line_no) + ": duplicate doc_id=" + doc.doc_id);
    docs.push_back(std::move(doc));
    if (limits.max_documents != 0 && docs.size() >= limits.max_documents) break;
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, const LoadLimits& limits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file " + path.string());
  return read_corpus(in, limits);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const AnnotatedDocument& doc : corpus.documents()) {
    json sentences = json::array();
    for (const Sentence& sentence : doc.sentences) {
      json toks = json::array();
      for (const Token& t : sentence) {
        toks.push_back(
            {{"surface", t.surface}, {"pos", t.pos}, {"head", t.head}, {"deprel", t.deprel}});
      }
      sentences.push_back(std::move(toks));
    }
    json obj = {{"doc_id", doc.doc_id},
                {"company_id", doc.company_id},
                {"industry_class", doc.industry_class},
                {"year", doc.year},
                {"sentences", std::move(sentences)}};
    out << obj.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file " + path.string());
  write_corpus(out, corpus);
}

WordPair::WordPair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  first = std::move(a);
  second = std::move(b);
}

WordCounts document_counts(const Corpus& corpus, const std::set<std::string>& words) {
  const WordIndex index(corpus, words);
  WordCounts out;
  for (const std::string& w : words) out.emplace(w, index.document_count(w));
  return out;
}

PairCounts cooccurrence_counts(const Corpus& corpus, const std::set<WordPair>& pairs) {
  std::set<std::string> vocab;
  for (const WordPair& p : pairs) {
    vocab.insert(p.first);
    vocab.insert(p.second);
  }
  const WordIndex index(corpus, vocab);
  PairCounts out;
  for (const WordPair& p : pairs)
    out.emplace(p, index.cooccurrence_count(p.first, p.second));
  return out;
}

WordIndex::WordIndex(const Corpus& corpus) { build(corpus, nullptr); }

WordIndex::WordIndex(const Corpus& corpus, const std::set<std::string>& vocabulary) {
  build(corpus, &vocabulary);
}

void WordIndex::build(const Corpus& corpus, const std::set<std::string>* vocabulary) {
  num_documents_ = corpus.size();
  if (vocabulary != nullptr) {
    for (const std::string& w : *vocabulary) entries_.emplace(w, Entry{});
  }
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const Sentence& sentence : corpus.document(d).sentences) {
      for (const Token& tok : sentence) {
        auto it = entries_.find(tok.surface);
        if (it == entries_.end()) {
          if (vocabulary != nullptr) continue;
          it = entries_.emplace(tok.surface, Entry{}).first;
        }
        Entry& e = it->second;
        ++e.tokens;
        const auto doc = static_cast<std::uint32_t>(d);
        if (e.docs.empty() || e.docs.back() != doc) e.docs.push_back(doc);
      }
    }
  }
}

bool WordIndex::contains(std::string_view word) const {
  auto it = entries_.find(word);
  return it != entries_.end() && it->second.tokens > 0;
}

std::size_t WordIndex::document_count(std::string_view word) const {
  return postings(word).size();
}

std::size_t WordIndex::token_count(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? 0 : it->second.tokens;
}

std::span<const std::uint32_t> WordIndex::postings(std::string_view word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return {};
  return it->second.docs;
}

std::size_t WordIndex::cooccurrence_count(std::string_view a, std::string_view b) const {
  auto pa = postings(a);
  auto pb = postings(b);
  std::size_t count = 0;
  auto ia = pa.begin();
  auto ib = pb.begin();
  while (ia != pa.end() && ib != pb.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace taxoforge
