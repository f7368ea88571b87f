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

#include "taxoforge/candidates.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

using nlohmann::json;

bool is_noun(const Token& tok, const TemplateConfig& cfg) {
  return cfg.noun_tags.count(tok.pos) != 0;
}

bool is_admissible(const Token& tok, const TemplateConfig& cfg) {
  if (cfg.run_breakers.count(tok.surface) != 0) return false;
  return is_noun(tok, cfg) || cfg.numeral_tags.count(tok.pos) != 0 ||
         cfg.verb_tags.count(tok.pos) != 0;
}

bool length_ok(std::size_t len, std::size_t min_len, std::size_t max_len) {
  return len >= min_len && len <= max_len;
}

// True when [begin, end) has exactly one token headed outside the span and
// every arc inside the span carries the attributive relation.
bool is_attributive_span(const Sentence& sentence, std::size_t begin, std::size_t end,
                         const std::string& relation) {
  std::size_t external = 0;
  for (std::size_t t = begin; t < end; ++t) {
    const int head = sentence[t].head;
    const bool inside = head >= static_cast<int>(begin) && head < static_cast<int>(end);
    if (inside) {
      if (sentence[t].deprel != relation) return false;
    } else if (++external > 1) {
      return false;
    }
  }
  return external == 1;
}

void extract_document(const AnnotatedDocument& doc, std::uint32_t d, const TemplateConfig& cfg,
                      std::vector<Occurrence>& out) {
  auto nouns = extract_noun_candidates(doc, d, cfg);
  auto atts = extract_attributive_candidates(doc, d, cfg);
  out.insert(out.end(), nouns.begin(), nouns.end());
  out.insert(out.end(), atts.begin(), atts.end());
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const std::string& w : words) s += w;
  return s;
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(PuLabel label) {
  return label == PuLabel::kNegative ? "negative" : "unlabeled";
}

PuLabel parse_pu_label(std::string_view text) {
  if (text == "negative") return PuLabel::kNegative;
  if (text == "unlabeled") return PuLabel::kUnlabeled;
  throw FormatError("unknown pu_label '" + std::string(text) + "'");
}

CandidateTable::CandidateTable(std::vector<TermCandidate> candidates)
    : candidates_(std::move(candidates)) {
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    if (!by_surface_.emplace(candidates_[i].surface, i).second)
      throw InvalidArgument("duplicate candidate surface '" + candidates_[i].surface + "'");
  }
}

const TermCandidate* CandidateTable::find(std::string_view surface) const {
  auto it = by_surface_.find(surface);
  return it == by_surface_.end() ? nullptr : &candidates_[it->second];
}

CandidateStats CandidateTable::stats() const {
  CandidateStats s;
  s.total = candidates_.size();
  s.negatives = static_cast<std::size_t>(
      std::count_if(candidates_.begin(), candidates_.end(),
                    [](const TermCandidate& c) { return c.label == PuLabel::kNegative; }));
  return s;
}

std::vector<Occurrence> extract_noun_candidates(const AnnotatedDocument& doc,
                                                std::uint32_t doc_index,
                                                const TemplateConfig& cfg) {
  std::vector<Occurrence> out;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& sentence = doc.sentences[s];
    std::size_t i = 0;
    while (i < sentence.size()) {
      if (!is_admissible(sentence[i], cfg)) {
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end < sentence.size() && is_admissible(sentence[end], cfg)) ++end;
      // [i, end) is a maximal admissible run.
      if (cfg.emit_subruns) {
        for (std::size_t b = i; b < end; ++b) {
          for (std::size_t e = b + 1; e <= end; ++e) {
            if (!is_noun(sentence[e - 1], cfg)) continue;
            if (!length_ok(e - b, cfg.noun_min_len, cfg.max_len)) continue;
            out.push_back({doc_index, static_cast<std::uint32_t>(s),
                           static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e - b)});
          }
        }
      } else {
        // Longest noun-final prefix of the run.
        std::size_t last = end;
        while (last > i && !is_noun(sentence[last - 1], cfg)) --last;
        if (last > i && length_ok(last - i, cfg.noun_min_len, cfg.max_len)) {
          out.push_back({doc_index, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(last - i)});
        }
      }
      i = end;
    }
  }
  return out;
}

std::vector<Occurrence> extract_attributive_candidates(const AnnotatedDocument& doc,
                                                       std::uint32_t doc_index,
                                                       const TemplateConfig& cfg) {
  std::vector<Occurrence> out;
  const std::size_t min_len = std::max<std::size_t>(cfg.attributive_min_len, 2);
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& sentence = doc.sentences[s];
    for (std::size_t b = 0; b < sentence.size(); ++b) {
      for (std::size_t len = min_len; len <= cfg.max_len && b + len <= sentence.size(); ++len) {
        if (is_attributive_span(sentence, b, b + len, cfg.attributive_relation)) {
          out.push_back({doc_index, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(b),
                         static_cast<std::uint32_t>(len)});
        }
      }
    }
  }
  return out;
}

std::vector<std::string> occurrence_words(const Corpus& corpus, const Occurrence& occ) {
  const Sentence& sentence = corpus.document(occ.doc).sentences.at(occ.sentence);
  std::vector<std::string> words;
  words.reserve(occ.length);
  for (std::uint32_t t = occ.begin; t < occ.begin + occ.length; ++t)
    words.push_back(sentence.at(t).surface);
  return words;
}

CandidateTable collect_candidates(const Corpus& corpus, const TemplateConfig& cfg) {
  const std::size_t n = corpus.size();
  const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(n, 1));
  std::vector<std::vector<Occurrence>> partial(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t d = w; d < n; d += workers)
          extract_document(corpus.document(d), static_cast<std::uint32_t>(d), cfg, partial[w]);
      });
    }
  }
  std::set<Occurrence> occurrences;
  for (auto& part : partial) occurrences.insert(part.begin(), part.end());

  struct Group {
    std::vector<std::string> words;
    std::vector<Occurrence> occurrences;
    std::set<std::size_t> docs;
  };
  std::map<std::string, Group> groups;
  for (const Occurrence& occ : occurrences) {
    std::vector<std::string> words = occurrence_words(corpus, occ);
    Group& g = groups[join(words)];
    if (g.words.empty() || words < g.words) g.words = std::move(words);
    g.occurrences.push_back(occ);
    g.docs.insert(occ.doc);
  }

  std::vector<TermCandidate> out;
  for (auto& [surface, g] : groups) {
    if (g.docs.size() < cfg.min_doc_count) continue;
    TermCandidate c;
    c.surface = surface;
    c.words = std::move(g.words);
    c.occurrences = std::move(g.occurrences);
    c.docs.assign(g.docs.begin(), g.docs.end());
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const TermCandidate& a, const TermCandidate& b) {
    if (a.term_freq() != b.term_freq()) return a.term_freq() > b.term_freq();
    return a.surface < b.surface;
  });
  return CandidateTable(std::move(out));
}

CandidateTable label_negatives(const CandidateTable& table,
                               const std::set<std::string>& stopwords) {
  if (stopwords.empty()) throw InvalidArgument("label_negatives: stop-word list is empty");
  std::vector<TermCandidate> out(table.candidates().begin(), table.candidates().end());
  for (TermCandidate& c : out) {
    const bool hit = std::any_of(c.words.begin(), c.words.end(),
                                 [&](const std::string& w) { return stopwords.count(w) != 0; });
    c.label = hit ? PuLabel::kNegative : PuLabel::kUnlabeled;
  }
  return CandidateTable(std::move(out));
}

std::set<std::string> read_stopwords(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string w = trim(line);
    if (!w.empty()) words.insert(std::move(w));
  }
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open stop-word file " + path.string());
  return read_stopwords(in);
}

void write_candidates(std::ostream& out, const CandidateTable& table, const Corpus& corpus) {
  for (const TermCandidate& c : table.candidates()) {
    json doc_ids = json::array();
    for (std::size_t d : c.docs) doc_ids.push_back(corpus.document(d).doc_id);
    json occs = json::array();
    for (const Occurrence& o : c.occurrences)
      occs.push_back(json::array({corpus.document(o.doc).doc_id, o.sentence, o.begin}));
    json obj = {{"surface", c.surface},
                {"words", c.words},
                {"term_freq", c.term_freq()},
                {"doc_count", c.doc_count()},
                {"pu_label", to_string(c.label)},
                {"doc_ids", std::move(doc_ids)},
                {"occurrences", std::move(occs)}};
    out << obj.dump() << '\n';
  }
}

CandidateTable read_candidates(std::istream& in, const Corpus& corpus) {
  std::vector<TermCandidate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      TermCandidate c;
      c.surface = obj.at("surface").get<std::string>();
      c.words = obj.at("words").get<std::vector<std::string>>();
      c.label = parse_pu_label(obj.at("pu_label").get<std::string>());
      const auto length = static_cast<std::uint32_t>(c.words.size());
      for (const json& o : obj.at("occurrences")) {
        const auto doc = corpus.find_document(o.at(0).get<std::string>());
        if (!doc) throw FormatError("unknown doc_id " + o.at(0).get<std::string>());
        c.occurrences.push_back({static_cast<std::uint32_t>(*doc), o.at(1).get<std::uint32_t>(),
                                 o.at(2).get<std::uint32_t>(), length});
      }
      std::set<std::size_t> docs;
      for (const json& id : obj.at("doc_ids")) {
        const auto doc = corpus.find_document(id.get<std::string>());
        if (!doc) throw FormatError("unknown doc_id " + id.get<std::string>());
        docs.insert(*doc);
      }
      std::sort(c.occurrences.begin(), c.occurrences.end());
      c.docs.assign(docs.begin(), docs.end());
      if (c.term_freq() != obj.at("term_freq").get<std::size_t>() ||
          c.doc_count() != obj.at("doc_count").get<std::size_t>())
        throw FormatError("term_freq/doc_count disagree with occurrences");
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw FormatError("candidates line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("candidates line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return CandidateTable(std::move(out));
}

}  // namespace taxoforge
