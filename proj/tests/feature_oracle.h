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

#ifndef TAXOFORGE_TESTS_FEATURE_ORACLE_H_
#define TAXOFORGE_TESTS_FEATURE_ORACLE_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "taxoforge/candidates.h"
#include "taxoforge/corpus.h"
#include "taxoforge/features.h"

namespace taxoforge::oracle {

// Every contiguous match of `words` in the corpus, as a candidate.
inline TermCandidate find_term(const Corpus& c, const std::vector<std::string>& words) {
  TermCandidate t;
  t.words = words;
  for (const auto& w : words) t.surface += w;
  for (std::size_t d = 0; d < c.size(); ++d) {
    const auto& sentences = c.document(d).sentences;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      for (std::size_t b = 0; b + words.size() <= sentences[s].size(); ++b) {
        bool match = true;
        for (std::size_t k = 0; k < words.size(); ++k)
          match = match && sentences[s][b + k].surface == words[k];
        if (!match) continue;
        t.occurrences.push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(s),
                                 static_cast<std::uint32_t>(b),
                                 static_cast<std::uint32_t>(words.size())});
        if (t.docs.empty() || t.docs.back() != d) t.docs.push_back(d);
      }
    }
  }
  return t;
}

// Independent recomputation of a feature row straight from the tokens.
inline std::vector<double> feature_row(const TermCandidate& t, const Corpus& c,
                                       const MarkerConfig& m) {
  const double n = static_cast<double>(c.size());
  auto doc_has = [&](std::size_t d, const std::string& w) {
    for (const Sentence& s : c.document(d).sentences)
      for (const Token& k : s)
        if (k.surface == w) return true;
    return false;
  };
  auto dct = [&](const std::string& w) {
    double k = 0;
    for (std::size_t d = 0; d < c.size(); ++d) k += doc_has(d, w);
    return k;
  };
  auto entropy = [](const std::map<std::string, double>& counts) {
    double total = 0, h = 0;
    for (const auto& [k, v] : counts) total += v;
    for (const auto& [k, v] : counts) h -= v / total * std::log(v / total);
    return h;
  };
  auto neighbour = [&](const Occurrence& o, bool left) -> std::string {
    const Sentence& s = c.document(o.doc).sentences[o.sentence];
    if (left) return o.begin == 0 ? std::string("<edge>") : s[o.begin - 1].surface;
    const std::size_t end = o.begin + o.length;
    return end == s.size() ? std::string("<edge>") : s[end].surface;
  };

  std::vector<double> row;
  double mi = 0;
  for (std::size_t k = 0; k + 1 < t.words.size(); ++k) {
    double both = 0;
    for (std::size_t d = 0; d < c.size(); ++d)
      both += doc_has(d, t.words[k]) && doc_has(d, t.words[k + 1]);
    if (both > 0)
      mi += both / n * std::log((both / n) / (dct(t.words[k]) / n * dct(t.words[k + 1]) / n));
  }
  std::map<std::string, double> left, right;
  bool followed = false, following = false;
  for (const Occurrence& o : t.occurrences) {
    const std::string l = neighbour(o, true), r = neighbour(o, false);
    ++left[l];
    ++right[r];
    followed = followed || m.followed_by.count(r);
    following = following || m.following.count(l);
  }
  row = {mi,
         entropy(right),
         entropy(left),
         std::log(1.0 + static_cast<double>(t.occurrences.size())),
         std::log(n / static_cast<double>(t.docs.size())),
         followed ? 1.0 : 0.0,
         following ? 1.0 : 0.0};
  const auto classes = c.class_index();
  std::vector<double> occ(classes.size(), 0), df(classes.size(), 0), nc(classes.size(), 0);
  for (std::size_t d = 0; d < c.size(); ++d)
    for (std::size_t k = 0; k < classes.size(); ++k) nc[k] += c.document(d).industry_class == classes[k];
  for (const Occurrence& o : t.occurrences)
    for (std::size_t k = 0; k < classes.size(); ++k)
      occ[k] += c.document(o.doc).industry_class == classes[k];
  for (std::size_t d : t.docs)
    for (std::size_t k = 0; k < classes.size(); ++k) df[k] += c.document(d).industry_class == classes[k];
  for (double v : occ) row.push_back(std::log(1.0 + v));
  for (std::size_t k = 0; k < classes.size(); ++k)
    row.push_back(df[k] > 0 ? std::log(nc[k] / df[k]) : 0.0);
  const double total = std::accumulate(occ.begin(), occ.end(), 0.0);
  double ind = 0;
  for (double v : occ)
    if (v > 0) ind -= v / total * std::log(v / total);
  row.push_back(ind);
  for (const std::string& w : {t.words.front(), t.words.back()}) {
    double tokens = 0;
    std::map<std::string, double> wl, wr;
    for (const AnnotatedDocument& d : c.documents())
      for (const Sentence& s : d.sentences)
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (s[i].surface != w) continue;
          ++tokens;
          ++wl[i == 0 ? std::string("<edge>") : s[i - 1].surface];
          ++wr[i + 1 == s.size() ? std::string("<edge>") : s[i + 1].surface];
        }
    row.push_back(std::log(1.0 + tokens));
    row.push_back(std::log(n / dct(w)));
    row.push_back(entropy(wl));
    row.push_back(entropy(wr));
  }
  return row;
}

}  // namespace taxoforge::oracle

#endif  // TAXOFORGE_TESTS_FEATURE_ORACLE_H_
