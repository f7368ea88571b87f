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

#include "taxoforge/features.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

using nlohmann::json;

// Empty string never occurs as a surface, so it stands for the sentence edge.
constexpr std::string_view kBoundary = "";

template <typename Map>
double entropy_of(const Map& counts) {
  double total = 0.0;
  for (const auto& [_, c] : counts) total += static_cast<double>(c);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  // -p log p sums can round to -0.0 or a hair below zero for one outcome.
  return h > 0.0 ? h : 0.0;
}

std::string_view neighbor(const Sentence& sentence, std::size_t begin, std::size_t length,
                          Side side) {
  if (side == Side::kLeft) return begin == 0 ? kBoundary : sentence[begin - 1].surface;
  const std::size_t after = begin + length;
  return after >= sentence.size() ? kBoundary : std::string_view(sentence[after].surface);
}

const Sentence& sentence_of(const Corpus& corpus, const Occurrence& occ) {
  return corpus.document(occ.doc).sentences.at(occ.sentence);
}

void write_csv_field(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> TermFeatureVector::flatten() const {
  std::vector<double> row{mi, re, le, tf, idf, followed_by, following};
  row.insert(row.end(), ind_tf.begin(), ind_tf.end());
  row.insert(row.end(), ind_idf.begin(), ind_idf.end());
  row.push_back(ind_entropy);
  for (const WordFeatures* w : {&first_word, &last_word}) {
    row.push_back(w->tf);
    row.push_back(w->idf);
    row.push_back(w->left_entropy);
    row.push_back(w->right_entropy);
  }
  return row;
}

double concept_mutual_information(const TermCandidate& term, const WordIndex& index) {
  const double n = static_cast<double>(index.num_documents());
  for (const std::string& w : term.words) {
    if (index.document_count(w) == 0)
      throw UnknownWordError("mutual information: word '" + w + "' occurs in no document");
  }
  double mi = 0.0;
  for (std::size_t k = 0; k + 1 < term.words.size(); ++k) {
    const std::string& a = term.words[k];
    const std::string& b = term.words[k + 1];
    const double co = static_cast<double>(index.cooccurrence_count(a, b));
    if (co == 0.0) continue;
    const double pij = co / n;
    const double pi = static_cast<double>(index.document_count(a)) / n;
    const double pj = static_cast<double>(index.document_count(b)) / n;
    mi += pij * std::log(pij / (pi * pj));
  }
  return mi;
}

double boundary_entropy(const TermCandidate& term, const Corpus& corpus, Side side) {
  std::map<std::string_view, std::size_t> counts;
  for (const Occurrence& occ : term.occurrences)
    ++counts[neighbor(sentence_of(corpus, occ), occ.begin, occ.length, side)];
  return entropy_of(counts);
}

TfIdf concept_tf_idf(const TermCandidate& term, const Corpus& corpus) {
  if (term.docs.empty()) throw InvalidArgument("concept_tf_idf: term has no documents");
  return {std::log1p(static_cast<double>(term.term_freq())),
          std::log(static_cast<double>(corpus.size()) / static_cast<double>(term.doc_count()))};
}

MarkerFlags marker_features(const TermCandidate& term, const Corpus& corpus,
                            const MarkerConfig& markers) {
  MarkerFlags flags;
  for (const Occurrence& occ : term.occurrences) {
    const Sentence& s = sentence_of(corpus, occ);
    const std::string_view right = neighbor(s, occ.begin, occ.length, Side::kRight);
    const std::string_view left = neighbor(s, occ.begin, occ.length, Side::kLeft);
    if (!right.empty() && markers.followed_by.count(std::string(right))) flags.followed_by = true;
    if (!left.empty() && markers.following.count(std::string(left))) flags.following = true;
    if (flags.followed_by && flags.following) break;
  }
  return flags;
}

IndustryFeatures industry_features(const TermCandidate& term, const Corpus& corpus) {
  const std::size_t k = corpus.class_index().size();
  if (k == 0) throw InvalidArgument("industry_features: corpus has no industry classes");
  std::vector<std::size_t> occ_per_class(k, 0);
  std::vector<std::size_t> docs_per_class(k, 0);
  for (const Occurrence& occ : term.occurrences) ++occ_per_class[corpus.class_of(occ.doc)];
  for (std::size_t d : term.docs) ++docs_per_class[corpus.class_of(d)];

  IndustryFeatures out;
  out.tf.resize(k);
  out.idf.resize(k);
  const auto class_docs = corpus.class_document_counts();
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    out.tf[c] = std::log1p(static_cast<double>(occ_per_class[c]));
    out.idf[c] = occ_per_class[c] == 0
                     ? 0.0
                     : std::log(static_cast<double>(class_docs[c]) /
                                static_cast<double>(std::max<std::size_t>(1, docs_per_class[c])));
    total += static_cast<double>(occ_per_class[c]);
  }
  std::map<std::size_t, std::size_t> dist;
  for (std::size_t c = 0; c < k; ++c)
    if (occ_per_class[c] > 0) dist[c] = occ_per_class[c];
  out.entropy = total > 0.0 ? entropy_of(dist) : 0.0;
  return out;
}

WordContext::WordContext(const Corpus& corpus, const std::set<std::string>& vocabulary) {
  for (const std::string& w : vocabulary) words_.emplace(w, Counts{});
  for (const AnnotatedDocument& doc : corpus.documents()) {
    for (const Sentence& s : doc.sentences) {
      for (std::size_t t = 0; t < s.size(); ++t) {
        auto it = words_.find(s[t].surface);
        if (it == words_.end()) continue;
        ++it->second.left[std::string(neighbor(s, t, 1, Side::kLeft))];
        ++it->second.right[std::string(neighbor(s, t, 1, Side::kRight))];
      }
    }
  }
}

double WordContext::entropy(std::string_view word, Side side) const {
  auto it = words_.find(word);
  if (it == words_.end()) return 0.0;
  return entropy_of(side == Side::kLeft ? it->second.left : it->second.right);
}

WordFeatures word_features(std::string_view word, const WordIndex& index,
                           const WordContext& context) {
  const std::size_t dct = index.document_count(word);
  if (dct == 0) throw UnknownWordError("word '" + std::string(word) + "' occurs in no document");
  WordFeatures f;
  f.tf = std::log1p(static_cast<double>(index.token_count(word)));
  f.idf = std::log(static_cast<double>(index.num_documents()) / static_cast<double>(dct));
  f.left_entropy = context.entropy(word, Side::kLeft);
  f.right_entropy = context.entropy(word, Side::kRight);
  return f;
}

TermFeatureVector compute_features(const TermCandidate& term, const Corpus& corpus,
                                   const WordIndex& index, const WordContext& context,
                                   const MarkerConfig& markers) {
  if (term.words.empty()) throw InvalidArgument("compute_features: term has no words");
  TermFeatureVector v;
  v.mi = concept_mutual_information(term, index);
  v.re = boundary_entropy(term, corpus, Side::kRight);
  v.le = boundary_entropy(term, corpus, Side::kLeft);
  const TfIdf ti = concept_tf_idf(term, corpus);
  v.tf = ti.tf;
  v.idf = ti.idf;
  const MarkerFlags m = marker_features(term, corpus, markers);
  v.followed_by = m.followed_by ? 1.0 : 0.0;
  v.following = m.following ? 1.0 : 0.0;
  IndustryFeatures ind = industry_features(term, corpus);
  v.ind_tf = std::move(ind.tf);
  v.ind_idf = std::move(ind.idf);
  v.ind_entropy = ind.entropy;
  v.first_word = word_features(term.words.front(), index, context);
  v.last_word = word_features(term.words.back(), index, context);
  return v;
}

std::vector<std::string> feature_columns(std::span<const std::string> class_index) {
  std::vector<std::string> cols{"mi", "re", "le", "tf", "idf", "followed_by", "following"};
  for (const std::string& c : class_index) cols.push_back("ind_tf[" + c + "]");
  for (const std::string& c : class_index) cols.push_back("ind_idf[" + c + "]");
  cols.push_back("ind_entropy");
  for (const char* w : {"first", "last"}) {
    for (const char* f : {"tf", "idf", "le", "re"}) cols.push_back(std::string(w) + "_" + f);
  }
  return cols;
}

Scaler Scaler::fit(const Matrix& rows) {
  Scaler s;
  s.mean.assign(rows.cols(), 0.0);
  s.stddev.assign(rows.cols(), 0.0);
  if (rows.rows() == 0) return s;
  const double n = static_cast<double>(rows.rows());
  for (std::size_t j = 0; j < rows.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) sum += rows(i, j);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) ss += (rows(i, j) - mean) * (rows(i, j) - mean);
    s.mean[j] = mean;
    s.stddev[j] = std::sqrt(ss / n);
  }
  return s;
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
  std::vector<double> out(row.size(), 0.0);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (stddev[j] > 1e-12 * std::max(1.0, std::abs(mean[j])))
      out[j] = (row[j] - mean[j]) / stddev[j];
  }
  return out;
}

Matrix Scaler::apply(const Matrix& rows) const {
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const std::vector<double> r = apply(rows.row(i));
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

FeatureMatrix featurize(const CandidateTable& table, const Corpus& corpus,
                        const FeatureConfig& cfg) {
  if (table.empty()) throw InvalidArgument("featurize: candidate table is empty");
  std::set<std::string> vocab;
  std::set<std::string> edge_words;
  for (const TermCandidate& c : table.candidates()) {
    vocab.insert(c.words.begin(), c.words.end());
    edge_words.insert(c.words.front());
    edge_words.insert(c.words.back());
  }
  const WordIndex index(corpus, vocab);
  const WordContext context(corpus, edge_words);

  FeatureMatrix fm;
  fm.columns = feature_columns(corpus.class_index());
  fm.raw = Matrix(table.size(), fm.columns.size());
  const std::size_t n = table.size();
  const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          const std::vector<double> row =
              compute_features(table[i], corpus, index, context, cfg.markers).flatten();
          std::copy(row.begin(), row.end(), fm.raw.row(i).begin());
        }
      });
    }
  }
  for (const TermCandidate& c : table.candidates()) fm.surfaces.push_back(c.surface);
  fm.scaler = Scaler::fit(fm.raw);
  fm.standardized = fm.scaler.apply(fm.raw);
  for (std::size_t j = 0; j < fm.columns.size(); ++j) {
    if (!(fm.scaler.stddev[j] > 1e-12 * std::max(1.0, std::abs(fm.scaler.mean[j]))))
      fm.warnings.push_back("column " + fm.columns[j] + " has zero variance; standardized to 0");
  }
  return fm;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& features) {
  out << "#layout=" << features.layout_version << '\n';
  out << "surface";
  for (const std::string& c : features.columns) {
    out << ',';
    write_csv_field(out, c);
  }
  out << '\n';
  for (std::size_t i = 0; i < features.raw.rows(); ++i) {
    write_csv_field(out, features.surfaces.at(i));
    for (double v : features.raw.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  FeatureMatrix fm;
  std::string line;
  if (!std::getline(in, line) || line.rfind("#layout=", 0) != 0)
    throw FormatError("feature csv: missing #layout header");
  fm.layout_version = line.substr(8);
  if (!line.empty() && fm.layout_version.back() == '\r') fm.layout_version.pop_back();
  if (fm.layout_version != kFeatureLayoutVersion)
    throw FormatError("feature csv: unsupported layout " + fm.layout_version);
  if (!std::getline(in, line)) throw FormatError("feature csv: missing column header");
  std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "surface")
    throw FormatError("feature csv: first column must be surface");
  fm.columns.assign(header.begin() + 1, header.end());
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw FormatError("feature csv: row width " + std::to_string(fields.size()) +
                        " != " + std::to_string(header.size()));
    fm.surfaces.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        values.push_back(std::stod(fields[j]));
      } catch (const std::exception&) {
        throw FormatError("feature csv: bad number '" + fields[j] + "'");
      }
    }
  }
  fm.raw = Matrix(fm.surfaces.size(), fm.columns.size());
  std::copy(values.begin(), values.end(), fm.raw.data().begin());
  return fm;
}

void write_scaler_json(std::ostream& out, const Scaler& scaler,
                       std::span<const std::string> columns) {
  json obj = {{"layout_version", kFeatureLayoutVersion},
              {"columns", std::vector<std::string>(columns.begin(), columns.end())},
              {"mean", scaler.mean},
              {"stddev", scaler.stddev}};
  out << obj.dump(2) << '\n';
}

Scaler read_scaler_json(std::istream& in) {
  try {
    const json obj = json::parse(in);
    Scaler s;
    s.mean = obj.at("mean").get<std::vector<double>>();
    s.stddev = obj.at("stddev").get<std::vector<double>>();
    if (s.mean.size() != s.stddev.size()) throw FormatError("scaler: mean/stddev size mismatch");
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scaler json: ") + e.what());
  }
}

}  // namespace taxoforge
