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

#include "taxoforge/taxonomy.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "taxoforge/error.h"

namespace taxoforge {
namespace {

using nlohmann::ordered_json;

constexpr std::string_view kTaxonomyFormat = "taxoforge.taxonomy.v1";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string dot_quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  return q + '"';
}

std::set<std::string> companies_of(const CompanyMapping& mapping, const std::string& term) {
  const auto it = mapping.by_term.find(term);
  return it == mapping.by_term.end() ? std::set<std::string>{} : it->second;
}

ordered_json tree_node(const Taxonomy& tax, const CompanyMapping& mapping, std::size_t level,
                       std::size_t node) {
  ordered_json j;
  if (level == 0) {
    j["term"] = tax.terms[node];
    j["companies"] = companies_of(mapping, tax.terms[node]);
    return j;
  }
  j["exemplar"] = tax.terms[node];
  ordered_json kids = ordered_json::array();
  for (std::size_t c : tax.children(level - 1, node))
    kids.push_back(tree_node(tax, mapping, level - 1, c));
  j["children"] = std::move(kids);
  return j;
}

void export_json(std::ostream& out, const Taxonomy& tax, const CompanyMapping& mapping,
                 std::span<const HypernymStats> stats) {
  const std::size_t top = tax.num_levels() - 1;
  ordered_json j;
  j["format"] = std::string(kTaxonomyFormat);
  j["levels"] = tax.num_levels();
  j["terms"] = tax.terms;
  ordered_json roots = ordered_json::array();
  for (std::size_t r : tax.roots()) {
    ordered_json node = tree_node(tax, mapping, top, r);
    if (top == 0) {
      roots.push_back(std::move(node));
      continue;
    }
    ordered_json h;
    h["exemplar"] = node["exemplar"];
    const auto it = std::find_if(stats.begin(), stats.end(),
                                 [r](const HypernymStats& s) { return s.term == r; });
    if (it != stats.end()) {
      h["intra_class_similarity"] = it->intra_class_similarity;
      h["n_subconcepts"] = it->n_subconcepts;
      h["n_subsubconcepts"] = it->n_subsubconcepts;
      h["n_companies"] = it->n_companies;
    }
    h["children"] = std::move(node["children"]);
    roots.push_back(std::move(h));
  }
  j["hypernyms"] = std::move(roots);
  ordered_json edges = ordered_json::array();
  for (std::size_t k = 0; k < tax.parents.size(); ++k) {
    for (std::size_t i = 0; i < tax.levels[k].size(); ++i) {
      ordered_json e;
      e["child"] = tax.terms[tax.levels[k][i]];
      e["parent"] = tax.terms[tax.parents[k][i]];
      e["level"] = k;
      edges.push_back(std::move(e));
    }
  }
  j["edges"] = std::move(edges);
  out << j.dump(2) << '\n';
}

void export_dot(std::ostream& out, const Taxonomy& tax) {
  // Node ids are L<level>_<position within level>.
  out << "digraph taxonomy {\n  rankdir=TB;\n  node [shape=box];\n";
  for (std::size_t k = tax.num_levels(); k-- > 0;) {
    out << "  { rank=same;";
    for (std::size_t i = 0; i < tax.levels[k].size(); ++i)
      out << " L" << k << '_' << i << " [label=" << dot_quote(tax.terms[tax.levels[k][i]]) << "];";
    out << " }\n";
  }
  for (std::size_t k = tax.parents.size(); k-- > 0;) {
    const auto& above = tax.levels[k + 1];
    for (std::size_t i = 0; i < tax.levels[k].size(); ++i) {
      const std::size_t p = static_cast<std::size_t>(
          std::lower_bound(above.begin(), above.end(), tax.parents[k][i]) - above.begin());
      out << "  L" << k + 1 << '_' << p << " -> L" << k << '_' << i << ";\n";
    }
  }
  out << "}\n";
}

void export_csv(std::ostream& out, std::span<const HypernymStats> stats) {
  out << "hypernym,intra_class_similarity,n_subconcepts,n_subsubconcepts,n_companies\n";
  char buf[32];
  for (const HypernymStats& s : stats) {
    std::snprintf(buf, sizeof buf, "%.10g", s.intra_class_similarity);
    out << csv_field(s.hypernym) << ',' << buf << ',' << s.n_subconcepts << ','
        << s.n_subsubconcepts << ',' << s.n_companies << '\n';
  }
}

}  // namespace

bool CompanyMapping::consistent() const {
  std::size_t forward = 0;
  for (const auto& [term, companies] : by_term) {
    for (const std::string& c : companies) {
      const auto it = by_company.find(c);
      if (it == by_company.end() || !it->second.contains(term)) return false;
      ++forward;
    }
  }
  std::size_t backward = 0;
  for (const auto& [company, terms] : by_company) backward += terms.size();
  return forward == backward;
}

CompanyMapping map_companies(const Taxonomy& taxonomy, const CandidateTable& table,
                             const Corpus& corpus) {
  CompanyMapping m;
  for (std::size_t t : taxonomy.levels.front()) {
    const std::string& term = taxonomy.terms[t];
    const TermCandidate* c = table.find(term);
    if (c == nullptr)
      throw InvalidArgument("map_companies: leaf '" + term + "' is not in the candidate table");
    for (std::size_t d : c->docs) {
      if (d >= corpus.size())
        throw InvalidArgument("map_companies: leaf '" + term + "' cites a missing document");
      const std::string& company = corpus.document(d).company_id;
      m.by_term[term].insert(company);
      m.by_company[company].insert(term);
    }
  }
  return m;
}

double intra_class_similarity(std::span<const std::size_t> members, const Matrix& similarity) {
  if (members.empty()) throw InvalidArgument("intra_class_similarity: empty cluster");
  if (members.size() == 1) return 1.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      sum += (similarity(members[a], members[b]) + similarity(members[b], members[a])) / 2.0;
  const double pairs = static_cast<double>(members.size() * (members.size() - 1) / 2);
  return sum / pairs;
}

std::vector<std::size_t> descendant_leaves(const Taxonomy& taxonomy, std::size_t level,
                                           std::size_t node) {
  std::vector<std::size_t> frontier{node};
  for (std::size_t k = level; k-- > 0;) {
    std::vector<std::size_t> next;
    for (std::size_t p : frontier) {
      const auto kids = taxonomy.children(k, p);
      next.insert(next.end(), kids.begin(), kids.end());
    }
    frontier = std::move(next);
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

std::vector<HypernymStats> hypernym_statistics(const Taxonomy& taxonomy,
                                               const CompanyMapping& mapping,
                                               const Matrix& similarity) {
  const std::size_t top = taxonomy.num_levels() - 1;
  std::vector<HypernymStats> out;
  for (std::size_t r : taxonomy.roots()) {
    HypernymStats s;
    s.hypernym = taxonomy.terms[r];
    s.term = r;
    if (top >= 1) {
      const auto subs = taxonomy.children(top - 1, r);
      s.n_subconcepts = subs.size();
      if (top >= 2)
        for (std::size_t c : subs) s.n_subsubconcepts += taxonomy.children(top - 2, c).size();
    }
    const auto leaves = descendant_leaves(taxonomy, top, r);
    s.intra_class_similarity = intra_class_similarity(leaves, similarity);
    std::set<std::string> companies;
    for (std::size_t t : leaves) {
      const auto it = mapping.by_term.find(taxonomy.terms[t]);
      if (it != mapping.by_term.end()) companies.insert(it->second.begin(), it->second.end());
    }
    s.n_companies = companies.size();
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const HypernymStats& a, const HypernymStats& b) {
    if (a.intra_class_similarity != b.intra_class_similarity)
      return a.intra_class_similarity > b.intra_class_similarity;
    return a.term < b.term;
  });
  return out;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "json") return ExportFormat::kJson;
  if (name == "dot") return ExportFormat::kDot;
  if (name == "csv") return ExportFormat::kCsv;
  throw InvalidArgument("unknown export format '" + std::string(name) + "'");
}

std::string_view extension(ExportFormat format) {
  switch (format) {
    case ExportFormat::kJson: return "json";
    case ExportFormat::kDot: return "dot";
    case ExportFormat::kCsv: return "csv";
  }
  return "";
}

void export_taxonomy(std::ostream& out, const Taxonomy& taxonomy, const CompanyMapping& mapping,
                     std::span<const HypernymStats> stats, ExportFormat format) {
  switch (format) {
    case ExportFormat::kJson: export_json(out, taxonomy, mapping, stats); break;
    case ExportFormat::kDot: export_dot(out, taxonomy); break;
    case ExportFormat::kCsv: export_csv(out, stats); break;
  }
  if (!out) throw FormatError("export_taxonomy: write failed");
}

TaxonomyDocument read_taxonomy_json(std::istream& in) {
  TaxonomyDocument doc;
  Taxonomy& tax = doc.taxonomy;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != kTaxonomyFormat)
      throw FormatError("taxonomy: unsupported format");
    const auto levels = j.at("levels").get<std::size_t>();
    if (levels == 0) throw FormatError("taxonomy: no levels");
    tax.terms = j.at("terms").get<std::vector<std::string>>();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tax.terms.size(); ++i)
      if (!index.emplace(tax.terms[i], i).second)
        throw FormatError("taxonomy: duplicate term '" + tax.terms[i] + "'");
    auto lookup = [&](const nlohmann::json& v) {
      const auto it = index.find(v.get<std::string>());
      if (it == index.end()) throw FormatError("taxonomy: unknown term " + v.dump());
      return it->second;
    };
    tax.levels.assign(levels, {});
    tax.parents.assign(levels - 1, {});
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(levels - 1);
    for (const auto& e : j.at("edges")) {
      const auto k = e.at("level").get<std::size_t>();
      if (k + 1 >= levels) throw FormatError("taxonomy: edge level out of range");
      edges[k].emplace_back(lookup(e.at("child")), lookup(e.at("parent")));
    }
    for (std::size_t k = 0; k + 1 < levels; ++k) {
      std::sort(edges[k].begin(), edges[k].end());
      for (const auto& [child, parent] : edges[k]) {
        tax.levels[k].push_back(child);
        tax.parents[k].push_back(parent);
      }
    }
    std::vector<std::size_t> roots;
    for (const auto& h : j.at("hypernyms"))
      roots.push_back(lookup(levels == 1 ? h.at("term") : h.at("exemplar")));
    std::sort(roots.begin(), roots.end());
    tax.levels.back() = std::move(roots);

    std::function<void(const nlohmann::json&, std::size_t)> walk =
        [&](const nlohmann::json& node, std::size_t level) {
          if (level == 0) {
            const std::string term = node.at("term").get<std::string>();
            lookup(node.at("term"));
            for (const auto& c : node.at("companies")) {
              const std::string company = c.get<std::string>();
              doc.mapping.by_term[term].insert(company);
              doc.mapping.by_company[company].insert(term);
            }
            return;
          }
          for (const auto& child : node.at("children")) walk(child, level - 1);
        };
    for (const auto& h : j.at("hypernyms")) walk(h, levels - 1);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("taxonomy: ") + e.what());
  }
  try {
    validate_taxonomy(tax);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return doc;
}

void write_mapping_json(std::ostream& out, const CompanyMapping& mapping) {
  ordered_json j;
  j["by_term"] = ordered_json::object();
  for (const auto& [t, cs] : mapping.by_term) j["by_term"][t] = cs;
  j["by_company"] = ordered_json::object();
  for (const auto& [c, ts] : mapping.by_company) j["by_company"][c] = ts;
  out << j.dump(2) << '\n';
}

CompanyMapping read_mapping_json(std::istream& in) {
  CompanyMapping m;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    for (const auto& [t, cs] : j.at("by_term").items())
      m.by_term[t] = cs.get<std::set<std::string>>();
    for (const auto& [c, ts] : j.at("by_company").items())
      m.by_company[c] = ts.get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("company mapping: ") + e.what());
  }
  if (!m.consistent()) throw FormatError("company mapping: directions disagree");
  return m;
}

}  // namespace taxoforge
