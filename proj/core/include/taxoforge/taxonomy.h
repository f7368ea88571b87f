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

#ifndef TAXOFORGE_TAXONOMY_H_
#define TAXOFORGE_TAXONOMY_H_

// Company mapping, per-hypernym statistics and taxonomy export.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/candidates.h"
#include "taxoforge/corpus.h"
#include "taxoforge/ghap.h"
#include "taxoforge/matrix.h"

namespace taxoforge {

struct CompanyMapping {
  std::map<std::string, std::set<std::string>> by_term;
  std::map<std::string, std::set<std::string>> by_company;

  // by_term and by_company are exact inverses.
  bool consistent() const;
  bool operator==(const CompanyMapping&) const = default;
};

// A company maps to a leaf when one of its documents is in the leaf's
// extraction provenance. Throws InvalidArgument naming a leaf that is not
// in the table.
CompanyMapping map_companies(const Taxonomy& taxonomy, const CandidateTable& table,
                             const Corpus& corpus);

// Mean similarity over unordered member pairs; 1 for a singleton.
// Throws InvalidArgument for an empty cluster.
double intra_class_similarity(std::span<const std::size_t> members, const Matrix& similarity);

// Term indices of the level-0 descendants of `node` at `level`.
std::vector<std::size_t> descendant_leaves(const Taxonomy& taxonomy, std::size_t level,
                                           std::size_t node);

struct HypernymStats {
  std::string hypernym;
  std::size_t term = 0;
  double intra_class_similarity = 0.0;
  std::size_t n_subconcepts = 0;
  std::size_t n_subsubconcepts = 0;
  std::size_t n_companies = 0;
};

// One row per top-level exemplar, cohesion measured over its descendant
// leaves. Sorted by descending intra-class similarity, then term index.
std::vector<HypernymStats> hypernym_statistics(const Taxonomy& taxonomy,
                                               const CompanyMapping& mapping,
                                               const Matrix& similarity);

enum class ExportFormat { kJson, kDot, kCsv };

// "json", "dot" or "csv"; throws InvalidArgument otherwise.
ExportFormat parse_export_format(std::string_view name);
std::string_view extension(ExportFormat format);

// json: nested tree with companies on each leaf plus a flat edge list.
// dot: one rank per level, edges from parent to child.
// csv: the hypernym statistics table.
void export_taxonomy(std::ostream& out, const Taxonomy& taxonomy, const CompanyMapping& mapping,
                     std::span<const HypernymStats> stats, ExportFormat format);

struct TaxonomyDocument {
  Taxonomy taxonomy;
  CompanyMapping mapping;
};

// Inverse of the json export. Throws FormatError.
TaxonomyDocument read_taxonomy_json(std::istream& in);

void write_mapping_json(std::ostream& out, const CompanyMapping& mapping);
// Throws FormatError when the two directions disagree.
CompanyMapping read_mapping_json(std::istream& in);

}  // namespace taxoforge

#endif  // TAXOFORGE_TAXONOMY_H_
