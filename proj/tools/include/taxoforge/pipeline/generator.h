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

#ifndef TAXOFORGE_PIPELINE_GENERATOR_H_
#define TAXOFORGE_PIPELINE_GENERATOR_H_

// Synthetic annotated corpus with planted industry blocks.
//
// Each class owns two term families; a family is one head noun with a set
// of modifiers, and its terms are "modifier head". Documents of a class
// use only that class's terms plus a shared generic vocabulary, mostly
// from one family. Generic words form the stop list, so every candidate
// that contains one is a labeled negative.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "taxoforge/corpus.h"

namespace taxoforge::pipeline {

struct GeneratorSpec {
  std::size_t classes = 3;
  std::size_t docs_per_class = 20;
  std::size_t companies_per_class = 10;
  std::size_t sentences_per_doc = 6;
  // Fraction of a class's documents that mention only their own family.
  // The rest are bridge documents: one sentence pairs a term of the main
  // family with a term of the next family of the same class.
  double family_focus = 0.8;
  // Probability that a sentence draws from a different class entirely.
  double cross_class_rate = 0.0;
  int first_year = 2016;
};

struct TermFamily {
  std::string head;
  std::vector<std::string> modifiers;
};

struct PlantedClass {
  std::string name;
  std::vector<TermFamily> families;
};

// Vocabulary blocks for `classes` classes. The first few use fixed
// Chinese vocabularies; later ones get generated surfaces.
std::vector<PlantedClass> planted_classes(std::size_t classes);

struct SyntheticCorpus {
  Corpus corpus;
  std::set<std::string> stopwords;
  std::vector<PlantedClass> classes;
};

// Throws InvalidArgument on a degenerate spec. Deterministic in `seed`.
SyntheticCorpus generate_synthetic_corpus(const GeneratorSpec& spec, std::uint64_t seed);

void write_stopwords(std::ostream& out, const std::set<std::string>& stopwords);

}  // namespace taxoforge::pipeline

#endif  // TAXOFORGE_PIPELINE_GENERATOR_H_
