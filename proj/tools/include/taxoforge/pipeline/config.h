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

#ifndef TAXOFORGE_PIPELINE_CONFIG_H_
#define TAXOFORGE_PIPELINE_CONFIG_H_

// Pipeline configuration: one JSON document plus dotted `key=value`
// overrides. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taxoforge/candidates.h"
#include "taxoforge/error.h"
#include "taxoforge/features.h"
#include "taxoforge/ghap.h"
#include "taxoforge/pipeline/generator.h"
#include "taxoforge/pu_classifier.h"
#include "taxoforge/similarity.h"
#include "taxoforge/taxonomy.h"

namespace taxoforge::pipeline {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Paths {
  std::filesystem::path corpus;
  std::filesystem::path stopwords;
  std::filesystem::path workdir;
};

struct PipelineConfig {
  Paths paths;
  TemplateConfig templates;
  FeatureConfig features;
  PUConfig pu;
  SimilarityConfig similarity;
  GhapConfig ghap;
  std::vector<ExportFormat> export_formats;
  std::uint64_t seed = 7;
  GeneratorSpec generator;
  std::size_t threads = 1;

  // Fully populated document (defaults merged with the user's values)
  // from which the typed fields were parsed. Stage cache keys hash its
  // sections.
  nlohmann::ordered_json document;
};

// Every key with its default value.
nlohmann::ordered_json default_config_document();

// "a.b.c=value". The value is parsed as JSON when possible, otherwise
// taken as a string. Throws ConfigError.
void apply_override(nlohmann::ordered_json& doc, std::string_view assignment);

// Merges `user` over the defaults, validates, and resolves relative paths
// against `base_dir`. Throws ConfigError.
PipelineConfig parse_config(const nlohmann::ordered_json& user,
                            const std::filesystem::path& base_dir);

// Reads `path`, applies overrides, then the TAXOFORGE_WORKDIR environment
// variable. Throws ConfigError (including for an unreadable file).
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides);

// Applies a thread cap to every module configuration.
void set_threads(PipelineConfig& cfg, std::size_t threads);

}  // namespace taxoforge::pipeline

#endif  // TAXOFORGE_PIPELINE_CONFIG_H_
