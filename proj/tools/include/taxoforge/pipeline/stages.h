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

#ifndef TAXOFORGE_PIPELINE_STAGES_H_
#define TAXOFORGE_PIPELINE_STAGES_H_

// Pipeline stages and their artifacts.
//
//   extract     corpus, stopwords            -> candidates.jsonl
//   featurize   corpus, candidates           -> features.csv, scaler.json
//   train       corpus, candidates, features -> model.json
//   filter      corpus, candidates, features, model -> terms.jsonl
//   similarity  corpus, terms                -> similarity.bin, similarity.json
//                                               (+ similarity.csv for small n)
//   cluster     similarity                   -> hierarchy.json
//   map         corpus, candidates, hierarchy -> companies.json
//   export      similarity, hierarchy, companies -> taxonomy.json,
//                                               taxonomy.dot, hypernym_stats.csv

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/error.h"
#include "taxoforge/pipeline/config.h"

namespace taxoforge::pipeline {

enum class Stage { kExtract, kFeaturize, kTrain, kFilter, kSimilarity, kCluster, kMap, kExport };

std::span<const Stage> all_stages();
std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

inline constexpr std::size_t kSimilarityCsvMaxTerms = 500;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitMissingArtifact = 2,
  kExitConfig = 3,
  kExitNumerical = 4,
};

class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(std::filesystem::path path)
      : Error("missing input: " + path.string()), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Maps an exception escaping a stage to the documented exit code.
int exit_code_for(const std::exception& e);

struct StageReport {
  Stage stage = Stage::kExtract;
  bool cached = false;
  std::vector<std::filesystem::path> outputs;
  std::string summary;
};

// Runs one stage, or reports a cache hit when the manifest says its
// inputs, configuration and outputs are unchanged. Writes one line to
// `log`.
StageReport run_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log);
std::vector<StageReport> run_all(const PipelineConfig& cfg, std::ostream& log);

}  // namespace taxoforge::pipeline

#endif  // TAXOFORGE_PIPELINE_STAGES_H_
