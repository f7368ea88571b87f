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

#ifndef TAXOFORGE_PIPELINE_MANIFEST_H_
#define TAXOFORGE_PIPELINE_MANIFEST_H_

// Content-addressed stage cache.
//
// manifest.json in the work directory holds, per stage, the hash of the
// stage's configuration section, the hashes of its input files and of the
// outputs it wrote. A stage is a cache hit when all three still match.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace taxoforge::pipeline {

std::string sha256_hex(std::string_view bytes);
// Throws std::runtime_error when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

struct StageRecord {
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256

  // sha256 over the config hash and the sorted input hashes.
  std::string key() const;
  bool operator==(const StageRecord&) const = default;
};

class Manifest {
 public:
  Manifest() = default;
  // A missing file yields an empty manifest; a corrupt one is discarded.
  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const StageRecord* find(std::string_view stage) const;
  void put(const std::string& stage, StageRecord record);
  void erase(std::string_view stage);

  // The recorded entry matches `expected` and every recorded output still
  // hashes to its recorded value.
  bool is_fresh(std::string_view stage, const StageRecord& expected) const;

 private:
  std::map<std::string, StageRecord, std::less<>> stages_;
};

}  // namespace taxoforge::pipeline

#endif  // TAXOFORGE_PIPELINE_MANIFEST_H_
