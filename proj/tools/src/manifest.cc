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

#include "taxoforge/pipeline/manifest.h"

#include <array>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace taxoforge::pipeline {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: digest initialization failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1)
      throw std::runtime_error("sha256: finalization failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xf];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string StageRecord::key() const {
  std::string material = config_hash;
  for (const auto& [path, hash] : inputs) material += "\n" + hash;
  return sha256_hex(material);
}

Manifest Manifest::load(const std::filesystem::path& path) {
  Manifest m;
  std::ifstream in(path);
  if (!in) return m;
  const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("stages") || !j["stages"].is_object()) return m;
  try {
    for (const auto& [stage, rec] : j["stages"].items()) {
      StageRecord r;
      r.config_hash = rec.at("config_hash").get<std::string>();
      r.inputs = rec.at("inputs").get<std::map<std::string, std::string>>();
      r.outputs = rec.at("outputs").get<std::map<std::string, std::string>>();
      m.stages_.emplace(stage, std::move(r));
    }
  } catch (const nlohmann::json::exception&) {
    return Manifest{};
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["format"] = "taxoforge.manifest.v1";
  j["stages"] = nlohmann::ordered_json::object();
  for (const auto& [stage, r] : stages_) {
    j["stages"][stage] = {{"key", r.key()},
                          {"config_hash", r.config_hash},
                          {"inputs", r.inputs},
                          {"outputs", r.outputs}};
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

const StageRecord* Manifest::find(std::string_view stage) const {
  const auto it = stages_.find(stage);
  return it == stages_.end() ? nullptr : &it->second;
}

void Manifest::put(const std::string& stage, StageRecord record) {
  stages_[stage] = std::move(record);
}

void Manifest::erase(std::string_view stage) {
  const auto it = stages_.find(stage);
  if (it != stages_.end()) stages_.erase(it);
}

bool Manifest::is_fresh(std::string_view stage, const StageRecord& expected) const {
  const StageRecord* r = find(stage);
  if (r == nullptr || r->config_hash != expected.config_hash || r->inputs != expected.inputs)
    return false;
  if (r->outputs.empty()) return false;
  for (const auto& [path, hash] : r->outputs) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return false;
    try {
      if (sha256_file(path) != hash) return false;
    } catch (const std::runtime_error&) {
      return false;
    }
  }
  return true;
}

}  // namespace taxoforge::pipeline
