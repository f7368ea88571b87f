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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taxoforge/corpus.h"
#include "taxoforge/pipeline/config.h"
#include "taxoforge/pipeline/generator.h"
#include "taxoforge/pipeline/stages.h"

namespace {

namespace fs = std::filesystem;
namespace tp = taxoforge::pipeline;

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::size_t threads = 0;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("-c,--config", o.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--set", o.overrides, "override a config key, e.g. --set ghap.damping=0.8")
      ->allow_extra_args(false);
  cmd.add_option("--threads", o.threads, "cap on worker threads (default: config value)");
}

tp::PipelineConfig load(const CommonOptions& o) {
  tp::PipelineConfig cfg = tp::load_config(o.config, o.overrides);
  if (o.threads > 0) tp::set_threads(cfg, o.threads);
  return cfg;
}

void write_atomically(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw taxoforge::Error("cannot write " + tmp.string());
    body(out);
    if (!out.flush()) throw taxoforge::Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

int generate(const tp::PipelineConfig& cfg) {
  const tp::SyntheticCorpus s = tp::generate_synthetic_corpus(cfg.generator, cfg.seed);
  write_atomically(cfg.paths.corpus,
                   [&](std::ostream& o) { taxoforge::write_corpus(o, s.corpus); });
  write_atomically(cfg.paths.stopwords, [&](std::ostream& o) { tp::write_stopwords(o, s.stopwords); });
  std::cout << "generate: " << s.corpus.size() << " documents over " << s.classes.size()
            << " classes -> " << cfg.paths.corpus.string() << '\n';
  return tp::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taxoforge: industry taxonomy construction from annotated reports"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::vector<std::pair<CLI::App*, std::optional<tp::Stage>>> stage_cmds;
  for (tp::Stage s : tp::all_stages()) {
    CLI::App* cmd = app.add_subcommand(std::string(tp::stage_name(s)),
                                       "run the " + std::string(tp::stage_name(s)) + " stage");
    add_common(*cmd, opts);
    stage_cmds.emplace_back(cmd, s);
  }
  CLI::App* all_cmd = app.add_subcommand("all", "run every stage in order");
  add_common(*all_cmd, opts);

  std::string run_name;
  CLI::App* run_cmd = app.add_subcommand("run", "run a named stage, or 'all'");
  run_cmd->add_option("stage", run_name, "stage name")->required();
  add_common(*run_cmd, opts);

  CLI::App* gen_cmd = app.add_subcommand("generate", "write a synthetic corpus and stop-word list");
  add_common(*gen_cmd, opts);

  CLI::App* print_cmd = app.add_subcommand("print-config", "print the effective configuration");
  add_common(*print_cmd, opts);

  CLI::App* defaults_cmd = app.add_subcommand("default-config", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? tp::kExitOk : tp::kExitConfig;
  }

  try {
    if (defaults_cmd->parsed()) {
      std::cout << tp::default_config_document().dump(2) << '\n';
      return tp::kExitOk;
    }
    const tp::PipelineConfig cfg = load(opts);
    if (print_cmd->parsed()) {
      std::cout << cfg.document.dump(2) << '\n';
      return tp::kExitOk;
    }
    if (gen_cmd->parsed()) return generate(cfg);
    if (all_cmd->parsed() || (run_cmd->parsed() && run_name == "all")) {
      tp::run_all(cfg, std::cout);
      return tp::kExitOk;
    }
    std::optional<tp::Stage> stage;
    if (run_cmd->parsed()) {
      stage = tp::parse_stage(run_name);
      if (!stage) throw tp::ConfigError("unknown stage '" + run_name + "'");
    }
    for (const auto& [cmd, s] : stage_cmds)
      if (cmd->parsed()) stage = s;
    tp::run_stage(*stage, cfg, std::cout);
    return tp::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "taxoforge: " << e.what() << '\n';
    return tp::exit_code_for(e);
  }
}
