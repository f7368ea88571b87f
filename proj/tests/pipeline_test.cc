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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "taxoforge/candidates.h"
#include "taxoforge/error.h"
#include "taxoforge/ghap.h"
#include "taxoforge/pipeline/config.h"
#include "taxoforge/pipeline/generator.h"
#include "taxoforge/pipeline/manifest.h"
#include "taxoforge/pipeline/stages.h"
#include "test_util.h"

namespace taxoforge::pipeline {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct CliResult {
  int code = -1;
  std::string out, err;
};

// Runs the CLI with `args` (already shell-quoted where needed).
CliResult cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const fs::path out = dir / "cli.out", err = dir / "cli.err";
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" TAXOFORGE_CLI "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Copies the bundled toy data next to a fresh config.
fs::path toy_dir(const std::string& name) {
  const fs::path d = testing::scratch_dir(name);
  for (const char* f : {"toy_corpus.jsonl", "toy_stopwords.txt", "toy_config.json"})
    fs::copy_file(testing::data_path(f), d / f);
  return d;
}

// A generated corpus with a config that points at it.
fs::path synthetic_dir(const std::string& name) {
  const fs::path d = testing::scratch_dir(name);
  spit(d / "config.json",
       R"({"paths": {"corpus": "corpus.jsonl", "stopwords": "stop.txt", "workdir": "work"}})");
  const CliResult g = cli(d, "generate -c '" + (d / "config.json").string() + "'");
  EXPECT_EQ(g.code, 0) << g.err;
  return d;
}

std::string cfg_arg(const fs::path& d, const char* file = "config.json") {
  return "-c '" + (d / file).string() + "'";
}

TEST(Cli, ExtractOnToyCorpusMatchesHandEnumeration) {
  const fs::path d = toy_dir("extract");
  const CliResult r = cli(d, "run extract " + cfg_arg(d, "toy_config.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("extract: 4 candidates"), std::string::npos) << r.out;
  const Corpus corpus = load_corpus(d / "toy_corpus.jsonl");
  std::ifstream in(d / "toy_work" / "candidates.jsonl");
  const CandidateTable t = read_candidates(in, corpus);
  std::vector<std::string> surfaces;
  for (const TermCandidate& c : t.candidates()) surfaces.push_back(c.surface);
  EXPECT_EQ(surfaces, (std::vector<std::string>{"医疗器械", "支付业务", "第三方支付", "第三方支付业务"}));
  EXPECT_EQ(t.find("支付业务")->label, PuLabel::kNegative);
  EXPECT_EQ(t.find("第三方支付业务")->label, PuLabel::kNegative);
  EXPECT_EQ(t.find("医疗器械")->label, PuLabel::kUnlabeled);
  EXPECT_EQ(t.find("医疗器械")->docs, (std::vector<std::size_t>{3, 4}));
}

TEST(Cli, SecondFullRunIsCached) {
  const fs::path d = synthetic_dir("cached");
  const CliResult first = cli(d, "all " + cfg_arg(d));
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out.find("cached"), std::string::npos);
  const std::string taxonomy = slurp(d / "work" / "taxonomy.json");
  const CliResult second = cli(d, "run all " + cfg_arg(d));
  ASSERT_EQ(second.code, 0) << second.err;
  std::istringstream lines(second.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_NE(line.find(": cached"), std::string::npos) << line;
    ++n;
  }
  EXPECT_EQ(n, all_stages().size());
  EXPECT_EQ(slurp(d / "work" / "taxonomy.json"), taxonomy);
}

TEST(Cli, MissingUpstreamArtifactExitsTwo) {
  const fs::path d = synthetic_dir("missing");
  const CliResult r = cli(d, "cluster " + cfg_arg(d));
  EXPECT_EQ(r.code, kExitMissingArtifact);
  EXPECT_NE(r.err.find("similarity.bin"), std::string::npos) << r.err;
  EXPECT_EQ(cli(d, "featurize " + cfg_arg(d)).code, kExitMissingArtifact);
}

TEST(Cli, ConfigErrorsExitThree) {
  const fs::path d = synthetic_dir("config_errors");
  const std::string c = cfg_arg(d);
  EXPECT_EQ(cli(d, "extract " + c + " --set ghap.no_such_key=1").code, kExitConfig);
  EXPECT_EQ(cli(d, "extract " + c + " --set ghap.preference=mode").code, kExitConfig);
  EXPECT_EQ(cli(d, "extract " + c + " --set ghap.damping=1.5").code, kExitConfig);
  EXPECT_EQ(cli(d, "extract " + c + " --set similarity.eq2_mode=squared").code, kExitConfig);
  EXPECT_EQ(cli(d, "extract " + c + " --set notakeyvalue").code, kExitConfig);
  EXPECT_EQ(cli(d, "extract " + c + " --bogus-flag").code, kExitConfig);
  EXPECT_EQ(cli(d, "run nosuchstage " + c).code, kExitConfig);
  EXPECT_EQ(cli(d, "extract").code, kExitConfig);  // --config is required
  spit(d / "broken.json", "{\"paths\": ");
  EXPECT_EQ(cli(d, "extract " + cfg_arg(d, "broken.json")).code, kExitConfig);
  spit(d / "typo.json", R"({"pathz": {}})");
  const CliResult typo = cli(d, "extract " + cfg_arg(d, "typo.json"));
  EXPECT_EQ(typo.code, kExitConfig);
  EXPECT_NE(typo.err.find("pathz"), std::string::npos) << typo.err;
  EXPECT_EQ(cli(d, "--help").code, kExitOk);
}

TEST(Cli, MissingCorpusExitsTwo) {
  const fs::path d = testing::scratch_dir("no_corpus");
  spit(d / "config.json", R"({"paths": {"corpus": "absent.jsonl"}})");
  const CliResult r = cli(d, "extract " + cfg_arg(d));
  EXPECT_EQ(r.code, kExitMissingArtifact);
  EXPECT_NE(r.err.find("absent.jsonl"), std::string::npos);
}

TEST(Cli, WorkdirEnvironmentOverride) {
  const fs::path d = toy_dir("workdir_env");
  const fs::path elsewhere = d / "elsewhere";
  const CliResult r = cli(d, "extract " + cfg_arg(d, "toy_config.json"),
                          "TAXOFORGE_WORKDIR='" + elsewhere.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(elsewhere / "candidates.jsonl"));
  EXPECT_TRUE(fs::exists(elsewhere / "manifest.json"));
  EXPECT_FALSE(fs::exists(d / "toy_work"));
}

TEST(Cli, PrintAndDefaultConfig) {
  const fs::path d = synthetic_dir("print_config");
  const CliResult p = cli(d, "print-config " + cfg_arg(d) + " --set ghap.damping=0.75");
  ASSERT_EQ(p.code, 0) << p.err;
  const auto j = nlohmann::json::parse(p.out);
  EXPECT_EQ(j["ghap"]["damping"].get<double>(), 0.75);
  const CliResult def = cli(d, "default-config");
  ASSERT_EQ(def.code, 0) << def.err;
  EXPECT_EQ(nlohmann::json::parse(def.out), nlohmann::json::parse(default_config_document().dump()));
}

TEST(Cli, GeneratorIsByteDeterministic) {
  const fs::path d = synthetic_dir("generate_twice");
  const std::string first = slurp(d / "corpus.jsonl");
  const std::string stop = slurp(d / "stop.txt");
  ASSERT_EQ(cli(d, "generate " + cfg_arg(d)).code, 0);
  EXPECT_EQ(slurp(d / "corpus.jsonl"), first);
  EXPECT_EQ(slurp(d / "stop.txt"), stop);
  ASSERT_EQ(cli(d, "generate " + cfg_arg(d) + " --set seed=8").code, 0);
  EXPECT_NE(slurp(d / "corpus.jsonl"), first);
}

PipelineConfig config_in(const fs::path& d, std::vector<std::string> overrides = {}) {
  return load_config(d / "config.json", overrides);
}

TEST(Cache, ConfigAndInputChangesInvalidate) {
  const fs::path d = synthetic_dir("invalidate");
  std::ostringstream log;
  PipelineConfig cfg = config_in(d);
  EXPECT_FALSE(run_stage(Stage::kExtract, cfg, log).cached);
  EXPECT_TRUE(run_stage(Stage::kExtract, cfg, log).cached);
  const std::string hash = Manifest::load(cfg.paths.workdir / "manifest.json").find("extract")->config_hash;

  // An unrelated section leaves the stage cached.
  EXPECT_TRUE(run_stage(Stage::kExtract, config_in(d, {"ghap.damping=0.8"}), log).cached);
  // Thread count is not part of the key.
  EXPECT_TRUE(run_stage(Stage::kExtract, config_in(d, {"threads=3"}), log).cached);

  cfg = config_in(d, {"templates.min_doc_count=4"});
  EXPECT_FALSE(run_stage(Stage::kExtract, cfg, log).cached);
  EXPECT_NE(Manifest::load(cfg.paths.workdir / "manifest.json").find("extract")->config_hash, hash);

  // Editing an input file re-runs the stage.
  cfg = config_in(d);
  EXPECT_FALSE(run_stage(Stage::kExtract, cfg, log).cached);
  spit(cfg.paths.stopwords, slurp(cfg.paths.stopwords) + "新词\n");
  EXPECT_FALSE(run_stage(Stage::kExtract, cfg, log).cached);
  EXPECT_TRUE(run_stage(Stage::kExtract, cfg, log).cached);

  // So does tampering with an output.
  spit(cfg.paths.workdir / "candidates.jsonl", "");
  EXPECT_FALSE(run_stage(Stage::kExtract, cfg, log).cached);
}

TEST(Cache, DownstreamStagesRerunAfterUpstreamChange) {
  const fs::path d = synthetic_dir("downstream");
  std::ostringstream log;
  run_all(config_in(d), log);
  const auto reports = run_all(config_in(d, {"pu.threshold=0.6"}), log);
  ASSERT_EQ(reports.size(), 8u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(reports[i].cached) << i;
  EXPECT_FALSE(reports[3].cached);  // filter
}

TEST(Pipeline, ThreadCountDoesNotChangeArtifacts) {
  const fs::path a = synthetic_dir("threads_a");
  const fs::path b = synthetic_dir("threads_b");
  std::ostringstream log;
  run_all(config_in(a, {"threads=1"}), log);
  run_all(config_in(b, {"threads=4"}), log);
  for (const char* f : {"candidates.jsonl", "features.csv", "model.json", "terms.jsonl",
                        "similarity.bin", "hierarchy.json", "taxonomy.json", "taxonomy.dot"})
    EXPECT_EQ(slurp(a / "work" / f), slurp(b / "work" / f)) << f;
}

TEST(Pipeline, PlantedClassesGiveThreeHypernyms) {
  const fs::path d = synthetic_dir("planted");
  std::ostringstream log;
  const PipelineConfig cfg = config_in(d);
  run_all(cfg, log);
  std::ifstream in(cfg.paths.workdir / "hierarchy.json");
  const Taxonomy tax = read_hierarchy_json(in);
  EXPECT_EQ(tax.num_levels(), 3u);
  EXPECT_EQ(tax.roots().size(), 3u) << log.str();
}

TEST(Generator, DisjointClassVocabulariesNeverCooccur) {
  GeneratorSpec spec;
  spec.classes = 2;
  const SyntheticCorpus s = generate_synthetic_corpus(spec, 11);
  ASSERT_EQ(s.classes.size(), 2u);
  auto vocab = [](const PlantedClass& c) {
    std::set<std::string> v;
    for (const TermFamily& f : c.families) {
      v.insert(f.head);
      v.insert(f.modifiers.begin(), f.modifiers.end());
    }
    return v;
  };
  const auto va = vocab(s.classes[0]), vb = vocab(s.classes[1]);
  std::set<WordPair> pairs;
  for (const auto& a : va) {
    ASSERT_FALSE(vb.contains(a));
    for (const auto& b : vb) pairs.insert(WordPair(a, b));
  }
  for (const auto& [pair, count] : cooccurrence_counts(s.corpus, pairs))
    EXPECT_EQ(count, 0u) << pair.first << " " << pair.second;
  // Within a class the words do co-occur.
  std::set<WordPair> inside;
  for (const auto& a : va)
    for (const auto& b : va)
      if (a < b) inside.insert(WordPair(a, b));
  std::size_t total = 0;
  for (const auto& [pair, count] : cooccurrence_counts(s.corpus, inside)) total += count;
  EXPECT_GT(total, 0u);
}

TEST(Generator, ShapeAndDeterminism) {
  GeneratorSpec spec;
  const SyntheticCorpus a = generate_synthetic_corpus(spec, 5);
  const SyntheticCorpus b = generate_synthetic_corpus(spec, 5);
  std::ostringstream sa, sb;
  write_corpus(sa, a.corpus);
  write_corpus(sb, b.corpus);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.corpus.size(), spec.classes * spec.docs_per_class);
  std::set<std::string> companies;
  for (const AnnotatedDocument& d : a.corpus.documents()) {
    companies.insert(d.company_id);
    EXPECT_EQ(d.sentences.size(), spec.sentences_per_doc);
  }
  EXPECT_EQ(companies.size(), spec.classes * spec.companies_per_class);
  EXPECT_FALSE(a.stopwords.empty());
}

TEST(Manifest, HashesAndPersistence) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const fs::path d = testing::scratch_dir("manifest");
  EXPECT_EQ(Manifest::load(d / "none.json").find("extract"), nullptr);
  spit(d / "corrupt.json", "not json");
  EXPECT_EQ(Manifest::load(d / "corrupt.json").find("extract"), nullptr);

  spit(d / "out.txt", "payload");
  StageRecord rec;
  rec.config_hash = sha256_hex("cfg");
  rec.inputs["in"] = sha256_hex("x");
  rec.outputs[(d / "out.txt").string()] = sha256_file(d / "out.txt");
  Manifest m;
  m.put("extract", rec);
  m.save(d / "manifest.json");
  const Manifest back = Manifest::load(d / "manifest.json");
  ASSERT_NE(back.find("extract"), nullptr);
  EXPECT_EQ(*back.find("extract"), rec);
  EXPECT_TRUE(back.is_fresh("extract", rec));
  StageRecord other = rec;
  other.config_hash = sha256_hex("cfg2");
  EXPECT_FALSE(back.is_fresh("extract", other));
  EXPECT_NE(other.key(), rec.key());
  spit(d / "out.txt", "changed");
  EXPECT_FALSE(back.is_fresh("extract", rec));
}

TEST(Stages, NamesAndExitCodes) {
  for (Stage s : all_stages()) EXPECT_EQ(parse_stage(stage_name(s)), s);
  EXPECT_FALSE(parse_stage("all").has_value());
  EXPECT_EQ(exit_code_for(MissingArtifactError("x")), kExitMissingArtifact);
  EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
  EXPECT_EQ(exit_code_for(NumericalError("x")), kExitNumerical);
  EXPECT_EQ(exit_code_for(FormatError("x")), kExitFailure);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitFailure);
}

}  // namespace
}  // namespace taxoforge::pipeline
