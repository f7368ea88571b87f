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

#include "taxoforge/pipeline/stages.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <sstream>

#include "taxoforge/candidates.h"
#include "taxoforge/corpus.h"
#include "taxoforge/features.h"
#include "taxoforge/ghap.h"
#include "taxoforge/pipeline/manifest.h"
#include "taxoforge/pu_classifier.h"
#include "taxoforge/similarity.h"
#include "taxoforge/taxonomy.h"

namespace taxoforge::pipeline {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kToolVersion = "0.1.0";

constexpr std::array kStages = {Stage::kExtract,    Stage::kFeaturize, Stage::kTrain,
                                Stage::kFilter,     Stage::kSimilarity, Stage::kCluster,
                                Stage::kMap,        Stage::kExport};

struct Artifacts {
  fs::path candidates, features, scaler, model, terms, sim_bin, sim_json, sim_csv, hierarchy,
      companies, manifest;

  explicit Artifacts(const fs::path& w)
      : candidates(w / "candidates.jsonl"),
        features(w / "features.csv"),
        scaler(w / "scaler.json"),
        model(w / "model.json"),
        terms(w / "terms.jsonl"),
        sim_bin(w / "similarity.bin"),
        sim_json(w / "similarity.json"),
        sim_csv(w / "similarity.csv"),
        hierarchy(w / "hierarchy.json"),
        companies(w / "companies.json"),
        manifest(w / "manifest.json") {}
};

fs::path export_path(const fs::path& workdir, ExportFormat f) {
  switch (f) {
    case ExportFormat::kJson: return workdir / "taxonomy.json";
    case ExportFormat::kDot: return workdir / "taxonomy.dot";
    case ExportFormat::kCsv: return workdir / "hypernym_stats.csv";
  }
  return {};
}

std::vector<fs::path> stage_inputs(Stage stage, const PipelineConfig& cfg, const Artifacts& a) {
  const fs::path& corpus = cfg.paths.corpus;
  switch (stage) {
    case Stage::kExtract: return {corpus, cfg.paths.stopwords};
    case Stage::kFeaturize: return {corpus, a.candidates};
    case Stage::kTrain: return {corpus, a.candidates, a.features, a.scaler};
    case Stage::kFilter: return {corpus, a.candidates, a.features, a.model};
    case Stage::kSimilarity: return {corpus, a.terms};
    case Stage::kCluster: return {a.sim_bin};
    case Stage::kMap: return {corpus, a.candidates, a.hierarchy};
    case Stage::kExport: return {a.sim_bin, a.hierarchy, a.companies};
  }
  return {};
}

std::vector<std::string> stage_sections(Stage stage) {
  switch (stage) {
    case Stage::kExtract: return {"templates"};
    case Stage::kFeaturize: return {"features"};
    case Stage::kTrain: return {"pu"};
    case Stage::kFilter: return {"pu"};
    case Stage::kSimilarity: return {"similarity"};
    case Stage::kCluster: return {"ghap"};
    case Stage::kMap: return {};
    case Stage::kExport: return {"export"};
  }
  return {};
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingArtifactError(p);
  return in;
}

// Writes through a temporary file so a failed stage never leaves a
// truncated artifact behind.
void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

struct Loaded {
  const PipelineConfig& cfg;
  const Artifacts& a;
  std::optional<Corpus> corpus_;
  std::optional<CandidateTable> table_;

  const Corpus& corpus() {
    if (!corpus_) corpus_ = load_corpus(cfg.paths.corpus);
    return *corpus_;
  }
  const CandidateTable& table() {
    if (!table_) {
      auto in = open_in(a.candidates);
      table_ = read_candidates(in, corpus());
    }
    return *table_;
  }
  FeatureMatrix features() {
    auto in = open_in(a.features);
    FeatureMatrix fm = read_feature_csv(in);
    auto sin = open_in(a.scaler);
    fm.scaler = read_scaler_json(sin);
    if (fm.scaler.mean.size() != fm.columns.size())
      throw FormatError("scaler.json does not match the feature columns");
    fm.standardized = fm.scaler.apply(fm.raw);
    const CandidateTable& t = table();
    if (fm.surfaces.size() != t.size())
      throw FormatError("features.csv rows do not match candidates.jsonl");
    for (std::size_t i = 0; i < t.size(); ++i)
      if (fm.surfaces[i] != t[i].surface)
        throw FormatError("features.csv row " + std::to_string(i) + " is not candidate '" +
                          t[i].surface + "'");
    return fm;
  }
  SimilarityMatrix similarity() {
    auto in = open_in(a.sim_bin);
    return read_similarity_binary(in);
  }
  Taxonomy hierarchy() {
    auto in = open_in(a.hierarchy);
    return read_hierarchy_json(in);
  }
};

std::vector<PuLabel> labels_of(const CandidateTable& t) {
  std::vector<PuLabel> out;
  for (const TermCandidate& c : t.candidates()) out.push_back(c.label);
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::vector<fs::path> execute(Stage stage, const PipelineConfig& cfg, const Artifacts& a,
                              std::string& summary) {
  Loaded in{cfg, a, {}, {}};
  switch (stage) {
    case Stage::kExtract: {
      if (!fs::is_regular_file(cfg.paths.stopwords)) throw MissingArtifactError(cfg.paths.stopwords);
      const std::set<std::string> stop = load_stopwords(cfg.paths.stopwords);
      const CandidateTable table =
          label_negatives(collect_candidates(in.corpus(), cfg.templates), stop);
      write_file(a.candidates, [&](std::ostream& o) { write_candidates(o, table, in.corpus()); });
      const CandidateStats st = table.stats();
      summary = std::to_string(st.total) + " candidates (" + std::to_string(st.negatives) +
                " negative) from " + std::to_string(in.corpus().size()) + " documents";
      return {a.candidates};
    }
    case Stage::kFeaturize: {
      const FeatureMatrix fm = featurize(in.table(), in.corpus(), cfg.features);
      write_file(a.features, [&](std::ostream& o) { write_feature_csv(o, fm); });
      write_file(a.scaler, [&](std::ostream& o) { write_scaler_json(o, fm.scaler, fm.columns); });
      summary = std::to_string(fm.raw.rows()) + " x " + std::to_string(fm.raw.cols()) + " features";
      if (!fm.warnings.empty()) summary += ", " + std::to_string(fm.warnings.size()) + " warning(s)";
      return {a.features, a.scaler};
    }
    case Stage::kTrain: {
      const FeatureMatrix fm = in.features();
      const std::vector<PuLabel> labels = labels_of(in.table());
      TermClassifier model = train(fm, labels, cfg.pu);
      model = calibrate(std::move(model), fm.standardized, labels, cfg.pu);
      write_file(a.model, [&](std::ostream& o) { write_model_json(o, model); });
      summary = std::to_string(model.support_indices.size()) + " support vectors, eta " +
                fmt(model.stats.eta) + ", cost ratio " + fmt(model.stats.cost_ratio) +
                ", sigmoid a=" + fmt(model.platt_a) + " b=" + fmt(model.platt_b);
      return {a.model};
    }
    case Stage::kFilter: {
      const FeatureMatrix fm = in.features();
      auto min = open_in(a.model);
      const TermClassifier model = read_model_json(min);
      const TermSet terms = filter_terms(in.table(), fm, model, cfg.pu.threshold);
      write_file(a.terms, [&](std::ostream& o) { write_term_set(o, terms); });
      summary = std::to_string(terms.size()) + " of " + std::to_string(in.table().size()) +
                " candidates pass threshold " + fmt(cfg.pu.threshold);
      return {a.terms};
    }
    case Stage::kSimilarity: {
      auto tin = open_in(a.terms);
      const TermSet terms = read_term_set(tin);
      if (terms.empty()) throw InvalidArgument("similarity: the term set is empty");
      const std::vector<TermWords> words = term_words(terms);
      const SimilarityMatrix m = build_similarity_matrix(words, in.corpus(), cfg.similarity);
      write_file(a.sim_bin, [&](std::ostream& o) { write_similarity_binary(o, m); });
      write_file(a.sim_json, [&](std::ostream& o) { write_similarity_sidecar(o, m); });
      std::vector<fs::path> out{a.sim_bin, a.sim_json};
      if (m.size() <= kSimilarityCsvMaxTerms) {
        write_file(a.sim_csv, [&](std::ostream& o) { write_similarity_csv(o, m); });
        out.push_back(a.sim_csv);
      } else {
        std::error_code ec;
        fs::remove(a.sim_csv, ec);
      }
      summary = std::to_string(m.size()) + " terms, mean off-diagonal similarity " +
                fmt(m.mean_offdiag);
      return out;
    }
    case Stage::kCluster: {
      const Taxonomy tax = build_hierarchy(in.similarity(), cfg.ghap);
      write_file(a.hierarchy, [&](std::ostream& o) { write_hierarchy_json(o, tax); });
      summary = "level sizes";
      for (const auto& level : tax.levels) summary += " " + std::to_string(level.size());
      for (std::size_t k = 0; k < tax.converged.size(); ++k)
        if (!tax.converged[k])
          summary += "; warning: layer " + std::to_string(k + 1) + " did not converge";
      return {a.hierarchy};
    }
    case Stage::kMap: {
      const CompanyMapping m = map_companies(in.hierarchy(), in.table(), in.corpus());
      write_file(a.companies, [&](std::ostream& o) { write_mapping_json(o, m); });
      summary = std::to_string(m.by_company.size()) + " companies over " +
                std::to_string(m.by_term.size()) + " leaves";
      return {a.companies};
    }
    case Stage::kExport: {
      const SimilarityMatrix sim = in.similarity();
      const Taxonomy tax = in.hierarchy();
      if (tax.terms != sim.terms)
        throw FormatError("hierarchy.json and similarity.bin list different terms");
      auto cin = open_in(a.companies);
      const CompanyMapping mapping = read_mapping_json(cin);
      const std::vector<HypernymStats> stats = hypernym_statistics(tax, mapping, sim.values);
      std::vector<fs::path> out;
      for (ExportFormat f : cfg.export_formats) {
        const fs::path p = export_path(cfg.paths.workdir, f);
        write_file(p, [&](std::ostream& o) { export_taxonomy(o, tax, mapping, stats, f); });
        out.push_back(p);
      }
      summary = std::to_string(stats.size()) + " hypernyms";
      return out;
    }
  }
  return {};
}

}  // namespace

std::span<const Stage> all_stages() { return kStages; }

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kExtract: return "extract";
    case Stage::kFeaturize: return "featurize";
    case Stage::kTrain: return "train";
    case Stage::kFilter: return "filter";
    case Stage::kSimilarity: return "similarity";
    case Stage::kCluster: return "cluster";
    case Stage::kMap: return "map";
    case Stage::kExport: return "export";
  }
  return "";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kStages)
    if (stage_name(s) == name) return s;
  return std::nullopt;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingArtifactError*>(&e) != nullptr) return kExitMissingArtifact;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return kExitNumerical;
  return kExitFailure;
}

StageReport run_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log) {
  const fs::path& workdir = cfg.paths.workdir;
  const Artifacts a(workdir);
  const std::string name(stage_name(stage));

  StageRecord expected;
  for (const fs::path& p : stage_inputs(stage, cfg, a)) {
    if (!fs::is_regular_file(p)) throw MissingArtifactError(p);
    expected.inputs[fs::absolute(p).string()] = sha256_file(p);
  }
  nlohmann::ordered_json keyed;
  keyed["stage"] = name;
  keyed["version"] = std::string(kToolVersion);
  for (const std::string& section : stage_sections(stage)) keyed[section] = cfg.document.at(section);
  // The cut-off is only read when filtering.
  if (stage == Stage::kTrain) keyed["pu"].erase("threshold");
  expected.config_hash = sha256_hex(keyed.dump());

  fs::create_directories(workdir);
  Manifest manifest = Manifest::load(a.manifest);
  StageReport report;
  report.stage = stage;
  if (manifest.is_fresh(name, expected)) {
    report.cached = true;
    for (const auto& [p, h] : manifest.find(name)->outputs) report.outputs.emplace_back(p);
    report.summary = "cached";
    log << name << ": cached\n";
    return report;
  }

  report.outputs = execute(stage, cfg, a, report.summary);
  for (const fs::path& p : report.outputs)
    expected.outputs[fs::absolute(p).string()] = sha256_file(p);
  manifest.put(name, expected);
  manifest.save(a.manifest);
  log << name << ": " << report.summary << '\n';
  return report;
}

std::vector<StageReport> run_all(const PipelineConfig& cfg, std::ostream& log) {
  std::vector<StageReport> out;
  for (Stage s : kStages) out.push_back(run_stage(s, cfg, log));
  return out;
}

}  // namespace taxoforge::pipeline
