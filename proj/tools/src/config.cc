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

#include "taxoforge/pipeline/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace taxoforge::pipeline {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

void merge_strict(ordered_json& into, const ordered_json& from, const std::string& prefix) {
  if (!from.is_object()) bad(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : from.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!into.contains(key)) bad(path, "unknown key");
    ordered_json& slot = into[key];
    if (slot.is_object()) {
      merge_strict(slot, value, path);
    } else {
      slot = value;
    }
  }
}

const ordered_json& at(const ordered_json& doc, const std::string& path) {
  const ordered_json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    node = &node->at(path.substr(start, dot - start));
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

double number(const ordered_json& doc, const std::string& key) {
  const ordered_json& v = at(doc, key);
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

std::size_t count(const ordered_json& doc, const std::string& key) {
  const ordered_json& v = at(doc, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

bool flag(const ordered_json& doc, const std::string& key) {
  const ordered_json& v = at(doc, key);
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string text(const ordered_json& doc, const std::string& key) {
  const ordered_json& v = at(doc, key);
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::set<std::string> text_set(const ordered_json& doc, const std::string& key) {
  const ordered_json& v = at(doc, key);
  if (!v.is_array()) bad(key, "expected an array of strings");
  std::set<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad(key, "expected an array of strings");
    out.insert(e.get<std::string>());
  }
  return out;
}

std::optional<double> optional_number(const ordered_json& doc, const std::string& key,
                                      std::string_view null_word) {
  const ordered_json& v = at(doc, key);
  if (v.is_null()) return std::nullopt;
  if (v.is_string() && !null_word.empty() && v.get<std::string>() == null_word) return std::nullopt;
  if (!v.is_number()) bad(key, null_word.empty() ? "expected a number or null"
                                                 : "expected a number or \"" +
                                                       std::string(null_word) + "\"");
  return v.get<double>();
}

template <typename E>
E choice(const ordered_json& doc, const std::string& key,
         std::initializer_list<std::pair<std::string_view, E>> options) {
  const std::string v = text(doc, key);
  std::string names;
  for (const auto& [name, value] : options) {
    if (v == name) return value;
    names += names.empty() ? "" : ", ";
    names += name;
  }
  bad(key, "'" + v + "' is not one of " + names);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

ordered_json default_config_document() {
  const TemplateConfig t;
  const MarkerConfig m;
  const PUConfig pu;
  const SimilarityConfig sim;
  const GhapConfig g;
  const GeneratorSpec gen;
  ordered_json d;
  d["paths"] = {{"corpus", "corpus.jsonl"}, {"stopwords", "stopwords.txt"}, {"workdir", "work"}};
  d["templates"] = {{"noun_tags", t.noun_tags},
                    {"numeral_tags", t.numeral_tags},
                    {"verb_tags", t.verb_tags},
                    {"run_breakers", t.run_breakers},
                    {"attributive_relation", t.attributive_relation},
                    {"max_len", t.max_len},
                    {"noun_min_len", t.noun_min_len},
                    {"attributive_min_len", t.attributive_min_len},
                    {"min_doc_count", t.min_doc_count},
                    {"emit_subruns", t.emit_subruns}};
  d["features"] = {{"followed_by", m.followed_by}, {"following", m.following}};
  d["pu"] = {{"pi", pu.pi},
             {"eta", nullptr},
             {"base_cost", pu.base_cost},
             {"kernel_gamma", "auto"},
             {"smo_tolerance", pu.smo_tolerance},
             {"max_passes", pu.max_passes},
             {"threshold", pu.threshold},
             {"assignment", "labeled_over_unlabeled"},
             {"cost_ratio_override", nullptr},
             {"calibration_folds", pu.calibration_folds}};
  d["similarity"] = {{"eq2_mode", "prose"}, {"eq3_norm", "len"}, {"lenient", sim.lenient}};
  d["ghap"] = {{"levels", g.levels},
               {"damping", g.ap.damping},
               {"stable_window", g.ap.stable_window},
               {"max_iterations", g.ap.max_iterations},
               {"preference", "median"},
               {"preference_scale", g.ap.preference_scale},
               {"preference_placement", "similarity"},
               {"availability_sum", "exemplar_column"},
               {"tie_noise", g.ap.tie_noise},
               {"refine_exemplars", g.ap.refine_exemplars}};
  d["export"] = {{"formats", {"json", "dot", "csv"}}};
  d["seed"] = 7;
  d["generator"] = {{"classes", gen.classes},
                    {"docs_per_class", gen.docs_per_class},
                    {"companies_per_class", gen.companies_per_class},
                    {"sentences_per_doc", gen.sentences_per_doc},
                    {"family_focus", gen.family_focus},
                    {"cross_class_rate", gen.cross_class_rate},
                    {"first_year", gen.first_year}};
  d["threads"] = 1;
  return d;
}

void apply_override(ordered_json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  ordered_json value = ordered_json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  ordered_json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override key '" + key + "' descends into a value");
      *node = ordered_json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

PipelineConfig parse_config(const ordered_json& user, const std::filesystem::path& base_dir) {
  ordered_json d = default_config_document();
  merge_strict(d, user, "");
  PipelineConfig c;

  c.paths.corpus = resolve(base_dir, text(d, "paths.corpus"));
  c.paths.stopwords = resolve(base_dir, text(d, "paths.stopwords"));
  c.paths.workdir = resolve(base_dir, text(d, "paths.workdir"));
  if (c.paths.workdir.empty()) bad("paths.workdir", "must not be empty");

  TemplateConfig& t = c.templates;
  t.noun_tags = text_set(d, "templates.noun_tags");
  t.numeral_tags = text_set(d, "templates.numeral_tags");
  t.verb_tags = text_set(d, "templates.verb_tags");
  t.run_breakers = text_set(d, "templates.run_breakers");
  t.attributive_relation = text(d, "templates.attributive_relation");
  t.max_len = count(d, "templates.max_len");
  t.noun_min_len = count(d, "templates.noun_min_len");
  t.attributive_min_len = count(d, "templates.attributive_min_len");
  t.min_doc_count = count(d, "templates.min_doc_count");
  t.emit_subruns = flag(d, "templates.emit_subruns");
  if (t.noun_tags.empty()) bad("templates.noun_tags", "must not be empty");
  if (t.max_len == 0) bad("templates.max_len", "must be positive");
  if (t.noun_min_len == 0 || t.noun_min_len > t.max_len)
    bad("templates.noun_min_len", "must lie in [1, max_len]");
  if (t.attributive_min_len < 2 || t.attributive_min_len > t.max_len)
    bad("templates.attributive_min_len", "must lie in [2, max_len]");
  if (t.min_doc_count == 0) bad("templates.min_doc_count", "must be positive");

  c.features.markers.followed_by = text_set(d, "features.followed_by");
  c.features.markers.following = text_set(d, "features.following");

  PUConfig& pu = c.pu;
  pu.pi = number(d, "pu.pi");
  pu.eta = optional_number(d, "pu.eta", "");
  pu.base_cost = number(d, "pu.base_cost");
  pu.kernel_gamma = optional_number(d, "pu.kernel_gamma", "auto");
  pu.smo_tolerance = number(d, "pu.smo_tolerance");
  pu.max_passes = count(d, "pu.max_passes");
  pu.threshold = number(d, "pu.threshold");
  pu.assignment = choice<CostAssignment>(
      d, "pu.assignment",
      {{"labeled_over_unlabeled", CostAssignment::kLabeledOverUnlabeled},
       {"unlabeled_over_labeled", CostAssignment::kUnlabeledOverLabeled}});
  pu.cost_ratio_override = optional_number(d, "pu.cost_ratio_override", "");
  pu.calibration_folds = count(d, "pu.calibration_folds");
  try {
    pu.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  c.similarity.cooccurrence = choice<CooccurrenceForm>(
      d, "similarity.eq2_mode",
      {{"prose", CooccurrenceForm::kProse}, {"printed", CooccurrenceForm::kPrinted}});
  c.similarity.normalization = choice<DirectedNormalization>(
      d, "similarity.eq3_norm",
      {{"len", DirectedNormalization::kLength}, {"beta_sum", DirectedNormalization::kWeightSum}});
  c.similarity.lenient = flag(d, "similarity.lenient");

  GhapConfig& g = c.ghap;
  g.levels = count(d, "ghap.levels");
  if (g.levels == 0) bad("ghap.levels", "must be positive");
  g.ap.damping = number(d, "ghap.damping");
  g.ap.stable_window = count(d, "ghap.stable_window");
  g.ap.max_iterations = count(d, "ghap.max_iterations");
  g.ap.preference = choice<PreferenceStrategy>(
      d, "ghap.preference",
      {{"median", PreferenceStrategy::kMedian}, {"min", PreferenceStrategy::kMinimum}});
  g.ap.preference_scale = number(d, "ghap.preference_scale");
  g.ap.placement = choice<PreferencePlacement>(
      d, "ghap.preference_placement",
      {{"similarity", PreferencePlacement::kSimilarity},
       {"availability", PreferencePlacement::kAvailability},
       {"both", PreferencePlacement::kBoth}});
  g.ap.availability_sum = choice<AvailabilitySum>(
      d, "ghap.availability_sum",
      {{"exemplar_column", AvailabilitySum::kExemplarColumn},
       {"point_column", AvailabilitySum::kPointColumn}});
  g.ap.tie_noise = number(d, "ghap.tie_noise");
  g.ap.refine_exemplars = flag(d, "ghap.refine_exemplars");
  try {
    g.ap.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  const ordered_json& formats = at(d, "export.formats");
  if (!formats.is_array() || formats.empty()) bad("export.formats", "expected a non-empty array");
  for (const auto& f : formats) {
    if (!f.is_string()) bad("export.formats", "expected format names");
    try {
      c.export_formats.push_back(parse_export_format(f.get<std::string>()));
    } catch (const InvalidArgument& e) {
      bad("export.formats", e.what());
    }
  }

  const ordered_json& seed = at(d, "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    bad("seed", "expected a non-negative integer");
  c.seed = seed.get<std::uint64_t>();

  GeneratorSpec& gen = c.generator;
  gen.classes = count(d, "generator.classes");
  gen.docs_per_class = count(d, "generator.docs_per_class");
  gen.companies_per_class = count(d, "generator.companies_per_class");
  gen.sentences_per_doc = count(d, "generator.sentences_per_doc");
  gen.family_focus = number(d, "generator.family_focus");
  gen.cross_class_rate = number(d, "generator.cross_class_rate");
  gen.first_year = static_cast<int>(number(d, "generator.first_year"));

  c.threads = count(d, "threads");
  set_threads(c, c.threads);
  c.document = std::move(d);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  ordered_json user = ordered_json::parse(in, nullptr, false);
  if (user.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
  for (const std::string& o : overrides) apply_override(user, o);
  if (const char* wd = std::getenv("TAXOFORGE_WORKDIR"); wd != nullptr && *wd != '\0')
    user["paths"]["workdir"] = std::filesystem::absolute(wd).string();
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  return parse_config(user, base);
}

void set_threads(PipelineConfig& cfg, std::size_t threads) {
  const std::size_t n = threads == 0 ? 1 : threads;
  cfg.threads = n;
  cfg.templates.threads = n;
  cfg.features.threads = n;
  cfg.similarity.threads = n;
}

}  // namespace taxoforge::pipeline
