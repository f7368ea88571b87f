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

#include "taxoforge/pipeline/generator.h"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <ostream>
#include <random>

#include "taxoforge/error.h"

namespace taxoforge::pipeline {
namespace {

struct FixedClass {
  const char* name;
  const char* heads[2];
  const char* modifiers[2][3];
};

constexpr FixedClass kFixed[] = {
    {"教育", {"教育", "培训"}, {{"在线", "职业", "学前"}, {"语言", "技能", "艺术"}}},
    {"医疗", {"医疗", "器械"}, {{"远程", "社区", "专科"}, {"手术", "康复", "诊断"}}},
    {"金融", {"支付", "保险"}, {{"第三方", "移动", "跨境"}, {"健康", "财产", "车辆"}}},
    {"软件", {"软件", "平台"}, {{"管理", "财务", "安全"}, {"电商", "数据", "云端"}}},
    {"农业", {"种植", "养殖"}, {{"果蔬", "花卉", "茶叶"}, {"生猪", "水产", "家禽"}}},
    {"能源", {"光伏", "电池"}, {{"分布式", "屋顶", "农场"}, {"锂", "动力", "固态"}}},
};

// Shared vocabulary; every noun here is a stop word.
const std::set<std::string> kStopwords = {"公司", "产品", "业务", "行业", "前景", "服务", "我们"};

// Bounded draws built directly on the engine so output does not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

Token tok(std::string surface, std::string pos, int head, std::string rel) {
  return Token{std::move(surface), std::move(pos), head, std::move(rel)};
}

struct Pick {
  std::string modifier;
  std::string head;
};

// A: 我们 从事 M H 业务 。
Sentence template_a(const Pick& t) {
  return {tok("我们", "r", 1, "SBV"), tok("从事", "v", -1, "HED"), tok(t.modifier, "n", 3, "ATT"),
          tok(t.head, "n", 4, "ATT"),  tok("业务", "n", 1, "VOB"),  tok("。", "wp", 1, "WP")};
}

// B: 公司 产品 为 M H 和 M' H' 。
Sentence template_b(const Pick& t, const Pick& u) {
  return {tok("公司", "n", 1, "ATT"),      tok("产品", "n", 2, "SBV"),
          tok("为", "v", -1, "HED"),        tok(t.modifier, "n", 4, "ATT"),
          tok(t.head, "n", 2, "VOB"),       tok("和", "c", 7, "LAD"),
          tok(u.modifier, "n", 7, "ATT"),   tok(u.head, "n", 4, "COO"),
          tok("。", "wp", 2, "WP")};
}

// C: M H 行业 前景 广阔 。
Sentence template_c(const Pick& t) {
  return {tok(t.modifier, "n", 1, "ATT"), tok(t.head, "n", 2, "ATT"), tok("行业", "n", 3, "ATT"),
          tok("前景", "n", 4, "SBV"),     tok("广阔", "a", -1, "HED"), tok("。", "wp", 4, "WP")};
}

// D: 主要 提供 M H 服务 。
Sentence template_d(const Pick& t) {
  return {tok("主要", "d", 1, "ADV"), tok("提供", "v", -1, "HED"), tok(t.modifier, "n", 3, "ATT"),
          tok(t.head, "n", 4, "ATT"), tok("服务", "n", 1, "VOB"),  tok("。", "wp", 1, "WP")};
}

}  // namespace

std::vector<PlantedClass> planted_classes(std::size_t classes) {
  std::vector<PlantedClass> out;
  for (std::size_t c = 0; c < classes; ++c) {
    PlantedClass pc;
    if (c < std::size(kFixed)) {
      const FixedClass& f = kFixed[c];
      pc.name = f.name;
      for (int k = 0; k < 2; ++k) {
        TermFamily fam{f.heads[k], {}};
        for (const char* m : f.modifiers[k]) fam.modifiers.emplace_back(m);
        pc.families.push_back(std::move(fam));
      }
    } else {
      const std::string id = std::to_string(c);
      pc.name = "类" + id;
      for (int k = 0; k < 2; ++k) {
        TermFamily fam{"类" + id + "头" + std::to_string(k), {}};
        for (int m = 0; m < 3; ++m)
          fam.modifiers.push_back("类" + id + "修" + std::to_string(k) + std::to_string(m));
        pc.families.push_back(std::move(fam));
      }
    }
    out.push_back(std::move(pc));
  }
  return out;
}

SyntheticCorpus generate_synthetic_corpus(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.classes == 0) throw InvalidArgument("generator: classes must be positive");
  if (spec.docs_per_class == 0 || spec.sentences_per_doc == 0)
    throw InvalidArgument("generator: documents and sentences per document must be positive");
  if (spec.companies_per_class == 0)
    throw InvalidArgument("generator: companies_per_class must be positive");
  if (!(spec.family_focus >= 0.0 && spec.family_focus <= 1.0) ||
      !(spec.cross_class_rate >= 0.0 && spec.cross_class_rate <= 1.0))
    throw InvalidArgument("generator: rates must lie in [0, 1]");

  SyntheticCorpus out;
  out.classes = planted_classes(spec.classes);
  out.stopwords = kStopwords;
  Rng rng(seed);

  auto pick_from = [&](const TermFamily& fam) {
    return Pick{fam.modifiers[rng.below(fam.modifiers.size())], fam.head};
  };
  auto draw = [&](std::size_t cls, std::size_t family) {
    if (spec.classes > 1 && rng.unit() < spec.cross_class_rate) {
      const std::size_t c = (cls + 1 + rng.below(spec.classes - 1)) % spec.classes;
      return pick_from(out.classes[c].families[rng.below(out.classes[c].families.size())]);
    }
    return pick_from(out.classes[cls].families[family]);
  };

  // Bridge documents are spread evenly over each class's index range.
  const auto bridges = static_cast<std::size_t>(
      std::lround((1.0 - spec.family_focus) * static_cast<double>(spec.docs_per_class)));
  auto is_bridge = [&](std::size_t d) {
    return (d + 1) * bridges / spec.docs_per_class > d * bridges / spec.docs_per_class;
  };

  std::vector<AnnotatedDocument> docs;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const std::size_t nf = out.classes[c].families.size();
    for (std::size_t d = 0; d < spec.docs_per_class; ++d) {
      AnnotatedDocument doc;
      char id[32];
      std::snprintf(id, sizeof id, "D%02zu%04zu", c, d);
      doc.doc_id = id;
      std::snprintf(id, sizeof id, "C%02zu%03zu", c, d % spec.companies_per_class);
      doc.company_id = id;
      doc.industry_class = out.classes[c].name;
      doc.year = spec.first_year + static_cast<int>(d / spec.companies_per_class);
      const std::size_t f = d % nf;
      const bool bridge = nf > 1 && is_bridge(d);
      for (std::size_t s = 0; s < spec.sentences_per_doc; ++s) {
        if (bridge && s + 1 == spec.sentences_per_doc) {
          const Pick t = pick_from(out.classes[c].families[f]);
          doc.sentences.push_back(template_b(t, pick_from(out.classes[c].families[(f + 1) % nf])));
          continue;
        }
        switch (rng.below(4)) {
          case 0: doc.sentences.push_back(template_a(draw(c, f))); break;
          case 1: {
            const Pick t = draw(c, f);
            Pick u = draw(c, f);
            // Avoid "X 和 X"; one redraw keeps the stream deterministic.
            if (u.modifier == t.modifier) u = draw(c, f);
            doc.sentences.push_back(template_b(t, u));
            break;
          }
          case 2: doc.sentences.push_back(template_c(draw(c, f))); break;
          default: doc.sentences.push_back(template_d(draw(c, f))); break;
        }
      }
      docs.push_back(std::move(doc));
    }
  }
  out.corpus = Corpus(std::move(docs));
  return out;
}

void write_stopwords(std::ostream& out, const std::set<std::string>& stopwords) {
  out << "# generic vocabulary of the synthetic corpus\n";
  for (const std::string& w : stopwords) out << w << '\n';
}

}  // namespace taxoforge::pipeline
