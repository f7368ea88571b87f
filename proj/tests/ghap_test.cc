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

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "taxoforge/error.h"
#include "taxoforge/ghap.h"
#include "test_util.h"

namespace taxoforge {
namespace {

using testing::random_symmetric;
using testing::uniform;

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  return m;
}

TEST(Preferences, MedianAndMinimum) {
  const Matrix m = from_rows({{1, 0.1, 0.2}, {0.1, 1, 0.3}, {0.2, 0.3, 1}});
  EXPECT_EQ(init_preferences(m, PreferenceStrategy::kMedian, 1.0), std::vector<double>(3, 0.2));
  EXPECT_EQ(init_preferences(m, PreferenceStrategy::kMinimum, 1.0), std::vector<double>(3, 0.1));
  EXPECT_DOUBLE_EQ(init_preferences(m, PreferenceStrategy::kMedian, 2.5)[1], 0.5);
  Matrix flat(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) flat(i, j) = i == j ? 1.0 : 0.35;
  EXPECT_EQ(init_preferences(flat, PreferenceStrategy::kMedian, 3.0), std::vector<double>(4, 3.0 * 0.35));
  EXPECT_THROW(init_preferences(Matrix(0, 0), PreferenceStrategy::kMedian, 1.0), InvalidArgument);
}

struct Messages {
  Matrix r, a;
};

// One sweep written out cell by cell: responsibilities first, then
// availabilities from the new responsibilities, both damped.
Messages oracle_sweep(const Matrix& s_in, const Messages& old, const std::vector<double>& c,
                      double lambda, PreferencePlacement placement, AvailabilitySum sum) {
  const std::size_t n = c.size();
  Matrix s = s_in;
  if (placement != PreferencePlacement::kAvailability)
    for (std::size_t i = 0; i < n; ++i) s(i, i) = c[i];
  const bool c_in_a = placement != PreferencePlacement::kSimilarity;
  Messages out{Matrix(n, n), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) m = std::max(m, old.a(i, k) + s(i, k));
      const double fresh = n == 1 ? s(i, j) : s(i, j) - m;
      out.r(i, j) = lambda * old.r(i, j) + (1 - lambda) * fresh;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double fresh = c_in_a ? c[j] : 0.0;
      if (i == j) {
        for (std::size_t k = 0; k < n; ++k)
          if (k != i) fresh += std::max(0.0, out.r(k, i));
      } else {
        fresh += out.r(j, j);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          fresh += std::max(0.0, sum == AvailabilitySum::kExemplarColumn ? out.r(k, j) : out.r(k, i));
        }
        fresh = std::min(0.0, fresh);
      }
      out.a(i, j) = lambda * old.a(i, j) + (1 - lambda) * fresh;
    }
  return out;
}

TEST(ApIterate, FivePointSweepsMatchHandEvaluation) {
  const Matrix s = from_rows({{0, 0.9, 0.2, 0.1, 0.3},
                              {0.9, 0, 0.4, 0.2, 0.1},
                              {0.2, 0.4, 0, 0.8, 0.7},
                              {0.1, 0.2, 0.8, 0, 0.6},
                              {0.3, 0.1, 0.7, 0.6, 0}});
  const std::vector<double> c{0.25, 0.3, 0.2, 0.35, 0.1};
  for (auto placement : {PreferencePlacement::kSimilarity, PreferencePlacement::kAvailability,
                         PreferencePlacement::kBoth})
    for (auto sum : {AvailabilitySum::kExemplarColumn, AvailabilitySum::kPointColumn})
      for (double lambda : {0.0, 0.5}) {
        APConfig cfg;
        cfg.placement = placement;
        cfg.availability_sum = sum;
        APState st = make_ap_state(s, c, cfg);
        st.damping = lambda;  // one undamped sweep is allowed here
        Messages ref{Matrix(5, 5), Matrix(5, 5)};
        for (int sweep = 0; sweep < 3; ++sweep) {
          ref = oracle_sweep(s, ref, c, lambda, placement, sum);
          ap_iterate(st);
          for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
              ASSERT_NEAR(st.r(i, j), ref.r(i, j), 1e-12) << sweep << " r " << i << j;
              ASSERT_NEAR(st.a(i, j), ref.a(i, j), 1e-12) << sweep << " a " << i << j;
            }
        }
        EXPECT_EQ(st.iteration, 3u);
      }
}

TEST(ApIterate, DiagonalCarriesPreferences) {
  std::mt19937_64 rng(1);
  const Matrix s = random_symmetric(rng, 6);
  const std::vector<double> c(6, 0.42);
  const APState st = make_ap_state(s, c, {});
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(st.s(i, i), 0.42);
}

TEST(ApIterate, SinglePointBecomesExemplar) {
  APState st = make_ap_state(from_rows({{0.7}}), {0.7}, {});
  ap_iterate(st);
  EXPECT_EQ(extract_exemplars(st), std::vector<bool>{true});
  const ClusterResult r = cluster_layer(from_rows({{0.7}}));
  EXPECT_EQ(r.exemplars, std::vector<std::size_t>{0});
  EXPECT_EQ(r.assignment, std::vector<std::size_t>{0});
}

TEST(ApIterate, FullDampingFreezesState) {
  std::mt19937_64 rng(2);
  const Matrix s = random_symmetric(rng, 5);
  APState st = make_ap_state(s, init_preferences(s, PreferenceStrategy::kMedian, 1.0), {});
  for (int i = 0; i < 4; ++i) ap_iterate(st);
  const Matrix a = st.a, r = st.r;
  st.damping = 1.0;
  ap_iterate(st);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), st.a.data().begin()));
  EXPECT_TRUE(std::equal(r.data().begin(), r.data().end(), st.r.data().begin()));
}

TEST(ApIterate, NonFiniteMessagesRaise) {
  Matrix s = from_rows({{0, 0.5}, {0.5, 0}});
  s(0, 1) = std::numeric_limits<double>::infinity();
  APState st = make_ap_state(s, {0.1, 0.1}, {});
  try {
    ap_iterate(st);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find('('), std::string::npos);
  }
}

TEST(ApIterate, MessagesStayFiniteOverLongRuns) {
  std::mt19937_64 rng(3);
  for (double lambda : {0.5, 0.75, 0.99}) {
    const Matrix s = random_symmetric(rng, 10, 0.0);
    APConfig cfg;
    cfg.damping = lambda;
    APState st = make_ap_state(s, init_preferences(s, PreferenceStrategy::kMedian, 1.0), cfg);
    for (int k = 0; k < 10000; ++k) ap_iterate(st);
    for (double v : st.a.data()) ASSERT_TRUE(std::isfinite(v));
    for (double v : st.r.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(ExtractExemplars, ThresholdAndFallback) {
  APState st = make_ap_state(Matrix(3, 3), {0, 0, 0}, {});
  st.a(0, 0) = 0.3, st.r(0, 0) = 0.2;
  st.a(1, 1) = -0.1, st.r(1, 1) = -0.1;
  st.a(2, 2) = 0.0, st.r(2, 2) = 0.1;
  EXPECT_EQ(extract_exemplars(st), (std::vector<bool>{true, false, true}));
  st.a(0, 0) = -1.0, st.r(0, 0) = -1.0;
  st.a(2, 2) = -0.05, st.r(2, 2) = -0.05;
  EXPECT_EQ(extract_exemplars(st), (std::vector<bool>{false, false, true}));
  EXPECT_EQ(exemplar_indices({true, false, true, true}), (std::vector<std::size_t>{0, 2, 3}));
}

TEST(AssignMembers, ArgmaxWithLowestIndexTies) {
  std::mt19937_64 rng(4);
  const Matrix s = random_symmetric(rng, 9);
  const std::vector<std::size_t> ex{1, 4, 6};
  const auto got = assign_members(s, ex);
  for (std::size_t i = 0; i < 9; ++i) {
    if (i == 1 || i == 4 || i == 6) {
      EXPECT_EQ(got[i], i);
      continue;
    }
    std::size_t best = 1;
    for (std::size_t e : {4u, 6u})
      if (s(i, e) > s(i, best)) best = e;
    EXPECT_EQ(got[i], best);
  }
  Matrix tie(9, 9);
  tie(0, 2) = tie(0, 7) = 0.5;
  const std::vector<std::size_t> two{7, 2};
  EXPECT_EQ(assign_members(tie, two)[0], 2u);
  const std::vector<std::size_t> one{5};
  EXPECT_EQ(assign_members(s, one), std::vector<std::size_t>(9, 5));
  EXPECT_THROW(assign_members(s, std::vector<std::size_t>{}), InvalidArgument);
}

TEST(NetSimilarity, PreferenceShiftScalesWithExemplarCount) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const Matrix s = random_symmetric(rng, n);
    std::vector<double> c = init_preferences(s, PreferenceStrategy::kMedian, 1.0);
    const oracle::ExemplarOptimum opt = oracle::best_exemplar_subset(s, c);
    const auto assignment = assign_members(s, opt.exemplars);
    EXPECT_NEAR(net_similarity(s, c, opt.exemplars, assignment), opt.value, 1e-12);
    const double shift = uniform(rng, -1, 1);
    for (double& v : c) v += shift;
    EXPECT_NEAR(net_similarity(s, c, opt.exemplars, assignment),
                opt.value + shift * static_cast<double>(opt.exemplars.size()), 1e-12);
  }
}

// Blob members have similarity 0.9 to their exemplar and 0.85 among
// themselves; cross-blob pairs are 0.1.
Matrix two_blobs(std::mt19937_64& rng, std::vector<std::size_t>& perm,
                 std::vector<std::size_t>& planted) {
  perm.resize(12);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  auto blob = [](std::size_t i) { return i / 6; };
  auto is_ex = [](std::size_t i) { return i % 6 == 0; };
  Matrix s(12, 12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      double v = 1.0;
      if (i != j) {
        if (blob(i) != blob(j)) v = 0.1;
        else v = is_ex(i) || is_ex(j) ? 0.9 : 0.85;
      }
      s(perm[i], perm[j]) = v;
    }
  planted = {std::min(perm[0], perm[6]), std::max(perm[0], perm[6])};
  return s;
}

TEST(ClusterLayer, RecoversPlantedBlobExemplars) {
  std::mt19937_64 rng(6);
  for (int seed = 0; seed < 20; ++seed) {
    std::vector<std::size_t> perm, planted;
    const Matrix s = two_blobs(rng, perm, planted);
    const ClusterResult r = cluster_layer(s);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.exemplars, planted) << "seed " << seed;
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(r.assignment[perm[i]], perm[i < 6 ? 0 : 6]);
  }
}

TEST(ClusterLayer, NearOptimalOnSmallRandomInstances) {
  std::mt19937_64 rng(7);
  int below = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const Matrix s = random_symmetric(rng, n);
    const ClusterResult r = cluster_layer(s);
    const oracle::ExemplarOptimum opt = oracle::best_exemplar_subset(s, r.preferences);
    EXPECT_LE(r.net_similarity, opt.value + 1e-12);
    if (r.net_similarity < 0.95 * opt.value) ++below;
  }
  // Affinity propagation is a heuristic; a small number of misses is
  // expected on unstructured inputs. See the acceptance check for the gate.
  EXPECT_LE(below, 5);
}

TEST(ClusterLayer, ResultInvariants) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 15;
    const Matrix s = random_symmetric(rng, n);
    const ClusterResult r = cluster_layer(s);
    ASSERT_GE(r.exemplars.size(), 1u);
    ASSERT_LE(r.exemplars.size(), n);
    ASSERT_TRUE(std::is_sorted(r.exemplars.begin(), r.exemplars.end()));
    for (std::size_t e : r.exemplars) EXPECT_EQ(r.assignment[e], e);
    for (std::size_t a : r.assignment)
      EXPECT_TRUE(std::binary_search(r.exemplars.begin(), r.exemplars.end(), a));
    EXPECT_NEAR(r.net_similarity, net_similarity(s, r.preferences, r.exemplars, r.assignment), 0.0);
  }
}

TEST(ClusterLayer, Deterministic) {
  std::mt19937_64 rng(9);
  const Matrix s = random_symmetric(rng, 25);
  const ClusterResult a = cluster_layer(s), b = cluster_layer(s);
  EXPECT_EQ(a.exemplars, b.exemplars);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.net_similarity, b.net_similarity);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(ClusterLayer, PreferenceScaleSweepIsMonotone) {
  // Twelve points on a line with Gaussian similarity.
  const std::vector<double> x{0.0, 0.3, 0.5, 1.9, 2.1, 2.6, 4.0, 4.2, 5.5, 5.6, 5.9, 7.5};
  Matrix s(12, 12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) s(i, j) = std::exp(-(x[i] - x[j]) * (x[i] - x[j]) / 2.0);
  std::size_t last = 0;
  for (double scale = 0.25; scale <= 6.0; scale += 0.25) {
    APConfig cfg;
    cfg.preference_scale = scale;
    const std::size_t k = cluster_layer(s, cfg).exemplars.size();
    EXPECT_GE(k, last) << "scale " << scale;
    last = k;
  }
  EXPECT_GT(last, 2u);
}

TEST(ClusterLayer, ConfigValidation) {
  const Matrix s = from_rows({{1, 0.5}, {0.5, 1}});
  APConfig cfg;
  cfg.damping = 1.0;
  EXPECT_THROW(cluster_layer(s, cfg), InvalidArgument);
  cfg = {};
  cfg.damping = 0.3;
  EXPECT_THROW(cluster_layer(s, cfg), InvalidArgument);
  cfg = {};
  cfg.stable_window = 0;
  EXPECT_THROW(cluster_layer(s, cfg), InvalidArgument);
  EXPECT_THROW(cluster_layer(Matrix(0, 0)), InvalidArgument);
}

TEST(ClusterLayer, BudgetExhaustionIsFlagged) {
  std::mt19937_64 rng(10);
  APConfig cfg;
  cfg.max_iterations = 3;
  const ClusterResult r = cluster_layer(random_symmetric(rng, 10), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_GE(r.exemplars.size(), 1u);
}

// 18 terms: 3 top blocks, each of 2 sub-blocks of 3 terms. Sub-block
// exemplars are the first term of each sub-block.
Matrix nested_blocks(const std::vector<std::size_t>& perm) {
  auto top = [](std::size_t i) { return i / 6; };
  auto sub = [](std::size_t i) { return i / 3; };
  auto is_ex = [](std::size_t i) { return i % 3 == 0; };
  Matrix s(18, 18);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t j = 0; j < 18; ++j) {
      double v = 1.0;
      if (i == j) v = 1.0;
      else if (sub(i) == sub(j)) v = is_ex(i) || is_ex(j) ? 0.9 : 0.85;
      else if (top(i) == top(j)) v = is_ex(i) && is_ex(j) ? 0.5 : 0.3;
      else v = 0.0;
      s(perm[i], perm[j]) = v;
    }
  return s;
}

TEST(BuildHierarchy, RecoversNestedBlocks) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> perm(18);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (trial > 0) std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> names(18);
    for (std::size_t i = 0; i < 18; ++i) names[i] = "t" + std::to_string(i);
    const Taxonomy tax = build_hierarchy(nested_blocks(perm), names);
    validate_taxonomy(tax);
    ASSERT_EQ(tax.num_levels(), 3u);
    for (std::size_t i = 0; i < 18; ++i) {
      const std::size_t sub_ex = perm[i - i % 3];
      const std::size_t top_ex = std::min(perm[(i / 6) * 6], perm[(i / 6) * 6 + 3]);
      EXPECT_EQ(tax.parents[0][perm[i]], sub_ex) << "trial " << trial << " term " << i;
      if (i % 3 == 0) {
        const auto& l1 = tax.levels[1];
        const auto pos = std::lower_bound(l1.begin(), l1.end(), perm[i]) - l1.begin();
        ASSERT_LT(static_cast<std::size_t>(pos), l1.size());
        EXPECT_EQ(tax.parents[1][static_cast<std::size_t>(pos)], top_ex) << "trial " << trial;
      }
    }
    EXPECT_EQ(tax.levels[1].size(), 6u);
    EXPECT_EQ(tax.roots().size(), 3u);
    EXPECT_TRUE(tax.converged[0] && tax.converged[1]);
  }
}

TEST(BuildHierarchy, SingleTermAndInvariants) {
  const Taxonomy one = build_hierarchy(from_rows({{1.0}}), {"solo"});
  EXPECT_EQ(one.levels, (std::vector<std::vector<std::size_t>>{{0}, {0}, {0}}));
  EXPECT_EQ(one.parents, (std::vector<std::vector<std::size_t>>{{0}, {0}}));
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial * 2;
    std::vector<std::string> names(n, "x");
    const Taxonomy tax = build_hierarchy(random_symmetric(rng, n), names);
    EXPECT_NO_THROW(validate_taxonomy(tax));
    for (std::size_t k = 1; k < tax.num_levels(); ++k)
      EXPECT_LE(tax.levels[k].size(), tax.levels[k - 1].size());
  }
  EXPECT_THROW(build_hierarchy(from_rows({{1.0}}), {}), InvalidArgument);
}

TEST(BuildHierarchy, ChildrenAndJsonRoundTrip) {
  std::vector<std::size_t> perm(18);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::string> names(18);
  for (std::size_t i = 0; i < 18; ++i) names[i] = "term" + std::to_string(i);
  const Taxonomy tax = build_hierarchy(nested_blocks(perm), names);
  EXPECT_EQ(tax.children(0, 3), (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(tax.children(1, 0), (std::vector<std::size_t>{0, 3}));
  std::stringstream buf;
  write_hierarchy_json(buf, tax);
  const Taxonomy back = read_hierarchy_json(buf);
  EXPECT_TRUE(back == tax);
  EXPECT_EQ(back.converged, tax.converged);

  Taxonomy broken = tax;
  broken.parents[0][1] = 1;  // not an exemplar
  EXPECT_THROW(validate_taxonomy(broken), InvalidArgument);
  std::stringstream bad;
  write_hierarchy_json(bad, broken);
  EXPECT_THROW(read_hierarchy_json(bad), InvalidArgument);
  std::istringstream junk("[1,2");
  EXPECT_THROW(read_hierarchy_json(junk), FormatError);
}

}  // namespace
}  // namespace taxoforge
