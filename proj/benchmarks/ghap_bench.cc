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

#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "taxoforge/ghap.h"

namespace {

using taxoforge::Matrix;

Matrix random_similarity(std::size_t n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) s(i, j) = s(j, i) = u(rng);
  }
  return s;
}

void BM_ApSweep(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix s = random_similarity(n);
  taxoforge::APState st = taxoforge::make_ap_state(
      s, taxoforge::init_preferences(s, taxoforge::PreferenceStrategy::kMedian, 1.0), {});
  for (auto _ : state) taxoforge::ap_iterate(st);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ApSweep)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_ClusterLayer(benchmark::State& state) {
  const Matrix s = random_similarity(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(taxoforge::cluster_layer(s).net_similarity);
}
BENCHMARK(BM_ClusterLayer)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_BuildHierarchy(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix s = random_similarity(n);
  const std::vector<std::string> names(n, "t");
  for (auto _ : state) benchmark::DoNotOptimize(taxoforge::build_hierarchy(s, names).roots().size());
}
BENCHMARK(BM_BuildHierarchy)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
