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

#include <benchmark/benchmark.h>

#include "taxoforge/smo.h"

namespace {

using taxoforge::Matrix;

// Two overlapping Gaussian blobs in 2-D.
struct Problem {
  Matrix points;
  std::vector<int> y;
  std::vector<double> c;
};

Problem make_problem(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  Problem p{Matrix(n, 2), {}, std::vector<double>(n, 1.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    p.points(i, 0) = label * 1.0 + nd(rng);
    p.points(i, 1) = nd(rng);
    p.y.push_back(label);
  }
  return p;
}

void BM_SmoRbf(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    taxoforge::RbfKernel k(p.points, 0.5);
    auto r = taxoforge::solve_smo(k, p.y, p.c, {});
    benchmark::DoNotOptimize(r.objective);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmoRbf)->RangeMultiplier(2)->Range(128, 2048)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace

BENCHMARK_MAIN();
