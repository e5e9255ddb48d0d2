// Copyright 2026 The popadjust Authors
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


// Serial reference vs the OpenMP engine on the desk grid.

#include <benchmark/benchmark.h>

#include "popadj/simengine.hpp"

namespace {

constexpr std::uint64_t kSeed = 20240601;

void BM_StudySerial(benchmark::State& state) {
  const auto grid = popadj::desk_grid();
  const int reps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(popadj::run_study_serial(grid, reps, kSeed));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()) * reps);
}

void BM_StudyParallel(benchmark::State& state) {
  const auto grid = popadj::desk_grid();
  const int reps = static_cast<int>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(popadj::run_study(grid, reps, kSeed, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()) * reps);
}

void BM_Replicate(benchmark::State& state) {
  const auto grid = popadj::desk_grid();
  const auto& scenario = state.range(0) == 150 ? grid.front() : grid.back();
  int rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(popadj::run_replicate(scenario, ++rep, kSeed));
}

}  // namespace

BENCHMARK(BM_StudySerial)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_StudyParallel)
    ->ArgsProduct({{20}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_Replicate)->Arg(150)->Arg(600)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
