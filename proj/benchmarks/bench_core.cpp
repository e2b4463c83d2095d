/* Copyright 2026 The Ghostpatch Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Microbenchmarks for the per-query hot paths of an attack.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/oracle.hpp"
#include "ghostpatch/projection.hpp"
#include "ghostpatch/rng.hpp"
#include "ghostpatch/selection.hpp"
#include "ghostpatch/synth.hpp"

namespace {

using namespace ghostpatch;

void BM_MockDetect(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  MockDetector det(MockDetectorConfig::defaults());
  const ImageTensor img =
      synthetic_collage(1, det.config().templates, size, size, size / 32).image;
  for (auto _ : state) benchmark::DoNotOptimize(det.forward(img));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MockDetect)->Arg(160)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

Perturbation random_perturbation(Rng& rng, int size) {
  std::vector<std::int16_t> data(static_cast<std::size_t>(size) * size * 3);
  for (auto& v : data) v = static_cast<std::int16_t>(rng.between(-255, 255));
  return {size, size, std::move(data)};
}

void BM_Project(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  Rng rng(2);
  const Perturbation xp = random_perturbation(rng, size);
  ProjectionParams params;
  for (auto _ : state) benchmark::DoNotOptimize(project(xp, 16, params, rng));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(xp.size()));
}
BENCHMARK(BM_Project)->Arg(64)->Arg(640)->Unit(benchmark::kMicrosecond);

std::vector<Detection> random_detections(Rng& rng, std::size_t n, int extent) {
  std::vector<Detection> dets(n);
  for (auto& d : dets) {
    const int w = rng.between(8, 96), h = rng.between(8, 96);
    const int x0 = rng.between(0, extent - w), y0 = rng.between(0, extent - h);
    d.box = {x0, y0, x0 + w, y0 + h};
    d.label = "t" + std::to_string(rng.between(0, 19));
    d.score = rng.uniform();
  }
  return dets;
}

void BM_Nms(benchmark::State& state) {
  Rng rng(3);
  const auto dets = random_detections(rng, static_cast<std::size_t>(state.range(0)), 640);
  for (auto _ : state) benchmark::DoNotOptimize(nms(dets, 0.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Nms)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_CellCounts(benchmark::State& state) {
  Rng rng(4);
  const auto dets = random_detections(rng, static_cast<std::size_t>(state.range(0)), 640);
  const Grid grid = make_grid(640, 640, 32);
  for (auto _ : state) benchmark::DoNotOptimize(cell_counts(dets, grid));
}
BENCHMARK(BM_CellCounts)->Arg(100)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
