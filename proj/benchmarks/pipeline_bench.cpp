/*
 * Copyright 2026 The cxrprep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cxrprep/clahe.hpp"
#include "cxrprep/image.hpp"
#include "cxrprep/mask.hpp"
#include "cxrprep/metrics.hpp"
#include "cxrprep/rng.hpp"

namespace {

using cxrprep::GrayImage;
using cxrprep::SeededRng;

GrayImage noise_image(int side, int bit_depth) {
  SeededRng rng(1, 0);
  GrayImage img(side, side, bit_depth);
  const std::uint64_t top = (1ULL << bit_depth);
  for (int r = 0; r < side; ++r) {
    for (auto& p : img.row(r)) p = static_cast<std::uint16_t>(rng.next() % top);
  }
  return img;
}

void BM_Clahe(benchmark::State& state) {
  const GrayImage img = noise_image(static_cast<int>(state.range(0)), 8);
  const auto workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cxrprep::clahe::apply_clahe(img, {}, workers));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Clahe)->Args({1024, 1})->Args({1024, 4})->Args({2048, 1})->Unit(benchmark::kMillisecond);

void BM_Downscale(benchmark::State& state) {
  const GrayImage img = noise_image(1024, 8);
  for (auto _ : state) benchmark::DoNotOptimize(cxrprep::downscale(img, 224, 224));
}
BENCHMARK(BM_Downscale)->Unit(benchmark::kMillisecond);

void BM_Dilate(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  cxrprep::mask::BinaryMask mask(side, side);
  for (int r = side / 4; r < 3 * side / 4; ++r) {
    for (int c = side / 5; c < side / 2 - 10; ++c) mask.set(r, c);
    for (int c = side / 2 + 10; c < 4 * side / 5; ++c) mask.set(r, c);
  }
  const int radius = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cxrprep::mask::dilate(mask, radius));
}
BENCHMARK(BM_Dilate)->Args({1024, 60})->Args({224, 13})->Unit(benchmark::kMillisecond);

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SeededRng rng(2, 0);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = rng.uniform() < 0.3 ? 1 : 0;
    scores[i] = rng.uniform() + 0.2 * labels[i];
  }
  labels[0] = 1;
  labels[1] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cxrprep::metrics::auroc(scores, labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->Range(1 << 10, 1 << 20);

}  // namespace

BENCHMARK_MAIN();
