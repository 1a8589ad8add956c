/*
 * Copyright 2026 The SuperCone Authors.
 *
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

// Serial reference kernels against their OpenMP versions.
//
//   kernel_bench --benchmark_filter=KNearest

#include <benchmark/benchmark.h>

#include <numeric>

#include "supercone/kernels.hpp"
#include "supercone/rng.hpp"

namespace supercone {
namespace {

Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.Normal();
  return m;
}

kernels::BinnedMatrix RandomBins(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  kernels::BinnedMatrix b;
  b.rows = rows;
  b.cols = cols;
  b.bins.resize(rows * cols);
  for (auto& v : b.bins) v = static_cast<std::uint8_t>(rng.UniformInt(32));
  b.num_bins.assign(cols, 32);
  return b;
}

template <bool kParallel>
void BM_KNearest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix refs = RandomMatrix(n, 64, 1);
  const Matrix queries = RandomMatrix(256, 64, 2);
  for (auto _ : state) {
    auto r = kParallel ? kernels::omp::KNearest(queries, refs, 15)
                       : kernels::serial::KNearest(queries, refs, 15);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * queries.rows);
}

template <bool kParallel>
void BM_FeatureHistograms(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = RandomBins(n, 123, 3);
  const Matrix stats = RandomMatrix(n, 2, 4);
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  for (auto _ : state) {
    auto h = kParallel ? kernels::omp::FeatureHistograms(x, rows, stats)
                       : kernels::serial::FeatureHistograms(x, rows, stats);
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool kParallel>
void BM_AffineRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = RandomMatrix(n, 123, 5);
  const Matrix w = RandomMatrix(32, 123, 6);
  const std::vector<double> b(32, 0.1);
  for (auto _ : state) {
    auto y = kParallel ? kernels::omp::AffineRows(x, w.data, b, 32)
                       : kernels::serial::AffineRows(x, w.data, b, 32);
    benchmark::DoNotOptimize(y);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(BM_KNearest<false>)->Name("KNearest/serial")->Arg(2000)->Arg(8000);
BENCHMARK(BM_KNearest<true>)->Name("KNearest/omp")->Arg(2000)->Arg(8000);
BENCHMARK(BM_FeatureHistograms<false>)->Name("FeatureHistograms/serial")->Arg(32000);
BENCHMARK(BM_FeatureHistograms<true>)->Name("FeatureHistograms/omp")->Arg(32000);
BENCHMARK(BM_AffineRows<false>)->Name("AffineRows/serial")->Arg(32000);
BENCHMARK(BM_AffineRows<true>)->Name("AffineRows/omp")->Arg(32000);

}  // namespace
}  // namespace supercone

BENCHMARK_MAIN();
