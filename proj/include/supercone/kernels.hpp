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

#pragma once

// Data-parallel inner loops. Every kernel exists twice: an OpenMP version
// used by the library and a straight serial version kept as the reference
// for tests and benchmarks. Both perform the same floating-point operations
// in the same order per output element, so results are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "supercone/common.hpp"

namespace supercone::kernels {

struct Neighbor {
  double sq_distance = 0.0;
  std::uint32_t index = 0;
};

// k nearest rows of `refs` for every row of `queries` under squared
// Euclidean distance, ascending; ties go to the lower reference index.
using NeighborLists = std::vector<std::vector<Neighbor>>;

// Feature matrix quantized to at most 256 bins per feature, stored column
// major so a feature's bins are contiguous.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> bins;  // cols * rows
  std::vector<int> num_bins;       // per feature

  std::span<const std::uint8_t> column(std::size_t f) const {
    return {bins.data() + f * rows, rows};
  }
};

// Per-feature, per-bin sums of a row statistic of width `stat_width`.
// Layout: hist[(feature * 256 + bin) * stat_width + s].
struct Histograms {
  std::size_t stat_width = 0;
  std::size_t cols = 0;
  std::vector<double> sums;

  const double* at(std::size_t feature, std::size_t bin) const {
    return sums.data() + (feature * 256 + bin) * stat_width;
  }
};

namespace serial {
NeighborLists KNearest(const Matrix& queries, const Matrix& refs,
                       std::size_t k);
Histograms FeatureHistograms(const BinnedMatrix& x,
                             std::span<const std::uint32_t> rows,
                             const Matrix& row_stats);
// out(i, :) = W x_i + b for W (out x in, row major).
Matrix AffineRows(const Matrix& x, std::span<const double> weight,
                  std::span<const double> bias, std::size_t out_dim);
}  // namespace serial

namespace omp {
NeighborLists KNearest(const Matrix& queries, const Matrix& refs,
                       std::size_t k);
Histograms FeatureHistograms(const BinnedMatrix& x,
                             std::span<const std::uint32_t> rows,
                             const Matrix& row_stats);
Matrix AffineRows(const Matrix& x, std::span<const double> weight,
                  std::span<const double> bias, std::size_t out_dim);
}  // namespace omp

// Library entry points (OpenMP versions).
using omp::AffineRows;
using omp::FeatureHistograms;
using omp::KNearest;

// Thread count used by the OpenMP kernels; 0 restores the runtime default.
void SetThreadCount(int threads);
int ThreadCount();

}  // namespace supercone::kernels
