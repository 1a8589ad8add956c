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

// Per-element bodies shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cstring>

#include "supercone/kernels.hpp"

namespace supercone::kernels::detail {

inline double SquaredDistance(const double* a, const double* b,
                              std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    for (std::size_t t = 0; t < 4; ++t) {
      const double d = a[j + t] - b[j + t];
      acc[t] += d * d;
    }
  }
  for (; j < n; ++j) {
    const double d = a[j] - b[j];
    acc[0] += d * d;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

inline bool Closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_distance < b.sq_distance ||
         (a.sq_distance == b.sq_distance && a.index < b.index);
}

// Bounded max-heap selection of the k closest references for one query.
inline std::vector<Neighbor> SelectNearest(const double* query,
                                           const Matrix& refs, std::size_t k,
                                           std::vector<Neighbor>& heap) {
  heap.clear();
  for (std::size_t r = 0; r < refs.rows; ++r) {
    const Neighbor cand{
        SquaredDistance(query, refs.data.data() + r * refs.cols, refs.cols),
        static_cast<std::uint32_t>(r)};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), Closer);
    } else if (Closer(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), Closer);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), Closer);
    }
  }
  std::vector<Neighbor> out(heap);
  std::sort(out.begin(), out.end(), Closer);
  return out;
}

inline void FeatureHistogram(const BinnedMatrix& x, std::size_t f,
                             std::span<const std::uint32_t> rows,
                             const Matrix& row_stats, double* hist) {
  const std::size_t w = row_stats.cols;
  std::fill(hist, hist + 256 * w, 0.0);
  const std::uint8_t* col = x.bins.data() + f * x.rows;
  for (const std::uint32_t r : rows) {
    double* slot = hist + static_cast<std::size_t>(col[r]) * w;
    const double* stat = row_stats.data.data() + static_cast<std::size_t>(r) * w;
    for (std::size_t s = 0; s < w; ++s) slot[s] += stat[s];
  }
}

inline void AffineRow(const double* x, std::size_t in_dim, const double* weight,
                      const double* bias, std::size_t out_dim, double* out) {
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double* w = weight + o * in_dim;
    double acc = bias[o];
    for (std::size_t i = 0; i < in_dim; ++i) acc += w[i] * x[i];
    out[o] = acc;
  }
}

inline void CheckAffine(const Matrix& x, std::span<const double> weight,
                        std::span<const double> bias, std::size_t out_dim) {
  if (weight.size() != out_dim * x.cols || bias.size() != out_dim) {
    throw ShapeError("AffineRows: parameter shape mismatch");
  }
}

inline void CheckKNearest(const Matrix& queries, const Matrix& refs,
                          std::size_t k) {
  if (queries.cols != refs.cols) throw ShapeError("KNearest: width mismatch");
  if (k == 0 || k > refs.rows) throw ShapeError("KNearest: bad k");
}

}  // namespace supercone::kernels::detail
