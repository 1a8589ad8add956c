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

#include "kernels_detail.hpp"

namespace supercone::kernels::serial {

NeighborLists KNearest(const Matrix& queries, const Matrix& refs,
                       std::size_t k) {
  detail::CheckKNearest(queries, refs, k);
  NeighborLists out(queries.rows);
  std::vector<Neighbor> heap;
  heap.reserve(k);
  for (std::size_t q = 0; q < queries.rows; ++q) {
    out[q] = detail::SelectNearest(queries.row(q).data(), refs, k, heap);
  }
  return out;
}

Histograms FeatureHistograms(const BinnedMatrix& x,
                             std::span<const std::uint32_t> rows,
                             const Matrix& row_stats) {
  Histograms h{row_stats.cols, x.cols,
               std::vector<double>(x.cols * 256 * row_stats.cols)};
  for (std::size_t f = 0; f < x.cols; ++f) {
    detail::FeatureHistogram(x, f, rows, row_stats,
                             h.sums.data() + f * 256 * row_stats.cols);
  }
  return h;
}

Matrix AffineRows(const Matrix& x, std::span<const double> weight,
                  std::span<const double> bias, std::size_t out_dim) {
  detail::CheckAffine(x, weight, bias, out_dim);
  Matrix out(x.rows, out_dim);
  for (std::size_t i = 0; i < x.rows; ++i) {
    detail::AffineRow(x.row(i).data(), x.cols, weight.data(), bias.data(),
                      out_dim, out.row(i).data());
  }
  return out;
}

}  // namespace supercone::kernels::serial
