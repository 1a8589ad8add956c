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

#include <gtest/gtest.h>

#include <cmath>

#include "nn_oracle.hpp"
#include "supercone/neuralcore.hpp"

namespace supercone {
namespace {

using testing::CheckGradients;
using testing::NamedNet;
using testing::RandomGradCase;

MetaStructure SmallStructure() {
  MetaStructure s;
  s.input_dim = 4;
  s.num_classes = 3;
  s.num_blocks = 2;
  s.neural = {2, 2, 5, 1, 4, 2, 6};
  return s;
}

TEST(Softmax, StableForLargeLogits) {
  const ProbVector p = Softmax(std::vector<double>{1000, 1001, 999});
  const double z = std::exp(-1.0) + 1 + std::exp(-2.0);
  EXPECT_NEAR(p[0], std::exp(-1.0) / z, 1e-15);
  EXPECT_NEAR(p[1], 1 / z, 1e-15);
  EXPECT_TRUE(IsProbVector(p));
}

TEST(MetaParams, CountMatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = RandomGradCase(seed);
    EXPECT_EQ(c.params.ParameterCount(),
              MetaParams::ExpectedParameterCount(c.params.structure()));
  }
  // Default config, |C| = 123, |Y| = 2, 7 blocks: counted by hand.
  MetaStructure s;
  s.input_dim = 123;
  s.num_blocks = 7;
  const std::size_t comp = 123 * 32 + 32 + 3 * 3 * (32 * 32 + 32) +
                           (123 * 32 + 32 + 2 * (32 * 32 + 32)) + 32 * 3 + 3 + 32 * 2 + 2;
  const std::size_t comb = 123 * 32 + 32 + 3 * (32 * 32 + 32) + 32 * 8 + 8;
  EXPECT_EQ(MetaParams::Create(s, 1).ParameterCount(), comp + comb);
}

TEST(MetaParams, ZeroInitGivesUniformOutputs) {
  const MetaParams p = MetaParams::Create(SmallStructure(), 3, InitMode::kZero);
  const std::vector<double> x{1, 2, 3, 4};
  for (double v : ForwardComplementary(p, x)) EXPECT_DOUBLE_EQ(v, 1.0 / 3);
  for (double v : ForwardComb(p, x)) EXPECT_DOUBLE_EQ(v, 1.0 / 3);
}

TEST(MetaParams, FanInInitIsSeeded) {
  const auto a = MetaParams::Create(SmallStructure(), 5);
  const auto b = MetaParams::Create(SmallStructure(), 5);
  const auto c = MetaParams::Create(SmallStructure(), 6);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
  for (const auto& slot : a.slots()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(slot.rows + slot.cols));
    for (double v : a.tensor(&slot - a.slots().data())) {
      if (slot.cols == 1) {
        EXPECT_EQ(v, 0.0) << slot.name;
      } else {
        EXPECT_LE(std::fabs(v), limit) << slot.name;
      }
    }
  }
}

TEST(MetaParams, ExportImportRoundTrip) {
  auto c = RandomGradCase(11);
  const MetaParams back = MetaParams::Import(c.params.structure(), c.params.Export());
  EXPECT_EQ(back.values(), c.params.values());
  EXPECT_EQ(back.input_offset(), c.params.input_offset());
  EXPECT_EQ(back.input_scale(), c.params.input_scale());
  auto arrays = c.params.Export();
  arrays.pop_back();
  EXPECT_THROW(MetaParams::Import(c.params.structure(), arrays), Error);
}

TEST(MetaParams, MinMaxScalerAndClip) {
  MetaStructure s = SmallStructure();
  s.input_dim = 3;
  MetaParams p = MetaParams::Create(s, 0);
  Matrix m(3, 3);
  m.data = {0, 7, -2, 10, 7, 2, 5, 7, 0};
  p.FitInputScaler(m);
  EXPECT_EQ(p.input_offset(), (std::vector<double>{0, 7, -2}));
  EXPECT_EQ(p.input_scale(), (std::vector<double>{10, 1, 4}));
  std::vector<double> out(3);
  p.ScaleInput(std::vector<double>{5, 100, -102}, out);
  EXPECT_EQ(out, (std::vector<double>{0.5, 5.0, -5.0}));
}

TEST(Forward, MatchesNamedOracle) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    auto c = RandomGradCase(seed);
    const NamedNet net(c.params);
    const std::size_t d = c.params.structure().input_dim;
    for (std::size_t i = 0; i < c.rows.rows; ++i) {
      const auto row = c.rows.row(i);
      const std::vector<double> r(row.begin(), row.end());
      const std::vector<double> x(r.begin(), r.begin() + d);
      const auto h = ForwardComplementary(c.params, x);
      const auto w = ForwardComb(c.params, x);
      const auto m = ForwardMixture(c.params, r);
      const auto hr = net.Complementary(x);
      const auto wr = net.Comb(x);
      const auto mr = net.Mixture(r);
      for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(h[k], hr[k], 1e-12);
      for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(w[k], wr[k], 1e-12);
      for (std::size_t k = 0; k < m.size(); ++k) EXPECT_NEAR(m[k], mr[k], 1e-12);
      EXPECT_TRUE(IsProbVector(m));
    }
  }
}

TEST(Forward, RenormalizesDriftingBlocks) {
  MetaParams p = MetaParams::Create(SmallStructure(), 4);
  std::vector<double> row{0.1, 0.2, 0.3, 0.4, 2, 2, 4, 0, 0, 0};
  const auto m = ForwardMixture(p, row);
  const auto w = ForwardComb(p, std::vector<double>(row.begin(), row.begin() + 4));
  const auto h = ForwardComplementary(p, std::vector<double>(row.begin(), row.begin() + 4));
  for (std::size_t k = 0; k < 3; ++k) {
    const double b1 = k == 2 ? 0.5 : 0.25;
    EXPECT_NEAR(m[k], w[0] * h[k] + w[1] * b1 + w[2] / 3.0, 1e-15);
  }
  EXPECT_THROW(ForwardMixture(p, std::vector<double>(9, 0.1)), ShapeError);
}

TEST(Loss, IsMeanClampedCrossEntropy) {
  auto c = RandomGradCase(7);
  double ref = 0.0;
  for (std::size_t i = 0; i < c.rows.rows; ++i) {
    const auto row = c.rows.row(i);
    ref -= std::log(ForwardMixture(c.params, row)[c.labels[i]]);
  }
  ref /= static_cast<double>(c.rows.rows);
  EXPECT_NEAR(ComputeLoss(c.params, c.rows, c.labels), ref, 1e-12);
  EXPECT_NEAR(ComputeLossAndGradients(c.params, c.rows, c.labels).loss, ref, 1e-12);
}

TEST(Gradients, MatchCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    auto c = RandomGradCase(seed);
    const auto r = CheckGradients(c);
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " " << r.worst;
    EXPECT_EQ(r.coordinates, c.params.ParameterCount());
  }
}

TEST(Adam, MatchesHandComputedSteps) {
  std::vector<double> x{1.0, -2.0};
  AdamState st(2);
  const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  const std::vector<double> g1{0.5, -4.0};
  AdamStep(st, x, g1, cfg);
  // First step moves each coordinate by lr * sign(g) (up to epsilon).
  EXPECT_NEAR(x[0], 0.9, 1e-8);
  EXPECT_NEAR(x[1], -1.9, 1e-8);
  const std::vector<double> g2{0.25, 0.0};
  AdamStep(st, x, g2, cfg);
  const double m = (0.9 * 0.05 + 0.1 * 0.25) / (1 - 0.81);
  const double v = (0.999 * 0.001 * 0.25 + 0.001 * 0.0625) / (1 - 0.999 * 0.999);
  const double x1 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(x[0], x1 - 0.1 * m / (std::sqrt(v) + 1e-8), 1e-12);
  EXPECT_EQ(st.step, 2);
}

TEST(Adam, DescendsTheMixtureLoss) {
  auto c = RandomGradCase(21);
  const double before = ComputeLoss(c.params, c.rows, c.labels);
  AdamState st(c.params.ParameterCount());
  for (int i = 0; i < 200; ++i) {
    const auto lg = ComputeLossAndGradients(c.params, c.rows, c.labels);
    AdamStep(st, c.params.values(), lg.gradients, AdamConfig{1e-2});
  }
  EXPECT_LT(ComputeLoss(c.params, c.rows, c.labels), 0.5 * before);
}

}  // namespace
}  // namespace supercone
