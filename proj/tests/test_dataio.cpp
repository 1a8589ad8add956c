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

#include <set>
#include <sstream>

#include "supercone/dataio.hpp"
#include "test_util.hpp"

namespace supercone {
namespace {

LabelSpace Binary() { return LabelSpace({"-1", "+1"}, LabelKind::kBinary); }

Dataset Parse(const std::string& text, const LabelSpace& labels,
              std::optional<std::size_t> vocab = std::nullopt) {
  std::istringstream in(text);
  ParseOptions options;
  options.vocab_size = vocab;
  return ParseLibsvm(in, labels, options);
}

TEST(ConceptVector, RejectsUnorderedIndices) {
  EXPECT_THROW(ConceptVector({{3, 1.0}, {2, 1.0}}), Error);
  EXPECT_THROW(ConceptVector({{2, 1.0}, {2, 1.0}}), Error);
  EXPECT_NO_THROW(ConceptVector({{0, 1.0}, {5, -2.0}}));
}

TEST(ConceptVector, Densify) {
  const ConceptVector c({{1, 2.5}, {3, -1.0}});
  EXPECT_EQ(c.extent(), 4u);
  EXPECT_EQ(c.Densify(5), (std::vector<double>{0, 2.5, 0, -1.0, 0}));
}

TEST(LabelSpace, NumericTokensMatchByValue) {
  const LabelSpace s = Binary();
  EXPECT_EQ(s.Find("1"), 1);
  EXPECT_EQ(s.Find("+1"), 1);
  EXPECT_EQ(s.Find("-1"), 0);
  EXPECT_FALSE(s.Find("2").has_value());
}

TEST(Libsvm, ParsesAndAssignsLineIds) {
  const Dataset d = Parse("+1 1:0.5 3:2\n\n-1 2:1\n", Binary());
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.vocab_size(), 3u);
  EXPECT_EQ(d.instances()[0].label, 1);
  EXPECT_EQ(d.instances()[1].label, 0);
  EXPECT_EQ(d.instances()[0].concepts.entries()[1], (ConceptEntry{2, 2.0}));
  EXPECT_EQ(d.Ids(), (std::vector<InstanceId>{0, 2}));
}

TEST(Libsvm, RejectsBadInput) {
  const LabelSpace s = Binary();
  EXPECT_THROW(Parse("+1 3:1 2:1\n", s), ParseError);    // not increasing
  EXPECT_THROW(Parse("+1 2:1 2:1\n", s), ParseError);    // duplicate
  EXPECT_THROW(Parse("+1 0:1\n", s), ParseError);        // 1-based
  EXPECT_THROW(Parse("+1 a:1\n", s), ParseError);
  EXPECT_THROW(Parse("+1 1:x\n", s), ParseError);
  EXPECT_THROW(Parse("7 1:1\n", s), ParseError);         // unknown label
  EXPECT_THROW(Parse("+1 5:1\n", s, 4), ParseError);     // beyond vocab
}

TEST(Libsvm, ParseErrorCarriesLine) {
  try {
    Parse("+1 1:1\n-1 2:1 1:1\n", Binary());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Libsvm, MissingFileIsNotFound) {
  EXPECT_THROW(ParseLibsvmFile("/nonexistent/x.libsvm", Binary()), NotFoundError);
}

TEST(Libsvm, RoundTripIsLossless) {
  const Dataset d = testing::Gaussian(3, 4, 60, 2.0, 9);
  std::istringstream in(SerializeLibsvm(d));
  ParseOptions options;
  options.vocab_size = d.vocab_size();
  const Dataset back = ParseLibsvm(in, d.label_space(), options);
  EXPECT_EQ(back, d);
}

TEST(Libsvm, InferLabelSpaceSortsNumerically) {
  std::istringstream in("10 1:1\n2 1:1\n-1 1:1\n2 2:1\n");
  const LabelSpace s = InferLabelSpace(in);
  EXPECT_EQ(s.classes, (std::vector<std::string>{"-1", "2", "10"}));
  EXPECT_EQ(s.kind, LabelKind::kMulticlass);
}

TEST(Folds, PartitionIsBalancedAndComplete) {
  for (int v : {2, 3, 5}) {
    const FoldMap f = AssignFolds(103, v, 1, 42);
    std::size_t total = 0;
    for (int k = 1; k <= v; ++k) {
      total += f.FoldSize(k);
      EXPECT_LE(f.FoldSize(k), 103 / v + 1);
      EXPECT_GE(f.FoldSize(k), 103 / v);
    }
    EXPECT_EQ(total, 103u);
  }
}

TEST(Folds, SeededAndLevelSpecific) {
  EXPECT_EQ(AssignFolds(50, 3, 1, 7), AssignFolds(50, 3, 1, 7));
  EXPECT_NE(AssignFolds(50, 3, 1, 7).assignment(), AssignFolds(50, 3, 2, 7).assignment());
  EXPECT_NE(AssignFolds(50, 3, 1, 7).assignment(), AssignFolds(50, 3, 1, 8).assignment());
}

TEST(Folds, RejectsDegenerateSettings) {
  EXPECT_THROW(AssignFolds(10, 1, 1, 0), Error);
  EXPECT_THROW(AssignFolds(2, 3, 1, 0), Error);
}

TEST(Folds, ComplementExcludesOwnFold) {
  const Dataset d = testing::Gaussian(2, 2, 30, 1.0, 1);
  const FoldMap f = AssignFolds(d.Ids(), 3, 1, 5);
  for (InstanceId id : d.Ids()) {
    const auto comp = FoldComplement(f, id, d);
    EXPECT_EQ(comp.size(), 30 - f.FoldSize(f.FoldOf(id)));
    for (InstanceId other : comp) EXPECT_NE(f.FoldOf(other), f.FoldOf(id));
  }
}

TEST(Synth, ExactClassBalanceAndSeeding) {
  const Dataset a = testing::Gaussian(3, 3, 99, 2.0, 4);
  std::vector<int> counts(3);
  for (int y : a.Labels()) ++counts[y];
  EXPECT_EQ(counts, (std::vector<int>{33, 33, 33}));
  EXPECT_EQ(a, testing::Gaussian(3, 3, 99, 2.0, 4));
  EXPECT_NE(a, testing::Gaussian(3, 3, 99, 2.0, 5));
}

TEST(Synth, ClassMeansMatchSpec) {
  GaussianMixtureSpec spec;
  spec.num_classes = 2;
  spec.dim = 3;
  spec.n = 20000;
  spec.class_separation = 4.0;
  spec.seed = 3;
  const Dataset d = SynthGaussianMixture(spec);
  const Matrix x = d.Densify();
  for (int c = 0; c < 2; ++c) {
    const auto mean = GaussianMixtureMean(spec, c);
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0;
      for (std::size_t i = c; i < x.rows; i += 2) s += x(i, j);
      EXPECT_NEAR(s / 10000, mean[j], 0.05);
    }
  }
  EXPECT_DOUBLE_EQ(GaussianMixtureMean(spec, 0)[0], -2.0);
  EXPECT_DOUBLE_EQ(GaussianMixtureMean(spec, 1)[0], 2.0);
}

}  // namespace
}  // namespace supercone
