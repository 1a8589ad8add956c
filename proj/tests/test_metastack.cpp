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

#include <algorithm>
#include <set>

#include "supercone/kernels.hpp"
#include "supercone/metastack.hpp"
#include "supercone/metrics.hpp"
#include "test_util.hpp"

namespace supercone {
namespace {

using testing::Gaussian;
using testing::Roster;

StackConfig QuickConfig(int K, int V, std::vector<std::vector<ExpertSpec>> roster) {
  StackConfig cfg;
  cfg.K = K;
  cfg.V = V;
  cfg.roster = std::move(roster);
  cfg.neural = {2, 1, 8, 1, 8, 1, 8};
  cfg.optimizer = {1e-2, 15, 32, false};
  cfg.seed = 17;
  return cfg;
}

// Counts replicas whose training ids include an instance they predicted.
std::size_t LeakCount(const std::vector<ReplicaTrace>& replicas) {
  std::size_t bad = 0;
  for (const auto& r : replicas) {
    const std::set<InstanceId> seen(r.trained_on.begin(), r.trained_on.end());
    for (InstanceId id : r.predicted) bad += seen.count(id);
  }
  return bad;
}

TEST(StackConfig, ValidateRejectsBadSettings) {
  auto ok = QuickConfig(1, 3, {Roster({ExpertKind::kMajority})});
  EXPECT_NO_THROW(ok.Validate());
  auto bad = ok;
  bad.V = 1;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = ok;
  bad.K = 3;
  bad.roster.push_back(Roster({ExpertKind::kMajority}));
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = ok;
  bad.optimizer.lr = 0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = ok;
  bad.optimizer.batch_size = 0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = ok;
  bad.roster = {{}};
  EXPECT_THROW(bad.Validate(), ConfigError);
}

TEST(StackConfig, SingleRosterIsReusedAtEveryLevel) {
  auto cfg = QuickConfig(3, 2, {Roster({ExpertKind::kMajority, ExpertKind::kKnn})});
  EXPECT_EQ(&cfg.RosterAt(1), &cfg.RosterAt(3));
  EXPECT_THROW(cfg.RosterAt(4), ConfigError);
}

TEST(BuildMetaLevel, LayoutAndNames) {
  const auto data = Gaussian(3, 2, 60, 2.0, 1);
  const auto prev = AugmentedDataset::FromDataset(data);
  const auto roster = Roster({ExpertKind::kMajority, ExpertKind::kKnn, ExpertKind::kKnn,
                              ExpertKind::kMeanAggregate});
  const auto r = BuildMetaLevel(1, prev, roster, AssignFolds(prev.ids, 3, 1, 5), 9);
  const auto& l = r.data.layout;
  ASSERT_EQ(l.blocks.size(), 4u);
  EXPECT_EQ(l.blocks[0].name, "L1.majority");
  EXPECT_EQ(l.blocks[1].name, "L1.knn");
  EXPECT_EQ(l.blocks[2].name, "L1.knn#2");
  EXPECT_EQ(l.blocks[3].name, "L1.mean_aggregate");
  EXPECT_EQ(l.blocks[2].offset, 2u + 2 * 3);
  EXPECT_EQ(l.width(), 2u + 4 * 3);
  EXPECT_EQ(r.data.rows.cols, l.width());
  EXPECT_EQ(r.data.level, 1);
  EXPECT_EQ(r.replicas.size(), 12u);
  // The original features are carried over unchanged.
  for (std::size_t i = 0; i < prev.size(); ++i) {
    EXPECT_EQ(r.data.rows(i, 0), prev.rows(i, 0));
    EXPECT_EQ(r.data.rows(i, 1), prev.rows(i, 1));
  }
}

TEST(BuildMetaLevel, BlocksAreOutOfFoldFits) {
  // Majority is seed-free, so each block row is the class frequency of the
  // complement of its fold.
  const auto data = Gaussian(3, 2, 47, 1.0, 2);
  const auto prev = AugmentedDataset::FromDataset(data);
  const FoldMap folds = AssignFolds(prev.ids, 4, 1, 3);
  const auto r = BuildMetaLevel(1, prev, Roster({ExpertKind::kMajority}), folds, 0);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    std::vector<double> count(3, 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < prev.size(); ++s) {
      if (folds.FoldOf(prev.ids[s]) == folds.FoldOf(prev.ids[i])) continue;
      count[prev.labels[s]] += 1;
      total += 1;
    }
    for (int k = 0; k < 3; ++k) {
      EXPECT_DOUBLE_EQ(r.data.rows(i, 2 + k), count[k] / total) << "row " << i;
    }
  }
}

TEST(BuildMetaLevel, NoReplicaPredictsItsOwnTrainingRows) {
  const auto data = Gaussian(2, 3, 90, 1.0, 3);
  for (int V : {2, 3, 5}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto cfg = QuickConfig(2, V,
                             {Roster({ExpertKind::kLogistic, ExpertKind::kKnn,
                                      ExpertKind::kMeanAggregate})});
      cfg.seed = seed;
      cfg.optimizer.epochs = 1;
      TrainReport report;
      TrainSuperCone(cfg, data, &report);
      EXPECT_EQ(report.replicas.size(), 2u * 3 * V);
      EXPECT_EQ(LeakCount(report.replicas), 0u) << "V=" << V << " seed=" << seed;
      for (const auto& rep : report.replicas) {
        EXPECT_EQ(rep.trained_on.size() + rep.predicted.size(), data.size());
      }
    }
  }
}

TEST(BuildMetaLevel, MeanAggregateAveragesSiblingBlocks) {
  const auto data = Gaussian(2, 2, 40, 1.0, 4);
  const auto prev = AugmentedDataset::FromDataset(data);
  const auto roster = Roster({ExpertKind::kMajority, ExpertKind::kNaiveBayes,
                              ExpertKind::kMeanAggregate});
  const auto r = BuildMetaLevel(1, prev, roster, AssignFolds(prev.ids, 3, 1, 1), 2);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(r.data.rows(i, 6 + k), 0.5 * (r.data.rows(i, 2 + k) + r.data.rows(i, 4 + k)),
                  1e-15);
    }
  }
}

TEST(BuildMetaLevel, PassthroughCopiesPreviousLevelBlock) {
  const auto data = Gaussian(2, 2, 40, 1.0, 5);
  const auto l0 = AugmentedDataset::FromDataset(data);
  const auto l1 = BuildMetaLevel(1, l0, Roster({ExpertKind::kMajority, ExpertKind::kNaiveBayes}),
                                 AssignFolds(l0.ids, 3, 1, 1), 2)
                      .data;
  std::vector<ExpertSpec> roster{ExpertSpec::Make(ExpertKind::kPassthrough, {}, {1})};
  const auto l2 = BuildMetaLevel(2, l1, roster, AssignFolds(l1.ids, 3, 2, 1), 2).data;
  EXPECT_EQ(l2.layout.blocks[2].name, "L2.passthrough");
  for (std::size_t i = 0; i < l0.size(); ++i) {
    EXPECT_NEAR(l2.rows(i, 6), l1.rows(i, 4), 1e-15);
    EXPECT_NEAR(l2.rows(i, 7), l1.rows(i, 5), 1e-15);
  }
  std::vector<ExpertSpec> missing{ExpertSpec::Make(ExpertKind::kPassthrough, {}, {7})};
  EXPECT_THROW(BuildMetaLevel(2, l1, missing, AssignFolds(l1.ids, 3, 2, 1), 2), ConfigError);
}

TEST(BuildMetaLevel, FitFailureGivesUniformBlockAndWarning) {
  auto data = Gaussian(3, 2, 30, 2.0, 6);
  // Keep a single instance of class 2: the fold holding it trains without it.
  std::vector<Instance> inst = data.instances();
  bool kept = false;
  for (auto& x : inst) {
    if (x.label == 2) {
      if (kept) x.label = 1;
      kept = true;
    }
  }
  const Dataset d(data.vocab_size(), data.label_space(), inst);
  const auto prev = AugmentedDataset::FromDataset(d);
  std::vector<ExpertSpec> roster{
      ExpertSpec::Make(ExpertKind::kLogistic, {{"require_all_classes", 1}})};
  const FoldMap folds = AssignFolds(prev.ids, 3, 1, 0);
  const auto r = BuildMetaLevel(1, prev, roster, folds, 0);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("L1.logistic"), std::string::npos);
  int failed = 0;
  for (const auto& rep : r.replicas) {
    if (!rep.failed) continue;
    ++failed;
    for (InstanceId id : rep.predicted) {
      const auto it = std::find(prev.ids.begin(), prev.ids.end(), id);
      const std::size_t row = it - prev.ids.begin();
      for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(r.data.rows(row, 2 + k), 1.0 / 3);
    }
  }
  EXPECT_EQ(failed, 1);
}

TEST(BuildMetaLevel, ResultDoesNotDependOnThreadCount) {
  const auto data = Gaussian(2, 3, 80, 1.0, 7);
  const auto prev = AugmentedDataset::FromDataset(data);
  const auto roster = Roster({ExpertKind::kLogistic, ExpertKind::kGbt, ExpertKind::kKnn,
                              ExpertKind::kMeanAggregate});
  const FoldMap folds = AssignFolds(prev.ids, 3, 1, 2);
  kernels::SetThreadCount(1);
  const auto a = BuildMetaLevel(1, prev, roster, folds, 4);
  kernels::SetThreadCount(3);
  const auto b = BuildMetaLevel(1, prev, roster, folds, 4);
  kernels::SetThreadCount(0);
  EXPECT_EQ(a.data.rows.data, b.data.rows.data);
}

TEST(MetaTrain, FullBatchTraceStartsAtInitialLoss) {
  const auto data = Gaussian(2, 2, 60, 2.0, 8);
  auto cfg = QuickConfig(1, 3, {Roster({ExpertKind::kLogistic, ExpertKind::kMajority})});
  cfg.optimizer.full_batch = true;
  cfg.optimizer.epochs = 20;
  const auto l0 = AugmentedDataset::FromDataset(data);
  const auto l1 = BuildMetaLevel(1, l0, cfg.RosterAt(1), AssignFolds(l0.ids, 3, 1, 0), 0).data;
  const auto r = MetaTrain(l1, cfg);
  ASSERT_EQ(r.loss_trace.size(), 20u);
  EXPECT_DOUBLE_EQ(r.loss_trace[0], r.initial_loss);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  EXPECT_LT(ComputeLoss(r.params, l1.rows, l1.labels), r.initial_loss);
}

TEST(MetaTrain, DeterministicForSeed) {
  const auto data = Gaussian(3, 2, 70, 2.0, 9);
  auto cfg = QuickConfig(1, 3, {Roster({ExpertKind::kNaiveBayes})});
  const auto l0 = AugmentedDataset::FromDataset(data);
  const auto l1 = BuildMetaLevel(1, l0, cfg.RosterAt(1), AssignFolds(l0.ids, 3, 1, 0), 0).data;
  const auto a = MetaTrain(l1, cfg);
  const auto b = MetaTrain(l1, cfg);
  EXPECT_EQ(a.params.values(), b.params.values());
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  cfg.seed += 1;
  EXPECT_NE(MetaTrain(l1, cfg).params.values(), a.params.values());
}

TEST(MetaTrain, FindsAOneHotTruthBlock) {
  // Block 1 is uniform noise, block 2 the one-hot truth: the combination
  // network should put its weight on block 2.
  const auto data = Gaussian(2, 2, 50, 0.5, 20);
  AugmentedDataset aug = AugmentedDataset::FromDataset(data);
  const auto roster = Roster({ExpertKind::kMajority, ExpertKind::kMajority});
  aug.layout.blocks = {{2, 2, 1, 0, "L1.majority"}, {4, 2, 1, 1, "L1.majority#2"}};
  Matrix rows(aug.size(), 6);
  Rng rng(3);
  for (std::size_t i = 0; i < aug.size(); ++i) {
    rows(i, 0) = aug.rows(i, 0);
    rows(i, 1) = aug.rows(i, 1);
    rows(i, 2) = rng.Uniform(0.2, 0.8);
    rows(i, 3) = 1.0 - rows(i, 2);
    rows(i, 4 + aug.labels[i]) = 1.0;
  }
  aug.rows = rows;
  aug.level = 1;
  auto cfg = QuickConfig(1, 2, {roster});
  cfg.optimizer = {1e-2, 500, 64, true};
  const auto r = MetaTrain(aug, cfg);
  EXPECT_LT(ComputeLoss(r.params, aug.rows, aug.labels), 0.1);
}

TEST(HTrain, RejectsMismatchedLayout) {
  const auto data = Gaussian(2, 2, 30, 2.0, 10);
  auto cfg = QuickConfig(1, 2, {Roster({ExpertKind::kMajority})});
  cfg.optimizer.epochs = 0;
  const auto l0 = AugmentedDataset::FromDataset(data);
  const auto l1 = BuildMetaLevel(1, l0, cfg.RosterAt(1), AssignFolds(l0.ids, 2, 1, 0), 0).data;
  const auto r = MetaTrain(l1, cfg);
  EXPECT_EQ(HTrainForward(r.params, l1.rows.row(0), l1.layout),
            ForwardMixture(r.params, l1.rows.row(0)));
  EXPECT_THROW(HTrainForward(r.params, l0.rows.row(0), l0.layout), ShapeError);
}

TEST(Adapt, ServingExpertsUseTheWholePreviousLevel) {
  const auto data = Gaussian(2, 2, 50, 1.0, 11);
  auto cfg = QuickConfig(2, 3, {Roster({ExpertKind::kMajority, ExpertKind::kLogistic})});
  const auto r = AdaptExperts(cfg, data);
  ASSERT_EQ(r.stacks.size(), 2u);
  for (const auto& level : r.stacks) {
    for (const auto& e : level) EXPECT_EQ(e.trained_on(), data.Ids());
  }
  EXPECT_EQ(r.stacks[0][1].input_width(), 2u);
  EXPECT_EQ(r.stacks[1][1].input_width(), 2u + 2 * 2);
}

TEST(TrainSuperCone, BatchAndRowPredictionsAgree) {
  const auto train = Gaussian(3, 3, 150, 3.0, 12);
  const auto test = Gaussian(3, 3, 40, 3.0, 13);
  auto cfg = QuickConfig(2, 3,
                         {Roster({ExpertKind::kLogistic, ExpertKind::kCartTree,
                                  ExpertKind::kMeanAggregate}),
                          Roster({ExpertKind::kNaiveBayes, ExpertKind::kMajority})});
  const auto model = TrainSuperCone(cfg, train);
  const Matrix batch = PredictFinalBatch(model, test);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = PredictFinal(model, test.instances()[i].concepts);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(batch(i, k), p[k]);
    EXPECT_TRUE(IsProbVector(p));
  }
  const auto names = model.CandidateNames();
  EXPECT_EQ(names, (std::vector<std::string>{"complementary", "L1.logistic", "L1.cart_tree",
                                             "L1.mean_aggregate", "L2.naive_bayes",
                                             "L2.majority"}));
  EXPECT_EQ(model.layout.width(), 3u + 5 * 3);
}

TEST(TrainSuperCone, CandidatesRecombineIntoTheFinalPrediction) {
  const auto train = Gaussian(2, 2, 100, 2.0, 14);
  const auto test = Gaussian(2, 2, 25, 2.0, 15);
  auto cfg = QuickConfig(1, 3, {Roster({ExpertKind::kLogistic, ExpertKind::kKnn})});
  const auto model = TrainSuperCone(cfg, train);
  const auto cands = PredictCandidates(model, test);
  const Matrix final = PredictFinalBatch(model, test);
  ASSERT_EQ(cands.size(), 3u);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto w = ForwardComb(model.meta, test.instances()[i].concepts.Densify(2));
    for (std::size_t k = 0; k < 2; ++k) {
      double m = 0.0;
      for (std::size_t t = 0; t < 3; ++t) m += w[t] * cands[t](i, k);
      EXPECT_NEAR(final(i, k), m, 1e-12);
    }
  }
  const auto att = ComputeAttention(model, test);
  EXPECT_EQ(att.names, model.CandidateNames());
  double sum = 0.0;
  for (double w : att.weights) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(TrainSuperCone, ZeroLevelsServesTheComplementaryExpert) {
  const auto train = Gaussian(2, 2, 80, 3.0, 16);
  auto cfg = QuickConfig(0, 2, {});
  cfg.optimizer.epochs = 30;
  const auto model = TrainSuperCone(cfg, train);
  EXPECT_EQ(model.num_candidates(), 1u);
  const auto x = train.instances()[0].concepts;
  const auto p = PredictFinal(model, x);
  const auto h = ForwardComplementary(model.meta, x.Densify(2));
  EXPECT_EQ(p, h);
}

TEST(TrainSuperCone, LearnsSeparableGaussians) {
  const auto train = Gaussian(2, 2, 300, 4.0, 17);
  const auto test = Gaussian(2, 2, 1000, 4.0, 18);
  auto cfg = QuickConfig(1, 3, {Roster({ExpertKind::kLogistic, ExpertKind::kGbt,
                                        ExpertKind::kKnn, ExpertKind::kMeanAggregate})});
  const auto model = TrainSuperCone(cfg, train);
  const double acc = Accuracy(ArgmaxLabels(PredictFinalBatch(model, test)), test.Labels());
  EXPECT_GT(acc, 0.95);
}

TEST(TrainSuperCone, ReportTracksPhases) {
  const auto train = Gaussian(2, 2, 60, 2.0, 19);
  auto cfg = QuickConfig(1, 2, {Roster({ExpertKind::kMajority})});
  TrainReport report;
  report.keep_levels = true;
  TrainSuperCone(cfg, train, &report);
  EXPECT_EQ(report.loss_trace.size(), 15u);
  EXPECT_EQ(report.levels.size(), 2u);
  EXPECT_GE(report.seconds_meta_levels, 0.0);
  EXPECT_TRUE(report.warnings.empty());
}

}  // namespace
}  // namespace supercone
