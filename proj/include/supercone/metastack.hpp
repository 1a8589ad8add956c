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

// Cross-validated recursive stacking: level-by-level out-of-fold expert
// blocks, meta-training of ω against the stacked objective, expert
// adaptation for serving, and the assembled predictor.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "supercone/dataio.hpp"
#include "supercone/experts.hpp"
#include "supercone/neuralcore.hpp"

namespace supercone {

struct BlockInfo {
  std::size_t offset = 0;
  std::size_t width = 0;
  int level = 0;
  int roster_index = 0;
  std::string name;
  bool operator==(const BlockInfo&) const = default;
};

// Column layout of an augmented row: the |C| original features followed by
// one probability block per expert, in level then roster order.
struct BlockLayout {
  std::size_t input_dim = 0;
  std::size_t num_classes = 2;
  std::vector<BlockInfo> blocks;

  std::size_t width() const {
    return blocks.empty() ? input_dim : blocks.back().offset + blocks.back().width;
  }
  bool operator==(const BlockLayout&) const = default;
};

struct AugmentedDataset {
  int level = 0;
  Matrix rows;
  BlockLayout layout;
  std::vector<int> labels;
  std::vector<InstanceId> ids;

  std::size_t size() const { return rows.rows; }
  // Level-0 dataset: the densified concept vectors.
  static AugmentedDataset FromDataset(const Dataset& data);
};

struct OptimizerConfig {
  double lr = 1e-4;
  int epochs = 30;
  int batch_size = 64;
  bool full_batch = false;
  bool operator==(const OptimizerConfig&) const = default;
};

struct StackConfig {
  int K = 1;
  int V = 3;
  // Roster per level 1..K. A single roster is reused at every level.
  std::vector<std::vector<ExpertSpec>> roster;
  NeuralConfig neural;
  OptimizerConfig optimizer;
  InitMode init = InitMode::kFanIn;
  std::uint64_t seed = 0;

  const std::vector<ExpertSpec>& RosterAt(int level) const;
  // Throws ConfigError on inconsistent settings.
  void Validate() const;
};

// One fitted per-fold expert replica and the rows it predicted.
struct ReplicaTrace {
  int level = 0;
  int roster_index = 0;
  int fold = 0;
  bool failed = false;
  std::vector<InstanceId> trained_on;
  std::vector<InstanceId> predicted;
};

struct MetaLevelResult {
  AugmentedDataset data;
  std::vector<ReplicaTrace> replicas;
  std::vector<std::string> warnings;
};

// Appends level-k out-of-fold blocks to `prev`: every (expert, fold) replica
// is fitted on rows outside the fold and predicts the rows inside it. Fit
// jobs run concurrently; assembly order is fixed.
MetaLevelResult BuildMetaLevel(int level, const AugmentedDataset& prev,
                               std::span<const ExpertSpec> roster,
                               const FoldMap& folds, std::uint64_t seed);

// Meta-training surrogate: mixture of h_alt and the stored blocks.
ProbVector HTrainForward(const MetaParams& params, std::span<const double> row,
                         const BlockLayout& layout);

struct MetaTrainResult {
  MetaParams params;
  double initial_loss = 0.0;
  std::vector<double> loss_trace;  // one mean loss per epoch
};

MetaTrainResult MetaTrain(const AugmentedDataset& aug, const StackConfig& config);

// Serving experts for levels 1..K.
using ExpertStacks = std::vector<std::vector<TrainedExpert>>;

struct AdaptResult {
  ExpertStacks stacks;
  AugmentedDataset top;
};

// Fits each level-k roster expert on the whole level-(k-1) meta-training
// set (levels[0] is level 0). No folds are used here.
AdaptResult AdaptExperts(const StackConfig& config,
                         std::span<const AugmentedDataset> levels);
// Convenience: rebuilds the meta-training levels from `train` first.
AdaptResult AdaptExperts(const StackConfig& config, const Dataset& train);

struct SuperConeModel {
  MetaParams meta;
  ExpertStacks stacks;
  BlockLayout layout;
  LabelSpace label_space;
  std::size_t vocab_size = 0;
  StackConfig config;

  std::size_t num_candidates() const { return layout.blocks.size() + 1; }
  // "complementary" then block names in layout order.
  std::vector<std::string> CandidateNames() const;
};

struct TrainReport {
  std::vector<double> loss_trace;
  double initial_loss = 0.0;
  std::vector<ReplicaTrace> replicas;
  std::vector<std::string> warnings;
  double seconds_meta_levels = 0.0;
  double seconds_meta_train = 0.0;
  double seconds_adapt = 0.0;
  std::vector<AugmentedDataset> levels;  // filled when keep_levels is set
  bool keep_levels = false;
};

SuperConeModel TrainSuperCone(const StackConfig& config, const Dataset& train,
                              TrainReport* report = nullptr);

// Runs the expert levels on a dense feature row and returns the top-level
// augmented row.
std::vector<double> AugmentRow(const SuperConeModel& model,
                               std::span<const double> features);

ProbVector PredictFinal(const SuperConeModel& model, const ConceptVector& c);
// Row-parallel over `data`; identical to calling PredictFinal per instance.
Matrix PredictFinalBatch(const SuperConeModel& model, const Dataset& data);
// Predictions of every candidate (h_alt first, then blocks) per instance:
// result[t] is n x |Y|.
std::vector<Matrix> PredictCandidates(const SuperConeModel& model,
                                      const Dataset& data);

struct AttentionReport {
  std::vector<std::string> names;
  std::vector<double> weights;
};

AttentionReport ComputeAttention(const SuperConeModel& model, const Dataset& data);

}  // namespace supercone
