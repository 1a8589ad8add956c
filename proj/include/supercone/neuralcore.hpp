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

// Dense numerical core: the complementary mixture-of-experts network, the
// combination network, their reverse-mode gradients under the stacked
// cross-entropy objective, and Adam.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "supercone/common.hpp"
#include "supercone/experts.hpp"

namespace supercone {

enum class Activation { kRelu, kIdentity };

struct NeuralConfig {
  int inner_experts = 3;    // E
  int inner_layers = 3;     // L projection layers per inner expert
  int width = 32;           // inner expert width w
  int gate_layers = 2;
  int gate_width = 32;
  int comb_layers = 3;
  int comb_width = 32;
  bool operator==(const NeuralConfig&) const = default;
};

// Shape of everything ω depends on.
struct MetaStructure {
  std::size_t input_dim = 0;   // |C|
  std::size_t num_classes = 2;
  std::size_t num_blocks = 0;  // T heterogeneous expert blocks
  NeuralConfig neural;
  bool operator==(const MetaStructure&) const = default;

  // Width of an augmented row: input_dim + num_blocks * num_classes.
  std::size_t row_width() const { return input_dim + num_blocks * num_classes; }
};

enum class InitMode { kFanIn, kZero };

struct TensorSlot {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return rows * cols; }
};

struct DenseLayer {
  std::size_t weight = 0;  // slot of the out x in weight matrix
  std::size_t bias = 0;    // slot of the bias (out x 1)
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::kRelu;
};

// Embed layer followed by `proj` projection layers; the block output is the
// sum of every layer's activation (depth 0 is the embedding).
struct DepthSumStack {
  DenseLayer embed;
  std::vector<DenseLayer> proj;
  std::size_t width() const { return embed.out; }
};

struct ComplementaryExpert {
  DenseLayer embed;                            // |C| -> w, shared depth 0
  std::vector<std::vector<DenseLayer>> inner;  // E stacks of L layers w -> w
  DepthSumStack gate;
  DenseLayer gate_head;                        // -> E logits
  DenseLayer tower;                            // w -> |Y| logits
};

struct CombNetwork {
  DepthSumStack stack;
  DenseLayer head;  // -> T + 1 logits
};

// Meta-parameters ω: all trainable weights in one flat buffer plus the
// fixed input scaling fitted on the meta-training features.
class MetaParams {
 public:
  static MetaParams Create(const MetaStructure& structure, std::uint64_t seed,
                           InitMode mode = InitMode::kFanIn);

  const MetaStructure& structure() const { return structure_; }
  const ComplementaryExpert& comp() const { return comp_; }
  const CombNetwork& comb() const { return comb_; }
  const std::vector<TensorSlot>& slots() const { return slots_; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::span<double> tensor(std::size_t slot) {
    return {values_.data() + slots_[slot].offset, slots_[slot].size()};
  }
  std::span<const double> tensor(std::size_t slot) const {
    return {values_.data() + slots_[slot].offset, slots_[slot].size()};
  }
  std::size_t ParameterCount() const { return values_.size(); }
  // Closed-form count for a structure.
  static std::size_t ExpectedParameterCount(const MetaStructure& structure);

  const std::vector<double>& input_offset() const { return input_offset_; }
  const std::vector<double>& input_scale() const { return input_scale_; }
  // Min-max scaling over the first input_dim columns of `features`; scaled
  // values are clipped to [-5, 5] at use.
  void FitInputScaler(const Matrix& features);
  void SetInputScaler(std::vector<double> offset, std::vector<double> scale);
  void ScaleInput(std::span<const double> x, std::span<double> out) const;

  std::vector<NamedArray> Export() const;
  static MetaParams Import(const MetaStructure& structure,
                           const std::vector<NamedArray>& arrays);

 private:
  MetaParams() = default;
  std::size_t AddTensor(const std::string& name, std::size_t rows,
                        std::size_t cols);
  DenseLayer AddLayer(const std::string& name, std::size_t in, std::size_t out,
                      Activation act);
  DepthSumStack AddStack(const std::string& name, std::size_t in,
                         std::size_t width, int layers);
  void Build();

  MetaStructure structure_;
  std::vector<TensorSlot> slots_;
  std::vector<double> values_;
  ComplementaryExpert comp_;
  CombNetwork comb_;
  std::vector<double> input_offset_;
  std::vector<double> input_scale_;
};

// Max-subtracted softmax.
ProbVector Softmax(std::span<const double> v);

// h_alt(x): complementary expert prediction for raw features x (|C|).
ProbVector ForwardComplementary(const MetaParams& params,
                                std::span<const double> x);

// softmax(Comb(x)): weights over [h_alt, block_1 .. block_T].
std::vector<double> ForwardComb(const MetaParams& params,
                                std::span<const double> x);

// Full mixture on an augmented row (features then T probability blocks).
// Blocks drifting from the simplex by more than 1e-9 are renormalized.
ProbVector ForwardMixture(const MetaParams& params,
                          std::span<const double> row);

struct LossAndGradients {
  double loss = 0.0;
  std::vector<double> gradients;  // congruent to MetaParams::values()
};

// Mean clamped cross-entropy of ForwardMixture over the batch rows and its
// gradient with respect to ω. Expert blocks are constants.
LossAndGradients ComputeLossAndGradients(const MetaParams& params,
                                         const Matrix& rows,
                                         std::span<const int> labels);

// Loss only (same definition).
double ComputeLoss(const MetaParams& params, const Matrix& rows,
                   std::span<const int> labels);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of `params` in place.
void AdamStep(AdamState& state, std::span<double> params,
              std::span<const double> grads, const AdamConfig& config);

}  // namespace supercone
