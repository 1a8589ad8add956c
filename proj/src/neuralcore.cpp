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

#include "supercone/neuralcore.hpp"

#include <algorithm>
#include <cmath>

#include "supercone/rng.hpp"

namespace supercone {
namespace {

constexpr double kInputClip = 5.0;

std::size_t StackParams(std::size_t in, std::size_t w, std::size_t layers) {
  return in * w + w + layers * (w * w + w);
}

// Activations recorded by a forward pass, reused across samples.
struct LayerTape {
  std::vector<double> pre;
  std::vector<double> act;
};

struct StackTape {
  std::vector<LayerTape> layers;  // embed, proj...
  std::vector<double> sum;
};

struct Tape {
  std::vector<double> x;  // standardized input
  LayerTape embed;
  std::vector<std::vector<LayerTape>> inner;  // E x L
  std::vector<std::vector<double>> inner_sum;  // E x w
  StackTape gate;
  std::vector<double> gate_logits;
  std::vector<double> gate_weights;
  std::vector<double> v;
  std::vector<double> tower_logits;
  std::vector<double> h_alt;
  StackTape comb;
  std::vector<double> comb_logits;
  std::vector<double> comb_weights;
  std::vector<double> mixture;
  // Renormalized expert blocks, T x |Y|.
  std::vector<double> blocks;
};

void ForwardLayer(const MetaParams& p, const DenseLayer& layer,
                  std::span<const double> in, LayerTape& tape) {
  const auto w = p.tensor(layer.weight);
  const auto b = p.tensor(layer.bias);
  tape.pre.resize(layer.out);
  tape.act.resize(layer.out);
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* row = w.data() + o * layer.in;
    double acc = b[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * in[i];
    tape.pre[o] = acc;
    tape.act[o] = layer.activation == Activation::kRelu ? std::max(acc, 0.0) : acc;
  }
}

void ForwardStack(const MetaParams& p, const DepthSumStack& stack,
                  std::span<const double> in, StackTape& tape) {
  tape.layers.resize(1 + stack.proj.size());
  ForwardLayer(p, stack.embed, in, tape.layers[0]);
  tape.sum = tape.layers[0].act;
  for (std::size_t i = 0; i < stack.proj.size(); ++i) {
    ForwardLayer(p, stack.proj[i], tape.layers[i].act, tape.layers[i + 1]);
    for (std::size_t k = 0; k < tape.sum.size(); ++k) {
      tape.sum[k] += tape.layers[i + 1].act[k];
    }
  }
}

void SoftmaxInto(std::span<const double> logits, std::vector<double>& out) {
  out.assign(logits.begin(), logits.end());
  SoftmaxInPlace(out);
}

void ForwardComplementaryTape(const MetaParams& p, Tape& t) {
  const auto& comp = p.comp();
  ForwardLayer(p, comp.embed, t.x, t.embed);
  const std::size_t e = comp.inner.size();
  t.inner.resize(e);
  t.inner_sum.resize(e);
  for (std::size_t k = 0; k < e; ++k) {
    const auto& layers = comp.inner[k];
    t.inner[k].resize(layers.size());
    t.inner_sum[k] = t.embed.act;
    std::span<const double> prev = t.embed.act;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      ForwardLayer(p, layers[i], prev, t.inner[k][i]);
      for (std::size_t j = 0; j < t.inner_sum[k].size(); ++j) {
        t.inner_sum[k][j] += t.inner[k][i].act[j];
      }
      prev = t.inner[k][i].act;
    }
  }
  ForwardStack(p, comp.gate, t.x, t.gate);
  LayerTape head;
  ForwardLayer(p, comp.gate_head, t.gate.sum, head);
  t.gate_logits = head.pre;
  SoftmaxInto(t.gate_logits, t.gate_weights);
  t.v.assign(comp.embed.out, 0.0);
  for (std::size_t k = 0; k < e; ++k) {
    for (std::size_t j = 0; j < t.v.size(); ++j) {
      t.v[j] += t.gate_weights[k] * t.inner_sum[k][j];
    }
  }
  LayerTape tower;
  ForwardLayer(p, comp.tower, t.v, tower);
  t.tower_logits = tower.pre;
  SoftmaxInto(t.tower_logits, t.h_alt);
}

void ForwardCombTape(const MetaParams& p, Tape& t) {
  ForwardStack(p, p.comb().stack, t.x, t.comb);
  LayerTape head;
  ForwardLayer(p, p.comb().head, t.comb.sum, head);
  t.comb_logits = head.pre;
  SoftmaxInto(t.comb_logits, t.comb_weights);
}

void LoadInput(const MetaParams& p, std::span<const double> x, Tape& t) {
  const std::size_t d = p.structure().input_dim;
  if (x.size() < d) throw ShapeError("input narrower than |C|");
  t.x.resize(d);
  p.ScaleInput(x.first(d), t.x);
}

void ForwardMixtureTape(const MetaParams& p, std::span<const double> row, Tape& t) {
  const auto& s = p.structure();
  if (row.size() != s.row_width()) {
    throw ShapeError("augmented row width " + std::to_string(row.size()) +
                     " != " + std::to_string(s.row_width()));
  }
  LoadInput(p, row, t);
  ForwardComplementaryTape(p, t);
  ForwardCombTape(p, t);
  const std::size_t c = s.num_classes;
  t.blocks.assign(row.begin() + s.input_dim, row.end());
  for (std::size_t b = 0; b < s.num_blocks; ++b) {
    std::span<double> block(t.blocks.data() + b * c, c);
    double sum = 0.0;
    for (double v : block) sum += v;
    if (std::fabs(sum - 1.0) > 1e-9) {
      if (!(sum > 0.0)) {
        std::fill(block.begin(), block.end(), 1.0 / static_cast<double>(c));
      } else {
        for (double& v : block) v /= sum;
      }
    }
  }
  t.mixture.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) t.mixture[k] = t.comb_weights[0] * t.h_alt[k];
  for (std::size_t b = 0; b < s.num_blocks; ++b) {
    const double w = t.comb_weights[b + 1];
    for (std::size_t k = 0; k < c; ++k) t.mixture[k] += w * t.blocks[b * c + k];
  }
}

// Accumulates weight/bias gradients of `layer` given dL/d(activation) and
// returns dL/d(input) when requested.
void BackwardLayer(const MetaParams& p, const DenseLayer& layer,
                   std::span<const double> in, const LayerTape& tape,
                   std::span<const double> d_act, double* grads,
                   std::vector<double>* d_in) {
  const auto w = p.tensor(layer.weight);
  double* gw = grads + p.slots()[layer.weight].offset;
  double* gb = grads + p.slots()[layer.bias].offset;
  if (d_in) d_in->assign(layer.in, 0.0);
  for (std::size_t o = 0; o < layer.out; ++o) {
    double d_pre = d_act[o];
    if (layer.activation == Activation::kRelu && tape.pre[o] <= 0.0) d_pre = 0.0;
    if (d_pre == 0.0) continue;
    gb[o] += d_pre;
    double* grow = gw + o * layer.in;
    for (std::size_t i = 0; i < layer.in; ++i) grow[i] += d_pre * in[i];
    if (d_in) {
      const double* wrow = w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) (*d_in)[i] += d_pre * wrow[i];
    }
  }
}

// Backward through a depth-sum stack whose output gradient is d_sum.
void BackwardStack(const MetaParams& p, const DepthSumStack& stack,
                   std::span<const double> in, const StackTape& tape,
                   std::span<const double> d_sum, double* grads) {
  const std::size_t layers = 1 + stack.proj.size();
  std::vector<double> d_act(d_sum.begin(), d_sum.end());
  std::vector<double> d_prev;
  for (std::size_t i = layers; i-- > 0;) {
    const DenseLayer& layer = i == 0 ? stack.embed : stack.proj[i - 1];
    std::span<const double> layer_in =
        i == 0 ? in : std::span<const double>(tape.layers[i - 1].act);
    BackwardLayer(p, layer, layer_in, tape.layers[i], d_act, grads,
                  i == 0 ? nullptr : &d_prev);
    if (i > 0) {
      for (std::size_t k = 0; k < d_act.size(); ++k) d_act[k] = d_sum[k] + d_prev[k];
    }
  }
}

// Gradient of -log(clamp(mixture[y])) for one sample, scaled by `scale`.
double BackwardSample(const MetaParams& p, const Tape& t, int y, double scale,
                      double* grads) {
  const auto& s = p.structure();
  const auto& comp = p.comp();
  const std::size_t c = s.num_classes;
  const double py = t.mixture[y];
  const double clamped = std::clamp(py, kProbClamp, 1.0 - kProbClamp);
  const double loss = -std::log(clamped);
  if (clamped != py) return loss;  // flat region of the clamp
  const double d_py = -scale / py;

  // Combination weights.
  const std::size_t cand = s.num_blocks + 1;
  std::vector<double> d_w(cand);
  d_w[0] = d_py * t.h_alt[y];
  for (std::size_t b = 0; b < s.num_blocks; ++b) d_w[b + 1] = d_py * t.blocks[b * c + y];
  double dot = 0.0;
  for (std::size_t k = 0; k < cand; ++k) dot += t.comb_weights[k] * d_w[k];
  std::vector<double> d_comb_logits(cand);
  for (std::size_t k = 0; k < cand; ++k) {
    d_comb_logits[k] = t.comb_weights[k] * (d_w[k] - dot);
  }
  std::vector<double> d_comb_sum;
  BackwardLayer(p, p.comb().head, t.comb.sum, LayerTape{t.comb_logits, t.comb_logits},
                d_comb_logits, grads, &d_comb_sum);
  BackwardStack(p, p.comb().stack, t.x, t.comb, d_comb_sum, grads);

  // Complementary expert through its softmax output.
  const double d_hy = d_py * t.comb_weights[0];
  std::vector<double> d_tower(c);
  for (std::size_t k = 0; k < c; ++k) {
    d_tower[k] = d_hy * t.h_alt[y] * ((k == static_cast<std::size_t>(y) ? 1.0 : 0.0) - t.h_alt[k]);
  }
  std::vector<double> d_v;
  BackwardLayer(p, comp.tower, t.v, LayerTape{t.tower_logits, t.tower_logits}, d_tower,
                grads, &d_v);

  const std::size_t e = comp.inner.size();
  std::vector<double> d_alpha(e, 0.0);
  for (std::size_t k = 0; k < e; ++k) {
    for (std::size_t j = 0; j < d_v.size(); ++j) d_alpha[k] += d_v[j] * t.inner_sum[k][j];
  }
  double adot = 0.0;
  for (std::size_t k = 0; k < e; ++k) adot += t.gate_weights[k] * d_alpha[k];
  std::vector<double> d_gate_logits(e);
  for (std::size_t k = 0; k < e; ++k) {
    d_gate_logits[k] = t.gate_weights[k] * (d_alpha[k] - adot);
  }
  std::vector<double> d_gate_sum;
  BackwardLayer(p, comp.gate_head, t.gate.sum, LayerTape{t.gate_logits, t.gate_logits},
                d_gate_logits, grads, &d_gate_sum);
  BackwardStack(p, comp.gate, t.x, t.gate, d_gate_sum, grads);

  // Inner experts share the embedding as depth 0.
  const std::size_t w = comp.embed.out;
  std::vector<double> d_embed(w, 0.0);
  std::vector<double> d_sum(w);
  std::vector<double> d_act(w);
  std::vector<double> d_prev;
  for (std::size_t k = 0; k < e; ++k) {
    for (std::size_t j = 0; j < w; ++j) d_sum[j] = t.gate_weights[k] * d_v[j];
    const auto& layers = comp.inner[k];
    d_act = d_sum;
    for (std::size_t i = layers.size(); i-- > 0;) {
      std::span<const double> in =
          i == 0 ? std::span<const double>(t.embed.act)
                 : std::span<const double>(t.inner[k][i - 1].act);
      BackwardLayer(p, layers[i], in, t.inner[k][i], d_act, grads, &d_prev);
      for (std::size_t j = 0; j < w; ++j) d_act[j] = d_sum[j] + d_prev[j];
    }
    for (std::size_t j = 0; j < w; ++j) d_embed[j] += d_act[j];
  }
  BackwardLayer(p, comp.embed, t.x, t.embed, d_embed, grads, nullptr);
  return loss;
}

}  // namespace

std::size_t MetaParams::AddTensor(const std::string& name, std::size_t rows,
                                  std::size_t cols) {
  slots_.push_back({name, rows, cols, values_.size()});
  values_.resize(values_.size() + rows * cols, 0.0);
  return slots_.size() - 1;
}

DenseLayer MetaParams::AddLayer(const std::string& name, std::size_t in,
                                std::size_t out, Activation act) {
  DenseLayer layer;
  layer.in = in;
  layer.out = out;
  layer.activation = act;
  layer.weight = AddTensor(name + ".weight", out, in);
  layer.bias = AddTensor(name + ".bias", out, 1);
  return layer;
}

DepthSumStack MetaParams::AddStack(const std::string& name, std::size_t in,
                                   std::size_t width, int layers) {
  DepthSumStack stack;
  stack.embed = AddLayer(name + ".embed", in, width, Activation::kRelu);
  for (int i = 1; i <= layers; ++i) {
    stack.proj.push_back(AddLayer(name + ".proj" + std::to_string(i), width,
                                  width, Activation::kRelu));
  }
  return stack;
}

void MetaParams::Build() {
  const auto& s = structure_;
  const auto& n = s.neural;
  if (s.input_dim == 0 || s.num_classes < 2) {
    throw ConfigError("meta structure needs |C| >= 1 and >= 2 classes");
  }
  if (n.inner_experts < 1 || n.inner_layers < 0 || n.width < 1 ||
      n.gate_layers < 0 || n.gate_width < 1 || n.comb_layers < 0 ||
      n.comb_width < 1) {
    throw ConfigError("neural config: need E >= 1, L >= 0 and positive widths");
  }
  const std::size_t w = n.width;
  comp_.embed = AddLayer("comp.embed", s.input_dim, w, Activation::kRelu);
  comp_.inner.resize(n.inner_experts);
  for (int t = 0; t < n.inner_experts; ++t) {
    for (int i = 1; i <= n.inner_layers; ++i) {
      comp_.inner[t].push_back(AddLayer("comp.inner" + std::to_string(t + 1) +
                                            ".proj" + std::to_string(i),
                                        w, w, Activation::kRelu));
    }
  }
  comp_.gate = AddStack("comp.gate", s.input_dim, n.gate_width, n.gate_layers);
  comp_.gate_head = AddLayer("comp.gate.head", n.gate_width, n.inner_experts,
                             Activation::kIdentity);
  comp_.tower = AddLayer("comp.tower", w, s.num_classes, Activation::kIdentity);
  comb_.stack = AddStack("comb", s.input_dim, n.comb_width, n.comb_layers);
  comb_.head = AddLayer("comb.head", n.comb_width, s.num_blocks + 1,
                        Activation::kIdentity);
  input_offset_.assign(s.input_dim, 0.0);
  input_scale_.assign(s.input_dim, 1.0);
}

MetaParams MetaParams::Create(const MetaStructure& structure, std::uint64_t seed,
                              InitMode mode) {
  MetaParams p;
  p.structure_ = structure;
  p.Build();
  if (mode == InitMode::kFanIn) {
    Rng rng(MixSeed(seed, 0x6e6e));
    for (const auto& slot : p.slots_) {
      if (slot.cols == 1 && slot.name.ends_with(".bias")) continue;
      const double limit = std::sqrt(6.0 / static_cast<double>(slot.rows + slot.cols));
      for (std::size_t i = 0; i < slot.size(); ++i) {
        p.values_[slot.offset + i] = rng.Uniform(-limit, limit);
      }
    }
  }
  return p;
}

std::size_t MetaParams::ExpectedParameterCount(const MetaStructure& s) {
  const auto& n = s.neural;
  const std::size_t w = n.width;
  const std::size_t e = n.inner_experts;
  const std::size_t comp = s.input_dim * w + w + e * n.inner_layers * (w * w + w) +
                           StackParams(s.input_dim, n.gate_width, n.gate_layers) +
                           n.gate_width * e + e + w * s.num_classes + s.num_classes;
  const std::size_t cand = s.num_blocks + 1;
  const std::size_t comb =
      StackParams(s.input_dim, n.comb_width, n.comb_layers) + n.comb_width * cand + cand;
  return comp + comb;
}

void MetaParams::FitInputScaler(const Matrix& features) {
  const std::size_t d = structure_.input_dim;
  if (features.cols < d || features.rows == 0) {
    throw ShapeError("FitInputScaler: need rows with >= |C| columns");
  }
  std::vector<double> lo(features.row(0).begin(), features.row(0).begin() + d);
  std::vector<double> hi = lo;
  for (std::size_t i = 1; i < features.rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], features(i, j));
      hi[j] = std::max(hi[j], features(i, j));
    }
  }
  std::vector<double> scale(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double range = hi[j] - lo[j];
    scale[j] = range > 1e-12 ? range : 1.0;
  }
  SetInputScaler(std::move(lo), std::move(scale));
}

void MetaParams::SetInputScaler(std::vector<double> offset, std::vector<double> scale) {
  if (offset.size() != structure_.input_dim || scale.size() != structure_.input_dim) {
    throw ShapeError("input scaler width mismatch");
  }
  for (double s : scale) {
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("input scale must be > 0");
  }
  input_offset_ = std::move(offset);
  input_scale_ = std::move(scale);
}

void MetaParams::ScaleInput(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < input_offset_.size(); ++j) {
    out[j] = std::clamp((x[j] - input_offset_[j]) / input_scale_[j], -kInputClip, kInputClip);
  }
}

std::vector<NamedArray> MetaParams::Export() const {
  std::vector<NamedArray> out;
  out.push_back({"input.offset", {input_offset_.size()}, input_offset_});
  out.push_back({"input.scale", {input_scale_.size()}, input_scale_});
  for (const auto& slot : slots_) {
    out.push_back({slot.name,
                   {slot.rows, slot.cols},
                   std::vector<double>(values_.begin() + slot.offset,
                                       values_.begin() + slot.offset + slot.size())});
  }
  return out;
}

MetaParams MetaParams::Import(const MetaStructure& structure,
                              const std::vector<NamedArray>& arrays) {
  MetaParams p = Create(structure, 0, InitMode::kZero);
  auto find = [&](const std::string& name, std::size_t size) -> const NamedArray& {
    for (const auto& a : arrays) {
      if (a.name == name) {
        if (a.values.size() != size) {
          throw Error("model: meta array '" + name + "' has wrong size");
        }
        return a;
      }
    }
    throw Error("model: missing meta array '" + name + "'");
  };
  for (const auto& slot : p.slots_) {
    const auto& a = find(slot.name, slot.size());
    std::copy(a.values.begin(), a.values.end(), p.values_.begin() + slot.offset);
  }
  p.SetInputScaler(find("input.offset", structure.input_dim).values,
                   find("input.scale", structure.input_dim).values);
  if (arrays.size() != p.slots_.size() + 2) {
    throw Error("model: unexpected meta arrays");
  }
  return p;
}

ProbVector Softmax(std::span<const double> v) {
  ProbVector out(v.begin(), v.end());
  SoftmaxInPlace(out);
  return out;
}

ProbVector ForwardComplementary(const MetaParams& params, std::span<const double> x) {
  if (x.size() != params.structure().input_dim) {
    throw ShapeError("complementary expert: input width mismatch");
  }
  Tape t;
  LoadInput(params, x, t);
  ForwardComplementaryTape(params, t);
  return t.h_alt;
}

std::vector<double> ForwardComb(const MetaParams& params, std::span<const double> x) {
  if (x.size() != params.structure().input_dim) {
    throw ShapeError("combination network: input width mismatch");
  }
  Tape t;
  LoadInput(params, x, t);
  ForwardCombTape(params, t);
  return t.comb_weights;
}

ProbVector ForwardMixture(const MetaParams& params, std::span<const double> row) {
  Tape t;
  ForwardMixtureTape(params, row, t);
  return t.mixture;
}

LossAndGradients ComputeLossAndGradients(const MetaParams& params,
                                         const Matrix& rows,
                                         std::span<const int> labels) {
  if (rows.rows == 0 || labels.size() != rows.rows) {
    throw ShapeError("loss: empty batch or label count mismatch");
  }
  LossAndGradients out;
  out.gradients.assign(params.ParameterCount(), 0.0);
  const double scale = 1.0 / static_cast<double>(rows.rows);
  Tape t;
  double total = 0.0;
  for (std::size_t i = 0; i < rows.rows; ++i) {
    if (labels[i] < 0 || labels[i] >= static_cast<int>(params.structure().num_classes)) {
      throw ShapeError("loss: label out of range");
    }
    ForwardMixtureTape(params, rows.row(i), t);
    total += BackwardSample(params, t, labels[i], scale, out.gradients.data());
  }
  out.loss = total * scale;
  if (!std::isfinite(out.loss)) throw NumericError("loss: non-finite value");
  return out;
}

double ComputeLoss(const MetaParams& params, const Matrix& rows,
                   std::span<const int> labels) {
  if (rows.rows == 0 || labels.size() != rows.rows) {
    throw ShapeError("loss: empty batch or label count mismatch");
  }
  Tape t;
  double total = 0.0;
  for (std::size_t i = 0; i < rows.rows; ++i) {
    ForwardMixtureTape(params, rows.row(i), t);
    total -= std::log(std::clamp(t.mixture[labels[i]], kProbClamp, 1.0 - kProbClamp));
  }
  return total / static_cast<double>(rows.rows);
}

void AdamStep(AdamState& state, std::span<double> params,
              std::span<const double> grads, const AdamConfig& config) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam: shape mismatch");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

}  // namespace supercone
