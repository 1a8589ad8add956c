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

// CART classification trees and one-vs-rest gradient boosted trees, both
// grown on quantile-binned features with histogram split search.

#include <algorithm>
#include <cmath>
#include <limits>

#include "internal.hpp"
#include "supercone/kernels.hpp"

namespace supercone::experts_internal {
namespace {

// Split thresholds per feature; a value x falls left of threshold t when
// x <= t. Bin of x = number of thresholds strictly below x.
struct BinEdges {
  std::vector<std::vector<double>> thresholds;

  static BinEdges Fit(const Matrix& x, int max_bins) {
    BinEdges edges;
    edges.thresholds.resize(x.cols);
    std::vector<double> values(x.rows);
    for (std::size_t f = 0; f < x.cols; ++f) {
      for (std::size_t i = 0; i < x.rows; ++i) values[i] = x(i, f);
      std::sort(values.begin(), values.end());
      std::vector<double> uniq;
      for (double v : values) {
        if (uniq.empty() || v != uniq.back()) uniq.push_back(v);
      }
      auto& t = edges.thresholds[f];
      if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
        for (std::size_t u = 1; u < uniq.size(); ++u) {
          t.push_back(uniq[u - 1] + (uniq[u] - uniq[u - 1]) / 2.0);
        }
      } else {
        for (int b = 1; b < max_bins; ++b) {
          const double v = values[b * values.size() / max_bins];
          if (v < uniq.back() && (t.empty() || v > t.back())) t.push_back(v);
        }
      }
    }
    return edges;
  }

  kernels::BinnedMatrix Apply(const Matrix& x) const {
    kernels::BinnedMatrix out;
    out.rows = x.rows;
    out.cols = x.cols;
    out.bins.resize(x.rows * x.cols);
    out.num_bins.resize(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
      const auto& t = thresholds[f];
      out.num_bins[f] = static_cast<int>(t.size()) + 1;
      for (std::size_t i = 0; i < x.rows; ++i) {
        out.bins[f * x.rows + i] = static_cast<std::uint8_t>(
            std::lower_bound(t.begin(), t.end(), x(i, f)) - t.begin());
      }
    }
    return out;
  }
};

struct Tree {
  std::size_t leaf_width = 1;
  std::vector<int> feature;  // -1 for leaves
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> leaf;  // node_count x leaf_width (zeros for splits)

  std::size_t size() const { return feature.size(); }

  const double* Evaluate(std::span<const double> x) const {
    int node = 0;
    while (feature[node] >= 0) {
      node = x[feature[node]] <= threshold[node] ? left[node] : right[node];
    }
    return leaf.data() + node * leaf_width;
  }

  int AddNode() {
    feature.push_back(-1);
    threshold.push_back(0.0);
    left.push_back(-1);
    right.push_back(-1);
    leaf.resize(leaf.size() + leaf_width, 0.0);
    return static_cast<int>(feature.size()) - 1;
  }
};

class Criterion {
 public:
  virtual ~Criterion() = default;
  // -inf when the split is not admissible.
  virtual double Gain(const double* left, const double* right,
                      const double* parent) const = 0;
  virtual void Leaf(const double* sums, double* out) const = 0;
};

class TreeGrower {
 public:
  TreeGrower(const kernels::BinnedMatrix& binned, const BinEdges& edges,
             const Matrix& stats, const Criterion& criterion, int max_depth,
             std::size_t leaf_width)
      : binned_(binned),
        edges_(edges),
        stats_(stats),
        criterion_(criterion),
        max_depth_(max_depth) {
    tree_.leaf_width = leaf_width;
  }

  Tree Grow(std::vector<std::uint32_t> rows) {
    tree_.AddNode();
    Split(0, std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  void Split(int node, std::vector<std::uint32_t> rows, int depth) {
    const std::size_t w = stats_.cols;
    std::vector<double> sums(w, 0.0);
    for (auto r : rows) {
      for (std::size_t s = 0; s < w; ++s) sums[s] += stats_(r, s);
    }
    int best_feature = -1;
    int best_bin = -1;
    double best_gain = 1e-12;
    if (depth < max_depth_ && rows.size() >= 2) {
      const auto hist = kernels::FeatureHistograms(binned_, rows, stats_);
      std::vector<double> lsum(w);
      std::vector<double> rsum(w);
      for (std::size_t f = 0; f < binned_.cols; ++f) {
        std::fill(lsum.begin(), lsum.end(), 0.0);
        for (int b = 0; b + 1 < binned_.num_bins[f]; ++b) {
          const double* h = hist.at(f, b);
          for (std::size_t s = 0; s < w; ++s) {
            lsum[s] += h[s];
            rsum[s] = sums[s] - lsum[s];
          }
          const double gain = criterion_.Gain(lsum.data(), rsum.data(), sums.data());
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_bin = b;
          }
        }
      }
    }
    if (best_feature < 0) {
      criterion_.Leaf(sums.data(), tree_.leaf.data() + node * tree_.leaf_width);
      return;
    }
    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    const auto col = binned_.column(best_feature);
    for (auto r : rows) {
      (col[r] <= best_bin ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.feature[node] = best_feature;
    tree_.threshold[node] = edges_.thresholds[best_feature][best_bin];
    const int l = tree_.AddNode();
    const int r = tree_.AddNode();
    tree_.left[node] = l;
    tree_.right[node] = r;
    Split(l, std::move(left_rows), depth + 1);
    Split(r, std::move(right_rows), depth + 1);
  }

  const kernels::BinnedMatrix& binned_;
  const BinEdges& edges_;
  const Matrix& stats_;
  const Criterion& criterion_;
  int max_depth_;
  Tree tree_;
};

class GiniCriterion final : public Criterion {
 public:
  GiniCriterion(std::size_t num_classes, double min_leaf)
      : num_classes_(num_classes), min_leaf_(min_leaf) {}

  double Gain(const double* l, const double* r, const double* p) const override {
    const double nl = Total(l);
    const double nr = Total(r);
    if (nl < min_leaf_ || nr < min_leaf_) {
      return -std::numeric_limits<double>::infinity();
    }
    return WeightedImpurity(p) - WeightedImpurity(l) - WeightedImpurity(r);
  }

  void Leaf(const double* sums, double* out) const override {
    const double n = Total(sums);
    for (std::size_t c = 0; c < num_classes_; ++c) out[c] = sums[c] / n;
  }

 private:
  double Total(const double* s) const {
    double n = 0.0;
    for (std::size_t c = 0; c < num_classes_; ++c) n += s[c];
    return n;
  }
  // n * gini = n - sum_c n_c^2 / n
  double WeightedImpurity(const double* s) const {
    const double n = Total(s);
    if (n <= 0) return 0.0;
    double sq = 0.0;
    for (std::size_t c = 0; c < num_classes_; ++c) sq += s[c] * s[c];
    return n - sq / n;
  }

  std::size_t num_classes_;
  double min_leaf_;
};

// Row stats: (gradient, hessian, count).
class NewtonCriterion final : public Criterion {
 public:
  NewtonCriterion(double l2, double min_leaf) : l2_(l2), min_leaf_(min_leaf) {}

  double Gain(const double* l, const double* r, const double* p) const override {
    if (l[2] < min_leaf_ || r[2] < min_leaf_) {
      return -std::numeric_limits<double>::infinity();
    }
    return Score(l) + Score(r) - Score(p);
  }
  void Leaf(const double* sums, double* out) const override {
    out[0] = -sums[0] / (sums[1] + l2_);
  }

 private:
  double Score(const double* s) const { return s[0] * s[0] / (s[1] + l2_); }
  double l2_;
  double min_leaf_;
};

double Sigmoid(double f) {
  return f >= 0 ? 1.0 / (1.0 + std::exp(-f)) : std::exp(f) / (1.0 + std::exp(f));
}

double BinaryLoss(double f, bool positive) {
  // -log sigmoid(+-f), computed stably and clamped like every other log.
  const double p = Sigmoid(positive ? f : -f);
  return -std::log(std::clamp(p, kProbClamp, 1.0));
}

void AppendTree(const Tree& t, std::vector<double>& offsets,
                std::vector<double>& feature, std::vector<double>& threshold,
                std::vector<double>& left, std::vector<double>& right,
                std::vector<double>& leaf) {
  offsets.push_back(static_cast<double>(feature.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    feature.push_back(t.feature[i]);
    threshold.push_back(t.threshold[i]);
    left.push_back(t.left[i]);
    right.push_back(t.right[i]);
  }
  leaf.insert(leaf.end(), t.leaf.begin(), t.leaf.end());
}

std::vector<NamedArray> ExportTrees(const std::vector<Tree>& trees,
                                    std::size_t leaf_width) {
  std::vector<double> offsets, feature, threshold, left, right, leaf;
  for (const auto& t : trees) {
    AppendTree(t, offsets, feature, threshold, left, right, leaf);
  }
  offsets.push_back(static_cast<double>(feature.size()));
  const std::size_t nodes = feature.size();
  return {{"tree_offsets", {offsets.size()}, offsets},
          {"feature", {nodes}, feature},
          {"threshold", {nodes}, threshold},
          {"left", {nodes}, left},
          {"right", {nodes}, right},
          {"leaf", {nodes, leaf_width}, leaf}};
}

std::vector<Tree> ImportTrees(const Params& params, std::size_t leaf_width,
                              std::size_t input_width) {
  const NamedArray* offsets_array = nullptr;
  for (const auto& a : params) {
    if (a.name == "tree_offsets") offsets_array = &a;
  }
  if (offsets_array == nullptr || offsets_array->values.empty()) {
    throw Error("model: missing array 'tree_offsets'");
  }
  const auto& offsets = offsets_array->values;
  const auto nodes = static_cast<std::size_t>(offsets.back());
  const auto& feature = FindArray(params, "feature", nodes).values;
  const auto& threshold = FindArray(params, "threshold", nodes).values;
  const auto& left = FindArray(params, "left", nodes).values;
  const auto& right = FindArray(params, "right", nodes).values;
  const auto& leaf = FindArray(params, "leaf", nodes * leaf_width).values;
  std::vector<Tree> trees;
  for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
    const auto begin = static_cast<std::size_t>(offsets[t]);
    const auto end = static_cast<std::size_t>(offsets[t + 1]);
    if (begin >= end || end > nodes) throw Error("model: bad tree offsets");
    Tree tree;
    tree.leaf_width = leaf_width;
    const int size = static_cast<int>(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      tree.feature.push_back(static_cast<int>(feature[i]));
      tree.threshold.push_back(threshold[i]);
      tree.left.push_back(static_cast<int>(left[i]));
      tree.right.push_back(static_cast<int>(right[i]));
      const int f = tree.feature.back();
      if (f >= static_cast<int>(input_width) ||
          (f >= 0 && (tree.left.back() <= 0 || tree.left.back() >= size ||
                      tree.right.back() <= 0 || tree.right.back() >= size))) {
        throw Error("model: malformed tree node");
      }
    }
    tree.leaf.assign(leaf.begin() + begin * leaf_width,
                     leaf.begin() + end * leaf_width);
    trees.push_back(std::move(tree));
  }
  return trees;
}

std::vector<std::uint32_t> AllRows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
  return rows;
}

// ------------------------------------------------------------------- CART

class CartModel final : public ExpertModel {
 public:
  explicit CartModel(Tree tree) : tree_(std::move(tree)) {}

  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    const double* leaf = tree_.Evaluate(x);
    std::copy(leaf, leaf + out.size(), out.begin());
  }
  std::vector<NamedArray> Export() const override {
    return ExportTrees({tree_}, tree_.leaf_width);
  }

 private:
  Tree tree_;
};

// -------------------------------------------------------------------- GBT

// One booster for binary tasks (class 1 vs rest, class 0 mirrored), one per
// class otherwise. Trees are stored round-major.
class GbtModel final : public ExpertModel {
 public:
  GbtModel(std::vector<double> init, std::vector<Tree> trees)
      : init_(std::move(init)), trees_(std::move(trees)) {}

  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    const std::size_t boosters = init_.size();
    std::vector<double> f(init_);
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      f[t % boosters] += trees_[t].Evaluate(x)[0];
    }
    if (boosters == 1) {
      out[0] = Sigmoid(-f[0]);
      out[1] = Sigmoid(f[0]);
      return;
    }
    for (std::size_t c = 0; c < boosters; ++c) out[c] = Sigmoid(f[c]);
    Normalize(out);
  }

  std::vector<NamedArray> Export() const override {
    auto arrays = ExportTrees(trees_, 1);
    arrays.insert(arrays.begin(), NamedArray{"init", {init_.size()}, init_});
    return arrays;
  }

 private:
  std::vector<double> init_;
  std::vector<Tree> trees_;
};

}  // namespace

FitResult FitCart(const ExpertSpec& spec, const TrainingSet& data) {
  const std::size_t c = data.num_classes;
  const BinEdges edges = BinEdges::Fit(data.x, static_cast<int>(spec.Get("max_bins")));
  const kernels::BinnedMatrix binned = edges.Apply(data.x);
  Matrix stats(data.x.rows, c);
  for (std::size_t i = 0; i < data.x.rows; ++i) stats(i, data.labels[i]) = 1.0;
  GiniCriterion criterion(c, spec.Get("min_leaf"));
  TreeGrower grower(binned, edges, stats, criterion,
                    static_cast<int>(spec.Get("max_depth")), c);
  return {std::make_shared<CartModel>(grower.Grow(AllRows(data.x.rows))), {}};
}

std::shared_ptr<const ExpertModel> RestoreCart(const ExpertSpec&,
                                               std::size_t width,
                                               int num_classes,
                                               const Params& params) {
  auto trees = ImportTrees(params, num_classes, width);
  if (trees.size() != 1) throw Error("model: cart_tree expects one tree");
  return std::make_shared<CartModel>(std::move(trees[0]));
}

FitResult FitGbt(const ExpertSpec& spec, const TrainingSet& data) {
  const std::size_t n = data.x.rows;
  const std::size_t c = data.num_classes;
  const std::size_t boosters = c == 2 ? 1 : c;
  const int rounds = static_cast<int>(spec.Get("rounds"));
  const double shrinkage = spec.Get("shrinkage");
  const BinEdges edges = BinEdges::Fit(data.x, static_cast<int>(spec.Get("max_bins")));
  const kernels::BinnedMatrix binned = edges.Apply(data.x);
  NewtonCriterion criterion(spec.Get("l2"), spec.Get("min_leaf"));
  const int max_depth = static_cast<int>(spec.Get("max_depth"));

  auto target = [&](std::size_t i, std::size_t b) {
    return boosters == 1 ? data.labels[i] == 1
                         : data.labels[i] == static_cast<int>(b);
  };

  std::vector<double> init(boosters);
  for (std::size_t b = 0; b < boosters; ++b) {
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) pos += target(i, b);
    const double p = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    init[b] = std::log(p / (1.0 - p));
  }
  // margins: n x boosters
  std::vector<double> margin(n * boosters);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < boosters; ++b) margin[i * boosters + b] = init[b];
  }
  std::vector<double> booster_loss(boosters, 0.0);
  for (std::size_t b = 0; b < boosters; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      booster_loss[b] += BinaryLoss(margin[i * boosters + b], target(i, b));
    }
  }
  auto objective = [&] {
    double total = 0.0;
    for (double l : booster_loss) total += l;
    return total / static_cast<double>(n);
  };

  FitResult result;
  result.loss_trace.push_back(objective());
  std::vector<Tree> trees;
  Matrix stats(n, 3);
  std::vector<double> step(n);
  const auto rows = AllRows(n);
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t b = 0; b < boosters; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = Sigmoid(margin[i * boosters + b]);
        stats(i, 0) = p - (target(i, b) ? 1.0 : 0.0);
        stats(i, 1) = std::max(p * (1.0 - p), 1e-16);
        stats(i, 2) = 1.0;
      }
      TreeGrower grower(binned, edges, stats, criterion, max_depth, 1);
      Tree tree = grower.Grow(rows);
      for (std::size_t i = 0; i < n; ++i) step[i] = tree.Evaluate(data.x.row(i))[0];
      // Damped Newton step; halve further if the booster loss would rise so
      // that the training objective never increases.
      double scale = shrinkage;
      double new_loss = 0.0;
      for (int attempt = 0; attempt <= 30; ++attempt) {
        new_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          new_loss += BinaryLoss(margin[i * boosters + b] + scale * step[i], target(i, b));
        }
        if (new_loss <= booster_loss[b]) break;
        scale = attempt == 30 ? 0.0 : scale / 2.0;
      }
      if (new_loss > booster_loss[b]) {
        scale = 0.0;
        new_loss = booster_loss[b];
      }
      for (double& v : tree.leaf) v *= scale;
      for (std::size_t i = 0; i < n; ++i) margin[i * boosters + b] += scale * step[i];
      booster_loss[b] = new_loss;
      trees.push_back(std::move(tree));
    }
    result.loss_trace.push_back(objective());
  }
  result.model = std::make_shared<GbtModel>(std::move(init), std::move(trees));
  return result;
}

std::shared_ptr<const ExpertModel> RestoreGbt(const ExpertSpec&, std::size_t width,
                                              int num_classes, const Params& params) {
  const std::size_t boosters = num_classes == 2 ? 1 : num_classes;
  auto init = FindArray(params, "init", boosters).values;
  auto trees = ImportTrees(params, 1, width);
  if (trees.size() % boosters != 0) throw Error("model: gbt tree count mismatch");
  return std::make_shared<GbtModel>(std::move(init), std::move(trees));
}

}  // namespace supercone::experts_internal
