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

// Majority prior, multinomial logistic regression, naive Bayes, kNN and the
// two derived kinds (mean_aggregate, passthrough).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "internal.hpp"
#include "supercone/kernels.hpp"
#include "supercone/logging.hpp"

namespace supercone::experts_internal {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

NamedArray Array(std::string name, std::vector<std::size_t> shape,
                 std::vector<double> values) {
  return {std::move(name), std::move(shape), std::move(values)};
}

// ---------------------------------------------------------------- majority

class MajorityModel final : public ExpertModel {
 public:
  explicit MajorityModel(std::vector<double> prior) : prior_(std::move(prior)) {}

  void PredictRow(std::span<const double>, std::span<double> out) const override {
    std::copy(prior_.begin(), prior_.end(), out.begin());
  }
  std::vector<NamedArray> Export() const override {
    return {Array("prior", {prior_.size()}, prior_)};
  }

 private:
  std::vector<double> prior_;
};

// ---------------------------------------------------------------- logistic

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer Fit(const Matrix& x, bool enabled) {
    Standardizer s{std::vector<double>(x.cols, 0.0),
                   std::vector<double>(x.cols, 1.0)};
    if (!enabled) return s;
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += x(i, j);
    }
    for (double& m : s.mean) m /= static_cast<double>(x.rows);
    std::vector<double> var(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t j = 0; j < x.cols; ++j) {
        const double d = x(i, j) - s.mean[j];
        var[j] += d * d;
      }
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double sd = std::sqrt(var[j] / static_cast<double>(x.rows));
      s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  void Apply(std::span<const double> x, std::span<double> out) const {
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  }

  Matrix Apply(const Matrix& x) const {
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) Apply(x.row(i), out.row(i));
    return out;
  }
};

class LogisticModel final : public ExpertModel {
 public:
  LogisticModel(Standardizer standardizer, std::vector<double> weight,
                std::vector<double> bias)
      : standardizer_(std::move(standardizer)),
        weight_(std::move(weight)),
        bias_(std::move(bias)) {}

  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    std::vector<double> z(x.size());
    standardizer_.Apply(x, z);
    const std::size_t d = x.size();
    for (std::size_t c = 0; c < out.size(); ++c) {
      double acc = bias_[c];
      for (std::size_t j = 0; j < d; ++j) acc += weight_[c * d + j] * z[j];
      out[c] = acc;
    }
    SoftmaxInPlace(out);
  }

  Matrix PredictBatch(const Matrix& x, int num_classes) const override {
    Matrix logits =
        kernels::AffineRows(standardizer_.Apply(x), weight_, bias_, num_classes);
    for (std::size_t i = 0; i < logits.rows; ++i) SoftmaxInPlace(logits.row(i));
    return logits;
  }

  std::vector<NamedArray> Export() const override {
    const std::size_t d = standardizer_.mean.size();
    return {Array("mean", {d}, standardizer_.mean),
            Array("scale", {d}, standardizer_.scale),
            Array("weight", {bias_.size(), d}, weight_),
            Array("bias", {bias_.size()}, bias_)};
  }

 private:
  Standardizer standardizer_;
  std::vector<double> weight_;  // C x d
  std::vector<double> bias_;
};

// ------------------------------------------------------------- naive Bayes

class NaiveBayesModel final : public ExpertModel {
 public:
  // Multinomial: table = log theta (C x d). Gaussian: table = mean, var.
  NaiveBayesModel(bool gaussian, std::vector<double> log_prior,
                  std::vector<double> table, std::vector<double> var)
      : gaussian_(gaussian),
        log_prior_(std::move(log_prior)),
        table_(std::move(table)),
        var_(std::move(var)) {}

  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    const std::size_t d = x.size();
    for (std::size_t c = 0; c < out.size(); ++c) {
      if (log_prior_[c] == kNegInf) {
        out[c] = kNegInf;
        continue;
      }
      double acc = log_prior_[c];
      if (gaussian_) {
        for (std::size_t j = 0; j < d; ++j) {
          const double v = var_[c * d + j];
          const double diff = x[j] - table_[c * d + j];
          acc -= 0.5 * (std::log(2.0 * M_PI * v) + diff * diff / v);
        }
      } else {
        for (std::size_t j = 0; j < d; ++j) {
          if (x[j] != 0.0) acc += x[j] * table_[c * d + j];
        }
      }
      out[c] = acc;
    }
    SoftmaxInPlace(out);
  }

  std::vector<NamedArray> Export() const override {
    const std::size_t c = log_prior_.size();
    const std::size_t d = table_.size() / c;
    std::vector<NamedArray> out{Array("variant", {1}, {gaussian_ ? 1.0 : 0.0}),
                                Array("log_prior", {c}, log_prior_)};
    if (gaussian_) {
      out.push_back(Array("mean", {c, d}, table_));
      out.push_back(Array("var", {c, d}, var_));
    } else {
      out.push_back(Array("log_theta", {c, d}, table_));
    }
    return out;
  }

 private:
  bool gaussian_;
  std::vector<double> log_prior_;
  std::vector<double> table_;
  std::vector<double> var_;
};

// --------------------------------------------------------------------- kNN

class KnnModel final : public ExpertModel {
 public:
  KnnModel(Matrix x, std::vector<int> labels, std::size_t k)
      : x_(std::move(x)), labels_(std::move(labels)), k_(k) {}

  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    Matrix q(1, x.size());
    std::copy(x.begin(), x.end(), q.data.begin());
    const Matrix p = PredictBatch(q, static_cast<int>(out.size()));
    std::copy(p.data.begin(), p.data.end(), out.begin());
  }

  Matrix PredictBatch(const Matrix& x, int num_classes) const override {
    const auto neighbors = kernels::KNearest(x, x_, k_);
    Matrix out(x.rows, num_classes);
    const double denom = static_cast<double>(k_ + num_classes);
    for (std::size_t i = 0; i < x.rows; ++i) {
      auto row = out.row(i);
      std::fill(row.begin(), row.end(), 1.0);
      for (const auto& nb : neighbors[i]) row[labels_[nb.index]] += 1.0;
      for (double& v : row) v /= denom;
    }
    return out;
  }

  std::vector<NamedArray> Export() const override {
    std::vector<double> labels(labels_.begin(), labels_.end());
    return {Array("k", {1}, {static_cast<double>(k_)}),
            Array("x", {x_.rows, x_.cols}, x_.data),
            Array("labels", {labels_.size()}, std::move(labels))};
  }

 private:
  Matrix x_;
  std::vector<int> labels_;
  std::size_t k_;
};

// ----------------------------------------------------------------- derived

class MeanAggregateModel final : public ExpertModel {
 public:
  explicit MeanAggregateModel(std::size_t num_sources)
      : num_sources_(num_sources) {}

  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    const std::size_t c = out.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t s = 0; s < num_sources_; ++s) {
      for (std::size_t k = 0; k < c; ++k) out[k] += x[s * c + k];
    }
    for (double& v : out) v /= static_cast<double>(num_sources_);
    Normalize(out);
  }
  std::vector<NamedArray> Export() const override {
    return {Array("num_sources", {1}, {static_cast<double>(num_sources_)})};
  }

 private:
  std::size_t num_sources_;
};

class PassthroughModel final : public ExpertModel {
 public:
  void PredictRow(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(0.0, x[k]);
    Normalize(out);
  }
  std::vector<NamedArray> Export() const override { return {}; }
};

std::vector<double> ClassCounts(const TrainingSet& data) {
  std::vector<double> counts(data.num_classes, 0.0);
  for (int y : data.labels) counts[y] += 1.0;
  return counts;
}

}  // namespace

FitResult FitMajority(const ExpertSpec&, const TrainingSet& data) {
  std::vector<double> prior = ClassCounts(data);
  for (double& p : prior) p /= static_cast<double>(data.x.rows);
  return {std::make_shared<MajorityModel>(std::move(prior)), {}};
}

std::shared_ptr<const ExpertModel> RestoreMajority(const ExpertSpec&,
                                                   std::size_t, int num_classes,
                                                   const Params& params) {
  return std::make_shared<MajorityModel>(
      FindArray(params, "prior", num_classes).values);
}

FitResult FitLogistic(const ExpertSpec& spec, const TrainingSet& data) {
  const std::size_t n = data.x.rows;
  const std::size_t d = data.x.cols;
  const std::size_t c = data.num_classes;
  const double l2 = spec.Get("l2");
  const double lr = spec.Get("lr");
  const int epochs = static_cast<int>(spec.Get("epochs"));
  Standardizer standardizer = Standardizer::Fit(data.x, spec.Get("standardize") != 0);
  const Matrix z = standardizer.Apply(data.x);

  std::vector<double> weight(c * d, 0.0);
  std::vector<double> bias(c, 0.0);
  std::vector<double> grad_w(c * d);
  std::vector<double> grad_b(c);
  FitResult result;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Matrix p = kernels::AffineRows(z, weight, bias, c);
    double loss = 0.0;
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = p.row(i);
      SoftmaxInPlace(row);
      loss -= std::log(std::clamp(row[data.labels[i]], kProbClamp, 1.0 - kProbClamp));
      row[data.labels[i]] -= 1.0;
      const double* zi = z.data.data() + i * d;
      for (std::size_t k = 0; k < c; ++k) {
        const double g = row[k] * inv_n;
        grad_b[k] += g;
        double* gw = grad_w.data() + k * d;
        for (std::size_t j = 0; j < d; ++j) gw[j] += g * zi[j];
      }
    }
    double penalty = 0.0;
    for (double w : weight) penalty += w * w;
    result.loss_trace.push_back(loss * inv_n + 0.5 * l2 * penalty);
    for (std::size_t k = 0; k < c * d; ++k) {
      weight[k] -= lr * (grad_w[k] + l2 * weight[k]);
    }
    for (std::size_t k = 0; k < c; ++k) bias[k] -= lr * grad_b[k];
  }
  result.model = std::make_shared<LogisticModel>(std::move(standardizer),
                                                 std::move(weight), std::move(bias));
  return result;
}

std::shared_ptr<const ExpertModel> RestoreLogistic(const ExpertSpec&,
                                                   std::size_t width,
                                                   int num_classes,
                                                   const Params& params) {
  Standardizer s{FindArray(params, "mean", width).values,
                 FindArray(params, "scale", width).values};
  return std::make_shared<LogisticModel>(
      std::move(s), FindArray(params, "weight", width * num_classes).values,
      FindArray(params, "bias", num_classes).values);
}

FitResult FitNaiveBayes(const ExpertSpec& spec, const TrainingSet& data) {
  const std::size_t n = data.x.rows;
  const std::size_t d = data.x.cols;
  const std::size_t c = data.num_classes;
  const int variant = static_cast<int>(spec.Get("variant"));
  const bool non_negative =
      std::all_of(data.x.data.begin(), data.x.data.end(), [](double v) { return v >= 0.0; });
  bool gaussian = variant == 1 || (variant == -1 && !non_negative);
  if (variant == 0 && !non_negative) {
    throw FitError("naive_bayes: multinomial variant needs non-negative features");
  }

  const std::vector<double> counts = ClassCounts(data);
  std::vector<double> log_prior(c);
  for (std::size_t k = 0; k < c; ++k) {
    log_prior[k] = counts[k] > 0 ? std::log(counts[k] / static_cast<double>(n)) : kNegInf;
  }

  std::vector<double> table(c * d, 0.0);
  std::vector<double> var;
  if (!gaussian) {
    const double alpha = spec.Get("alpha");
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t y = data.labels[i];
      for (std::size_t j = 0; j < d; ++j) table[y * d + j] += data.x(i, j);
    }
    for (std::size_t k = 0; k < c; ++k) {
      double total = 0.0;
      for (std::size_t j = 0; j < d; ++j) total += table[k * d + j];
      const double denom = total + alpha * static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) {
        table[k * d + j] = std::log((table[k * d + j] + alpha) / denom);
      }
    }
  } else {
    var.assign(c * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t y = data.labels[i];
      for (std::size_t j = 0; j < d; ++j) table[y * d + j] += data.x(i, j);
    }
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        table[k * d + j] = counts[k] > 0 ? table[k * d + j] / counts[k] : 0.0;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t y = data.labels[i];
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = data.x(i, j) - table[y * d + j];
        var[y * d + j] += diff * diff;
      }
    }
    // Smoothing epsilon relative to the largest overall feature variance.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += data.x(i, j);
      mean /= static_cast<double>(n);
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = data.x(i, j) - mean;
        v += diff * diff;
      }
      max_var = std::max(max_var, v / static_cast<double>(n));
    }
    const double eps = spec.Get("var_smoothing") * (max_var > 0 ? max_var : 1.0);
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        var[k * d + j] =
            (counts[k] > 0 ? var[k * d + j] / counts[k] : 1.0) + eps;
      }
    }
  }
  return {std::make_shared<NaiveBayesModel>(gaussian, std::move(log_prior),
                                            std::move(table), std::move(var)),
          {}};
}

std::shared_ptr<const ExpertModel> RestoreNaiveBayes(const ExpertSpec&,
                                                     std::size_t width,
                                                     int num_classes,
                                                     const Params& params) {
  const bool gaussian = FindArray(params, "variant", 1).values[0] == 1.0;
  const std::size_t cells = width * num_classes;
  auto log_prior = FindArray(params, "log_prior", num_classes).values;
  if (gaussian) {
    return std::make_shared<NaiveBayesModel>(
        true, std::move(log_prior), FindArray(params, "mean", cells).values,
        FindArray(params, "var", cells).values);
  }
  return std::make_shared<NaiveBayesModel>(
      false, std::move(log_prior), FindArray(params, "log_theta", cells).values,
      std::vector<double>{});
}

FitResult FitKnn(const ExpertSpec& spec, const TrainingSet& data) {
  std::size_t k = static_cast<std::size_t>(spec.Get("k"));
  if (k > data.x.rows) {
    LogWarning("knn: k=" + std::to_string(k) + " exceeds " +
               std::to_string(data.x.rows) + " training rows; clamped");
    k = data.x.rows;
  }
  return {std::make_shared<KnnModel>(
              data.x, std::vector<int>(data.labels.begin(), data.labels.end()), k),
          {}};
}

std::shared_ptr<const ExpertModel> RestoreKnn(const ExpertSpec&, std::size_t width,
                                              int, const Params& params) {
  const std::size_t k = static_cast<std::size_t>(FindArray(params, "k", 1).values[0]);
  const NamedArray* labels = nullptr;
  for (const auto& a : params) {
    if (a.name == "labels") labels = &a;
  }
  if (labels == nullptr) throw Error("model: missing array 'labels'");
  const std::size_t n = labels->values.size();
  Matrix x(n, width);
  x.data = FindArray(params, "x", n * width).values;
  std::vector<int> y(labels->values.begin(), labels->values.end());
  if (k == 0 || k > n) throw Error("model: bad knn k");
  return std::make_shared<KnnModel>(std::move(x), std::move(y), k);
}

FitResult FitMeanAggregate(const ExpertSpec&, const TrainingSet& data) {
  const std::size_t c = data.num_classes;
  if (data.x.cols == 0 || data.x.cols % c != 0) {
    throw ShapeError("mean_aggregate: input must be whole probability blocks");
  }
  return {std::make_shared<MeanAggregateModel>(data.x.cols / c), {}};
}

std::shared_ptr<const ExpertModel> RestoreMeanAggregate(const ExpertSpec&,
                                                        std::size_t width,
                                                        int num_classes,
                                                        const Params&) {
  if (width == 0 || width % num_classes != 0) {
    throw Error("model: mean_aggregate width mismatch");
  }
  return std::make_shared<MeanAggregateModel>(width / num_classes);
}

FitResult FitPassthrough(const ExpertSpec&, const TrainingSet& data) {
  if (data.x.cols != static_cast<std::size_t>(data.num_classes)) {
    throw ShapeError("passthrough: input must be exactly one probability block");
  }
  return {std::make_shared<PassthroughModel>(), {}};
}

std::shared_ptr<const ExpertModel> RestorePassthrough(const ExpertSpec&,
                                                      std::size_t width,
                                                      int num_classes,
                                                      const Params&) {
  if (width != static_cast<std::size_t>(num_classes)) {
    throw Error("model: passthrough width mismatch");
  }
  return std::make_shared<PassthroughModel>();
}

}  // namespace supercone::experts_internal
