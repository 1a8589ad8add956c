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

#include <algorithm>
#include <cmath>
#include <set>

#include "internal.hpp"
#include "supercone/experts.hpp"

namespace supercone {

using namespace experts_internal;

bool IsProbVector(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (const double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::fabs(sum - 1.0) <= tol;
}

const char* ExpertKindName(ExpertKind kind) {
  switch (kind) {
    case ExpertKind::kMajority:
      return "majority";
    case ExpertKind::kLogistic:
      return "logistic";
    case ExpertKind::kNaiveBayes:
      return "naive_bayes";
    case ExpertKind::kKnn:
      return "knn";
    case ExpertKind::kCartTree:
      return "cart_tree";
    case ExpertKind::kGbt:
      return "gbt";
    case ExpertKind::kMeanAggregate:
      return "mean_aggregate";
    case ExpertKind::kPassthrough:
      return "passthrough";
  }
  return "?";
}

ExpertKind ParseExpertKind(const std::string& name) {
  for (ExpertKind k :
       {ExpertKind::kMajority, ExpertKind::kLogistic, ExpertKind::kNaiveBayes,
        ExpertKind::kKnn, ExpertKind::kCartTree, ExpertKind::kGbt,
        ExpertKind::kMeanAggregate, ExpertKind::kPassthrough}) {
    if (name == ExpertKindName(k)) return k;
  }
  // Accepted alias.
  if (name == "cart") return ExpertKind::kCartTree;
  throw ConfigError("unknown expert kind '" + name + "'");
}

std::map<std::string, double> DefaultHyper(ExpertKind kind) {
  std::map<std::string, double> h{{"require_all_classes", 0.0}};
  switch (kind) {
    case ExpertKind::kMajority:
    case ExpertKind::kMeanAggregate:
    case ExpertKind::kPassthrough:
      break;
    case ExpertKind::kLogistic:
      h.insert({{"l2", 1e-4}, {"epochs", 200}, {"lr", 0.1}, {"standardize", 1}});
      break;
    case ExpertKind::kNaiveBayes:
      // variant: -1 auto, 0 multinomial, 1 gaussian.
      h.insert({{"alpha", 1.0}, {"var_smoothing", 1e-9}, {"variant", -1}});
      break;
    case ExpertKind::kKnn:
      h.insert({{"k", 15}});
      break;
    case ExpertKind::kCartTree:
      h.insert({{"max_depth", 6}, {"min_leaf", 5}, {"max_bins", 255}});
      break;
    case ExpertKind::kGbt:
      h.insert({{"rounds", 50},
                {"max_depth", 3},
                {"shrinkage", 0.1},
                {"l2", 1.0},
                {"min_leaf", 1},
                {"max_bins", 255}});
      break;
  }
  return h;
}

namespace {

void Require(bool ok, ExpertKind kind, const std::string& what) {
  if (!ok) {
    throw ConfigError(std::string("expert ") + ExpertKindName(kind) + ": " +
                      what);
  }
}

bool IsInteger(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

ExpertSpec ExpertSpec::Make(ExpertKind kind, std::map<std::string, double> hyper,
                            std::vector<int> sources) {
  ExpertSpec spec;
  spec.kind_ = kind;
  spec.hyper_ = DefaultHyper(kind);
  for (const auto& [key, value] : hyper) {
    auto it = spec.hyper_.find(key);
    Require(it != spec.hyper_.end(), kind, "unknown hyperparameter '" + key + "'");
    Require(std::isfinite(value), kind, "hyperparameter '" + key + "' not finite");
    it->second = value;
  }
  spec.sources_ = std::move(sources);
  const auto& h = spec.hyper_;
  Require(h.at("require_all_classes") == 0 || h.at("require_all_classes") == 1,
          kind, "require_all_classes must be 0 or 1");
  switch (kind) {
    case ExpertKind::kLogistic:
      Require(h.at("l2") >= 0, kind, "l2 must be >= 0");
      Require(IsInteger(h.at("epochs")) && h.at("epochs") >= 1, kind,
              "epochs must be a positive integer");
      Require(h.at("lr") > 0, kind, "lr must be > 0");
      break;
    case ExpertKind::kNaiveBayes:
      Require(h.at("alpha") > 0, kind, "alpha must be > 0");
      Require(h.at("var_smoothing") > 0, kind, "var_smoothing must be > 0");
      Require(h.at("variant") == -1 || h.at("variant") == 0 ||
                  h.at("variant") == 1,
              kind, "variant must be -1, 0 or 1");
      break;
    case ExpertKind::kKnn:
      Require(IsInteger(h.at("k")) && h.at("k") >= 1, kind,
              "k must be a positive integer");
      break;
    case ExpertKind::kCartTree:
    case ExpertKind::kGbt:
      Require(IsInteger(h.at("max_depth")) && h.at("max_depth") >= 1, kind,
              "max_depth must be a positive integer");
      Require(IsInteger(h.at("min_leaf")) && h.at("min_leaf") >= 1, kind,
              "min_leaf must be a positive integer");
      Require(IsInteger(h.at("max_bins")) && h.at("max_bins") >= 2 &&
                  h.at("max_bins") <= 256,
              kind, "max_bins must be in [2, 256]");
      if (kind == ExpertKind::kGbt) {
        Require(IsInteger(h.at("rounds")) && h.at("rounds") >= 1, kind,
                "rounds must be a positive integer");
        Require(h.at("shrinkage") > 0 && h.at("shrinkage") <= 1, kind,
                "shrinkage must be in (0, 1]");
        Require(h.at("l2") >= 0, kind, "l2 must be >= 0");
      }
      break;
    case ExpertKind::kMeanAggregate:
      for (int s : spec.sources_) Require(s >= 0, kind, "negative source");
      break;
    case ExpertKind::kPassthrough:
      Require(spec.sources_.size() == 1 && spec.sources_[0] >= 0, kind,
              "passthrough needs exactly one source block");
      break;
    case ExpertKind::kMajority:
      break;
  }
  if (!spec.derived()) Require(spec.sources_.empty(), kind, "sources not allowed");
  return spec;
}

double ExpertSpec::Get(const std::string& key) const {
  auto it = hyper_.find(key);
  if (it == hyper_.end()) throw ConfigError("missing hyperparameter " + key);
  return it->second;
}

Matrix ExpertModel::PredictBatch(const Matrix& x, int num_classes) const {
  Matrix out(x.rows, num_classes);
  for (std::size_t i = 0; i < x.rows; ++i) PredictRow(x.row(i), out.row(i));
  return out;
}

TrainedExpert::TrainedExpert(ExpertSpec spec, std::size_t input_width,
                             int num_classes, std::vector<InstanceId> trained_on,
                             std::shared_ptr<const ExpertModel> model)
    : spec_(std::move(spec)),
      input_width_(input_width),
      num_classes_(num_classes),
      trained_on_(std::move(trained_on)),
      model_(std::move(model)) {}

void TrainedExpert::PredictInto(std::span<const double> x,
                                std::span<double> out) const {
  if (x.size() != input_width_) {
    throw ShapeError(spec_.name() + ": input width " + std::to_string(x.size()) +
                     " != " + std::to_string(input_width_));
  }
  if (out.size() != static_cast<std::size_t>(num_classes_)) {
    throw ShapeError(spec_.name() + ": output width mismatch");
  }
  model_->PredictRow(x, out);
}

ProbVector TrainedExpert::Predict(std::span<const double> x) const {
  ProbVector out(num_classes_);
  PredictInto(x, out);
  return out;
}

Matrix TrainedExpert::PredictBatch(const Matrix& x) const {
  if (x.cols != input_width_) {
    throw ShapeError(spec_.name() + ": input width " + std::to_string(x.cols) +
                     " != " + std::to_string(input_width_));
  }
  return model_->PredictBatch(x, num_classes_);
}

TrainedExpert FitExpert(const ExpertSpec& spec, const TrainingSet& data,
                        std::uint64_t seed) {
  (void)seed;  // every current kind is deterministic given its data
  if (data.x.rows == 0) throw FitError(spec.name() + ": empty training data");
  if (data.labels.size() != data.x.rows || data.ids.size() != data.x.rows) {
    throw ShapeError(spec.name() + ": labels/ids do not match rows");
  }
  if (data.num_classes < 2) throw FitError("need at least two classes");
  std::vector<int> counts(data.num_classes, 0);
  for (int y : data.labels) {
    if (y < 0 || y >= data.num_classes) {
      throw FitError(spec.name() + ": label out of range");
    }
    ++counts[y];
  }
  if (spec.Get("require_all_classes") == 1 &&
      std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; })) {
    throw FitError(spec.name() + ": training data lacks a class");
  }
  FitResult fit;
  switch (spec.kind()) {
    case ExpertKind::kMajority:
      fit = FitMajority(spec, data);
      break;
    case ExpertKind::kLogistic:
      fit = FitLogistic(spec, data);
      break;
    case ExpertKind::kNaiveBayes:
      fit = FitNaiveBayes(spec, data);
      break;
    case ExpertKind::kKnn:
      fit = FitKnn(spec, data);
      break;
    case ExpertKind::kCartTree:
      fit = FitCart(spec, data);
      break;
    case ExpertKind::kGbt:
      fit = FitGbt(spec, data);
      break;
    case ExpertKind::kMeanAggregate:
      fit = FitMeanAggregate(spec, data);
      break;
    case ExpertKind::kPassthrough:
      fit = FitPassthrough(spec, data);
      break;
  }
  TrainedExpert out(spec, data.x.cols, data.num_classes,
                    std::vector<InstanceId>(data.ids.begin(), data.ids.end()),
                    std::move(fit.model));
  out.train_loss_trace = std::move(fit.loss_trace);
  return out;
}

TrainedExpert RestoreExpert(const ExpertSpec& spec, std::size_t input_width,
                            int num_classes, std::vector<InstanceId> trained_on,
                            const std::vector<NamedArray>& params) {
  std::shared_ptr<const ExpertModel> model;
  switch (spec.kind()) {
    case ExpertKind::kMajority:
      model = RestoreMajority(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kLogistic:
      model = RestoreLogistic(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kNaiveBayes:
      model = RestoreNaiveBayes(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kKnn:
      model = RestoreKnn(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kCartTree:
      model = RestoreCart(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kGbt:
      model = RestoreGbt(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kMeanAggregate:
      model = RestoreMeanAggregate(spec, input_width, num_classes, params);
      break;
    case ExpertKind::kPassthrough:
      model = RestorePassthrough(spec, input_width, num_classes, params);
      break;
  }
  return TrainedExpert(spec, input_width, num_classes, std::move(trained_on),
                       std::move(model));
}

namespace experts_internal {

const NamedArray& FindArray(const std::vector<NamedArray>& params,
                            const std::string& name, std::size_t expected) {
  for (const auto& a : params) {
    if (a.name == name) {
      if (a.values.size() != expected) {
        throw Error("model: array '" + name + "' has " +
                    std::to_string(a.values.size()) + " values, expected " +
                    std::to_string(expected));
      }
      return a;
    }
  }
  throw Error("model: missing array '" + name + "'");
}

void Normalize(std::span<double> p) {
  double sum = 0.0;
  for (double v : p) sum += v;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return;
  }
  for (double& v : p) v /= sum;
}

}  // namespace experts_internal
}  // namespace supercone
