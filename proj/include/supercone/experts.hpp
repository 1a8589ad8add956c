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

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "supercone/common.hpp"

namespace supercone {

// Class-probability vector: entries >= 0 summing to 1 within 1e-9.
using ProbVector = std::vector<double>;

bool IsProbVector(std::span<const double> p, double tol = 1e-9);

// Clamp applied to probabilities before any logarithm.
inline constexpr double kProbClamp = 1e-12;

enum class ExpertKind {
  kMajority,
  kLogistic,
  kNaiveBayes,
  kKnn,
  kCartTree,
  kGbt,
  kMeanAggregate,
  kPassthrough,
};

const char* ExpertKindName(ExpertKind kind);
ExpertKind ParseExpertKind(const std::string& name);

// Expert kind plus validated hyperparameters. Unknown keys are rejected and
// missing ones take the kind's default.
//
// `sources` designates inputs for the derived kinds: for mean_aggregate the
// roster positions (same level) being averaged, for passthrough the global
// block index being copied from the previous level.
class ExpertSpec {
 public:
  static ExpertSpec Make(ExpertKind kind,
                         std::map<std::string, double> hyper = {},
                         std::vector<int> sources = {});

  ExpertKind kind() const { return kind_; }
  const std::map<std::string, double>& hyper() const { return hyper_; }
  double Get(const std::string& key) const;
  const std::vector<int>& sources() const { return sources_; }
  std::string name() const { return ExpertKindName(kind_); }
  // True for mean_aggregate and passthrough, whose input is not the
  // augmented row but selected expert blocks.
  bool derived() const {
    return kind_ == ExpertKind::kMeanAggregate ||
           kind_ == ExpertKind::kPassthrough;
  }

  bool operator==(const ExpertSpec&) const = default;

 private:
  ExpertKind kind_ = ExpertKind::kMajority;
  std::map<std::string, double> hyper_;
  std::vector<int> sources_;
};

// Default hyperparameters of a kind.
std::map<std::string, double> DefaultHyper(ExpertKind kind);

struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool operator==(const NamedArray&) const = default;
};

// Borrowed training data for one oracle call.
struct TrainingSet {
  const Matrix& x;
  std::span<const int> labels;
  std::span<const InstanceId> ids;
  int num_classes = 2;
};

// Fitted state behind a TrainedExpert.
class ExpertModel {
 public:
  virtual ~ExpertModel() = default;
  virtual void PredictRow(std::span<const double> x,
                          std::span<double> out) const = 0;
  // Default loops over PredictRow.
  virtual Matrix PredictBatch(const Matrix& x, int num_classes) const;
  virtual std::vector<NamedArray> Export() const = 0;
};

class TrainedExpert {
 public:
  TrainedExpert(ExpertSpec spec, std::size_t input_width, int num_classes,
                std::vector<InstanceId> trained_on,
                std::shared_ptr<const ExpertModel> model);

  const ExpertSpec& spec() const { return spec_; }
  std::size_t input_width() const { return input_width_; }
  int num_classes() const { return num_classes_; }
  const std::vector<InstanceId>& trained_on() const { return trained_on_; }

  ProbVector Predict(std::span<const double> x) const;
  void PredictInto(std::span<const double> x, std::span<double> out) const;
  // Rows of `x` must have input_width columns; returns n x num_classes.
  Matrix PredictBatch(const Matrix& x) const;

  std::vector<NamedArray> Params() const { return model_->Export(); }

  // Per-iteration training objective for iterative kinds (empty otherwise).
  std::vector<double> train_loss_trace;

 private:
  ExpertSpec spec_;
  std::size_t input_width_;
  int num_classes_;
  std::vector<InstanceId> trained_on_;
  std::shared_ptr<const ExpertModel> model_;
};

// Training oracle: deterministic in (spec, data, seed).
TrainedExpert FitExpert(const ExpertSpec& spec, const TrainingSet& data,
                        std::uint64_t seed);

// Rebuilds a TrainedExpert from exported parameters.
TrainedExpert RestoreExpert(const ExpertSpec& spec, std::size_t input_width,
                            int num_classes, std::vector<InstanceId> trained_on,
                            const std::vector<NamedArray>& params);

}  // namespace supercone
