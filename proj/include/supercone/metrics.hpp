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

// Classification metrics over predicted probability vectors and hard labels.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "supercone/common.hpp"

namespace supercone {

struct ClassMetrics {
  std::string name;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;  // NaN when the class has no positives or no negatives
};

struct MetricsReport {
  double accuracy = 0.0;
  double weighted_ovr_auc = 0.0;
  double weighted_f1 = 0.0;
  double log_loss = 0.0;
  double log_loss_hard = 0.0;
  double cohen_kappa = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  std::size_t n = 0;
  std::vector<ClassMetrics> per_class;

  // Flat JSON text; keys are the field names above.
  std::string ToJson() const;
};

inline constexpr double kLogLossClamp = 1e-15;

// Row-wise argmax; ties go to the lower class index.
std::vector<int> ArgmaxLabels(const Matrix& scores);

// counts[truth][pred].
std::vector<std::vector<std::size_t>> ConfusionMatrix(std::span<const int> pred,
                                                      std::span<const int> labels,
                                                      int num_classes);

// Mann-Whitney AUC of `scores` for positives `positive`; ties get average rank.
// Throws when either side is empty.
double BinaryAuc(std::span<const double> scores, std::span<const char> positive);

double WeightedOvrAuc(const Matrix& scores, std::span<const int> labels);
double Accuracy(std::span<const int> pred, std::span<const int> labels);
double WeightedF1(std::span<const int> pred, std::span<const int> labels, int num_classes);
double CohenKappa(std::span<const int> pred, std::span<const int> labels, int num_classes);
double MacroPrecision(std::span<const int> pred, std::span<const int> labels,
                      int num_classes);
double MacroRecall(std::span<const int> pred, std::span<const int> labels, int num_classes);
double LogLoss(const Matrix& scores, std::span<const int> labels,
               double clamp = kLogLossClamp);
double LogLossHard(std::span<const int> pred, std::span<const int> labels,
                   double clamp = kLogLossClamp);

// All metrics at once. Hard predictions are the argmax of `scores`.
MetricsReport Evaluate(const Matrix& scores, std::span<const int> labels,
                       const std::vector<std::string>& class_names);

}  // namespace supercone
