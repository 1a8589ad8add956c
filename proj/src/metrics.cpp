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

#include "supercone/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace supercone {
namespace {

void CheckPair(std::span<const int> pred, std::span<const int> labels) {
  if (labels.empty()) throw Error("metrics: empty input");
  if (pred.size() != labels.size()) {
    throw ShapeError("metrics: " + std::to_string(pred.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labels");
  }
}

struct Counts {
  std::vector<double> tp, predicted, actual;
};

Counts Tally(std::span<const int> pred, std::span<const int> labels, int num_classes) {
  CheckPair(pred, labels);
  Counts c{std::vector<double>(num_classes), std::vector<double>(num_classes),
           std::vector<double>(num_classes)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes || pred[i] < 0 ||
        pred[i] >= num_classes) {
      throw ShapeError("metrics: class index out of range");
    }
    c.actual[labels[i]] += 1;
    c.predicted[pred[i]] += 1;
    if (pred[i] == labels[i]) c.tp[labels[i]] += 1;
  }
  return c;
}

double Ratio(double a, double b) { return b > 0 ? a / b : 0.0; }

double F1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

std::vector<double> PerClassAuc(const Matrix& scores, std::span<const int> labels) {
  const std::size_t c = scores.cols;
  std::vector<double> auc(c, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> col(labels.size());
  std::vector<char> pos(labels.size());
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t npos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      col[i] = scores(i, k);
      pos[i] = labels[i] == static_cast<int>(k);
      npos += pos[i];
    }
    if (npos == 0 || npos == labels.size()) continue;
    auc[k] = BinaryAuc(col, pos);
  }
  return auc;
}

}  // namespace

std::vector<int> ArgmaxLabels(const Matrix& scores) {
  std::vector<int> out(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const auto r = scores.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

std::vector<std::vector<std::size_t>> ConfusionMatrix(std::span<const int> pred,
                                                      std::span<const int> labels,
                                                      int num_classes) {
  CheckPair(pred, labels);
  std::vector<std::vector<std::size_t>> m(num_classes, std::vector<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) ++m.at(labels[i]).at(pred[i]);
  return m;
}

double BinaryAuc(std::span<const double> scores, std::span<const char> positive) {
  const std::size_t n = scores.size();
  if (positive.size() != n) throw ShapeError("auc: size mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  double npos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        rank_sum += avg_rank;
        npos += 1;
      }
    }
    i = j;
  }
  const double nneg = static_cast<double>(n) - npos;
  if (npos == 0 || nneg == 0) throw Error("auc: need both positives and negatives");
  return (rank_sum - npos * (npos + 1) / 2) / (npos * nneg);
}

double WeightedOvrAuc(const Matrix& scores, std::span<const int> labels) {
  if (labels.empty()) throw Error("metrics: empty input");
  if (scores.rows != labels.size()) throw ShapeError("auc: score rows != labels");
  if (scores.cols < 2) throw Error("auc: need at least two classes");
  const auto auc = PerClassAuc(scores, labels);
  if (scores.cols == 2) {
    if (std::isnan(auc[1])) throw Error("auc: all labels belong to one class");
    return auc[1];
  }
  double total = 0.0;
  double weight = 0.0;
  for (std::size_t k = 0; k < scores.cols; ++k) {
    if (std::isnan(auc[k])) continue;
    const auto support =
        static_cast<double>(std::count(labels.begin(), labels.end(), static_cast<int>(k)));
    total += support * auc[k];
    weight += support;
  }
  if (weight == 0) throw Error("auc: all labels belong to one class");
  return total / weight;
}

double Accuracy(std::span<const int> pred, std::span<const int> labels) {
  CheckPair(pred, labels);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

double WeightedF1(std::span<const int> pred, std::span<const int> labels, int num_classes) {
  const Counts c = Tally(pred, labels, num_classes);
  double total = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    total += c.actual[k] * F1(Ratio(c.tp[k], c.predicted[k]), Ratio(c.tp[k], c.actual[k]));
  }
  return total / static_cast<double>(labels.size());
}

double CohenKappa(std::span<const int> pred, std::span<const int> labels, int num_classes) {
  const Counts c = Tally(pred, labels, num_classes);
  const double n = static_cast<double>(labels.size());
  double po = 0.0;
  double pe = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    po += c.tp[k];
    pe += c.actual[k] * c.predicted[k];
  }
  po /= n;
  pe /= n * n;
  if (pe >= 1.0) throw Error("kappa: undefined when chance agreement is 1");
  return (po - pe) / (1.0 - pe);
}

double MacroPrecision(std::span<const int> pred, std::span<const int> labels,
                      int num_classes) {
  const Counts c = Tally(pred, labels, num_classes);
  double total = 0.0;
  int used = 0;
  for (int k = 0; k < num_classes; ++k) {
    if (c.actual[k] == 0 && c.predicted[k] == 0) continue;
    total += Ratio(c.tp[k], c.predicted[k]);
    ++used;
  }
  return total / used;
}

double MacroRecall(std::span<const int> pred, std::span<const int> labels, int num_classes) {
  const Counts c = Tally(pred, labels, num_classes);
  double total = 0.0;
  int used = 0;
  for (int k = 0; k < num_classes; ++k) {
    if (c.actual[k] == 0 && c.predicted[k] == 0) continue;
    total += Ratio(c.tp[k], c.actual[k]);
    ++used;
  }
  return total / used;
}

double LogLoss(const Matrix& scores, std::span<const int> labels, double clamp) {
  if (labels.empty()) throw Error("metrics: empty input");
  if (scores.rows != labels.size()) throw ShapeError("log_loss: score rows != labels");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = scores(i, static_cast<std::size_t>(labels[i]));
    total -= std::log(std::clamp(p, clamp, 1.0 - clamp));
  }
  return total / static_cast<double>(labels.size());
}

double LogLossHard(std::span<const int> pred, std::span<const int> labels, double clamp) {
  CheckPair(pred, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total -= std::log(pred[i] == labels[i] ? 1.0 - clamp : clamp);
  }
  return total / static_cast<double>(labels.size());
}

MetricsReport Evaluate(const Matrix& scores, std::span<const int> labels,
                       const std::vector<std::string>& class_names) {
  const int c = static_cast<int>(class_names.size());
  if (scores.cols != class_names.size()) throw ShapeError("evaluate: class count mismatch");
  const auto pred = ArgmaxLabels(scores);
  MetricsReport r;
  r.n = labels.size();
  r.accuracy = Accuracy(pred, labels);
  r.weighted_ovr_auc = WeightedOvrAuc(scores, labels);
  r.weighted_f1 = WeightedF1(pred, labels, c);
  r.log_loss = LogLoss(scores, labels);
  r.log_loss_hard = LogLossHard(pred, labels);
  r.cohen_kappa = CohenKappa(pred, labels, c);
  r.macro_precision = MacroPrecision(pred, labels, c);
  r.macro_recall = MacroRecall(pred, labels, c);
  const Counts counts = Tally(pred, labels, c);
  const auto auc = PerClassAuc(scores, labels);
  for (int k = 0; k < c; ++k) {
    ClassMetrics m;
    m.name = class_names[k];
    m.support = static_cast<std::size_t>(counts.actual[k]);
    m.precision = Ratio(counts.tp[k], counts.predicted[k]);
    m.recall = Ratio(counts.tp[k], counts.actual[k]);
    m.f1 = F1(m.precision, m.recall);
    m.auc = auc[k];
    r.per_class.push_back(std::move(m));
  }
  return r;
}

std::string MetricsReport::ToJson() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["weighted_ovr_auc"] = weighted_ovr_auc;
  j["weighted_f1"] = weighted_f1;
  j["log_loss"] = log_loss;
  j["log_loss_hard"] = log_loss_hard;
  j["cohen_kappa"] = cohen_kappa;
  j["macro_precision"] = macro_precision;
  j["macro_recall"] = macro_recall;
  j["n"] = n;
  auto& pc = j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& m : per_class) {
    nlohmann::ordered_json e;
    e["class"] = m.name;
    e["support"] = m.support;
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["f1"] = m.f1;
    e["auc"] = std::isnan(m.auc) ? nlohmann::ordered_json(nullptr)
                                 : nlohmann::ordered_json(m.auc);
    pc.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace supercone
