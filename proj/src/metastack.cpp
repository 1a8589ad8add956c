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

#include "supercone/metastack.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <optional>

#include "supercone/kernels.hpp"
#include "supercone/logging.hpp"
#include "supercone/rng.hpp"
#include "serving_plan.hpp"

namespace supercone {
namespace internal {

std::vector<ResolvedExpert> Resolve(std::span<const ExpertSpec> roster,
                                    const BlockLayout& prev, int level) {
  if (roster.empty()) {
    throw ConfigError("level " + std::to_string(level) + ": empty roster");
  }
  std::vector<ResolvedExpert> out(roster.size());
  for (std::size_t j = 0; j < roster.size(); ++j) {
    const ExpertSpec& spec = roster[j];
    out[j].spec = &spec;
    const std::string where =
        "level " + std::to_string(level) + " expert " + std::to_string(j) + " (" +
        spec.name() + ")";
    if (spec.kind() == ExpertKind::kPassthrough) {
      const auto b = static_cast<std::size_t>(spec.sources()[0]);
      if (b >= prev.blocks.size()) {
        throw ConfigError(where + ": passthrough source block " + std::to_string(b) +
                          " does not exist at the previous level");
      }
      out[j].input = InputKind::kPrevBlock;
      out[j].block_offset = prev.blocks[b].offset;
    } else if (spec.kind() == ExpertKind::kMeanAggregate) {
      out[j].input = InputKind::kSiblings;
      if (spec.sources().empty()) {
        for (std::size_t s = 0; s < roster.size(); ++s) {
          if (!roster[s].derived()) out[j].siblings.push_back(static_cast<int>(s));
        }
      } else {
        out[j].siblings = spec.sources();
      }
      if (out[j].siblings.empty()) {
        throw ConfigError(where + ": mean_aggregate has nothing to average");
      }
      for (int s : out[j].siblings) {
        if (s < 0 || static_cast<std::size_t>(s) >= roster.size() ||
            roster[s].derived()) {
          throw ConfigError(where + ": mean_aggregate source " + std::to_string(s) +
                            " must be a non-derived expert of the same level");
        }
      }
    }
  }
  return out;
}

BlockLayout ExtendLayout(const BlockLayout& prev, std::span<const ExpertSpec> roster,
                         int level) {
  BlockLayout out = prev;
  std::map<std::string, int> seen;
  std::size_t offset = prev.width();
  for (std::size_t j = 0; j < roster.size(); ++j) {
    std::string name = "L" + std::to_string(level) + "." + roster[j].name();
    const int count = ++seen[name];
    if (count > 1) name += "#" + std::to_string(count);
    out.blocks.push_back({offset, prev.num_classes, level, static_cast<int>(j), name});
    offset += prev.num_classes;
  }
  return out;
}

BlockLayout LayoutThrough(const SuperConeModel& model, int level) {
  BlockLayout layout;
  layout.input_dim = model.layout.input_dim;
  layout.num_classes = model.layout.num_classes;
  for (int k = 1; k <= level; ++k) {
    layout = ExtendLayout(layout, model.config.RosterAt(k), k);
  }
  return layout;
}

}  // namespace internal

namespace {

using internal::ExtendLayout;
using internal::InputKind;
using internal::Resolve;
using internal::ResolvedExpert;


// Input matrix of a non-sibling expert.
Matrix ExpertInput(const ResolvedExpert& r, const Matrix& rows, std::size_t classes) {
  if (r.input == InputKind::kPrevBlock) return SliceColumns(rows, r.block_offset, classes);
  return rows;
}

Matrix SiblingInput(const ResolvedExpert& r, const std::vector<Matrix>& blocks,
                    std::size_t classes) {
  const std::size_t n = blocks[r.siblings[0]].rows;
  Matrix out(n, r.siblings.size() * classes);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < r.siblings.size(); ++s) {
      const auto src = blocks[r.siblings[s]].row(i);
      std::copy(src.begin(), src.end(), out.row(i).begin() + s * classes);
    }
  }
  return out;
}

AugmentedDataset Append(const AugmentedDataset& prev, const BlockLayout& layout,
                        const std::vector<Matrix>& blocks, int level) {
  AugmentedDataset out;
  out.level = level;
  out.layout = layout;
  out.labels = prev.labels;
  out.ids = prev.ids;
  const std::size_t n = prev.size();
  const std::size_t c = layout.num_classes;
  out.rows = Matrix(n, layout.width());
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.rows.row(i);
    const auto src = prev.rows.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto blk = blocks[b].row(i);
      std::copy(blk.begin(), blk.end(), dst.begin() + prev.rows.cols + b * c);
    }
  }
  return out;
}

std::vector<std::size_t> Gather(const std::vector<int>& fold_of, int fold, bool inside) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if ((fold_of[i] == fold) == inside) out.push_back(i);
  }
  return out;
}

template <typename T>
std::vector<T> Pick(const std::vector<T>& values, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(values[i]);
  return out;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Level-by-level expert evaluation on a dense feature matrix.
Matrix AugmentBatch(const SuperConeModel& model, const Matrix& features) {
  const auto& cfg = model.config;
  const std::size_t c = model.layout.num_classes;
  AugmentedDataset cur;
  cur.rows = features;
  cur.layout.input_dim = model.layout.input_dim;
  cur.layout.num_classes = c;
  cur.labels.assign(features.rows, 0);
  cur.ids.assign(features.rows, 0);
  for (int k = 1; k <= cfg.K; ++k) {
    const auto& roster = cfg.RosterAt(k);
    const auto resolved = Resolve(roster, cur.layout, k);
    const auto& experts = model.stacks[k - 1];
    std::vector<Matrix> blocks(roster.size());
    for (std::size_t j = 0; j < roster.size(); ++j) {
      if (resolved[j].input == InputKind::kSiblings) continue;
      blocks[j] = experts[j].PredictBatch(ExpertInput(resolved[j], cur.rows, c));
    }
    for (std::size_t j = 0; j < roster.size(); ++j) {
      if (resolved[j].input != InputKind::kSiblings) continue;
      blocks[j] = experts[j].PredictBatch(SiblingInput(resolved[j], blocks, c));
    }
    const BlockLayout next = ExtendLayout(cur.layout, roster, k);
    cur = Append(cur, next, blocks, k);
  }
  return std::move(cur.rows);
}

}  // namespace

AugmentedDataset AugmentedDataset::FromDataset(const Dataset& data) {
  AugmentedDataset out;
  out.level = 0;
  out.rows = data.Densify();
  out.layout.input_dim = data.vocab_size();
  out.layout.num_classes = data.num_classes();
  out.labels = data.Labels();
  out.ids = data.Ids();
  return out;
}

const std::vector<ExpertSpec>& StackConfig::RosterAt(int level) const {
  if (level < 1 || level > K) throw ConfigError("roster level out of range");
  if (roster.size() == 1) return roster[0];
  return roster.at(level - 1);
}

void StackConfig::Validate() const {
  if (K < 0) throw ConfigError("K must be >= 0");
  if (V < 2) throw ConfigError("V must be >= 2");
  if (K > 0) {
    if (roster.empty()) throw ConfigError("roster must be non-empty when K > 0");
    if (roster.size() != 1 && roster.size() != static_cast<std::size_t>(K)) {
      throw ConfigError("roster must list one level or exactly K levels");
    }
    for (const auto& level : roster) {
      if (level.empty()) throw ConfigError("roster level is empty");
    }
  }
  if (!(optimizer.lr > 0) || !std::isfinite(optimizer.lr)) {
    throw ConfigError("optimizer.lr must be > 0");
  }
  if (optimizer.epochs < 0) throw ConfigError("optimizer.epochs must be >= 0");
  if (optimizer.batch_size < 1) throw ConfigError("optimizer.batch_size must be >= 1");
}

MetaLevelResult BuildMetaLevel(int level, const AugmentedDataset& prev,
                               std::span<const ExpertSpec> roster,
                               const FoldMap& folds, std::uint64_t seed) {
  if (folds.num_folds() < 2) throw ConfigError("V must be >= 2");
  if (prev.level != level - 1) {
    throw Error("BuildMetaLevel: previous dataset is level " +
                std::to_string(prev.level) + ", expected " + std::to_string(level - 1));
  }
  const std::size_t n = prev.size();
  const std::size_t c = prev.layout.num_classes;
  const int num_folds = folds.num_folds();
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[i] = folds.FoldOf(prev.ids[i]);
  if (folds.assignment().size() != n) {
    throw Error("BuildMetaLevel: fold map does not match the dataset");
  }
  const auto resolved = Resolve(roster, prev.layout, level);
  const BlockLayout layout = ExtendLayout(prev.layout, roster, level);

  std::vector<std::vector<std::size_t>> inside(num_folds + 1);
  std::vector<std::vector<std::size_t>> outside(num_folds + 1);
  for (int v = 1; v <= num_folds; ++v) {
    inside[v] = Gather(fold_of, v, true);
    outside[v] = Gather(fold_of, v, false);
  }

  std::vector<Matrix> blocks(roster.size(), Matrix(n, c));
  struct Job {
    std::size_t expert;
    int fold;
  };
  std::vector<Job> base_jobs;
  std::vector<Job> sibling_jobs;
  for (std::size_t j = 0; j < roster.size(); ++j) {
    for (int v = 1; v <= num_folds; ++v) {
      (resolved[j].input == InputKind::kSiblings ? sibling_jobs : base_jobs)
          .push_back({j, v});
    }
  }

  MetaLevelResult result;
  std::vector<ReplicaTrace> traces(base_jobs.size() + sibling_jobs.size());
  std::vector<std::string> job_warnings(traces.size());

  auto run_job = [&](std::size_t slot, const Job& job, const Matrix& source) {
    const auto& train_rows = outside[job.fold];
    const auto& test_rows = inside[job.fold];
    ReplicaTrace& trace = traces[slot];
    trace.level = level;
    trace.roster_index = static_cast<int>(job.expert);
    trace.fold = job.fold;
    trace.predicted = Pick(prev.ids, test_rows);
    Matrix& block = blocks[job.expert];
    try {
      const Matrix x_train = SelectRows(source, train_rows);
      const auto y_train = Pick(prev.labels, train_rows);
      const auto id_train = Pick(prev.ids, train_rows);
      const TrainedExpert model =
          FitExpert(*resolved[job.expert].spec,
                    TrainingSet{x_train, y_train, id_train, static_cast<int>(c)},
                    MixSeed(MixSeed(seed, level), job.expert * 1024 + job.fold));
      trace.trained_on = model.trained_on();
      const Matrix pred = model.PredictBatch(SelectRows(source, test_rows));
      for (std::size_t r = 0; r < test_rows.size(); ++r) {
        const auto src = pred.row(r);
        std::copy(src.begin(), src.end(), block.row(test_rows[r]).begin());
      }
    } catch (const FitError& e) {
      trace.failed = true;
      job_warnings[slot] = layout.blocks[prev.layout.blocks.size() + job.expert].name +
                           " fold " + std::to_string(job.fold) + ": " + e.what() +
                           "; using a uniform block";
      for (auto r : test_rows) {
        auto row = block.row(r);
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(c));
      }
    }
  };

  // Expert inputs are materialized once per expert, before the parallel loop.
  std::vector<Matrix> sources(roster.size());
  for (std::size_t j = 0; j < roster.size(); ++j) {
    if (resolved[j].input == InputKind::kPrevBlock) {
      sources[j] = ExpertInput(resolved[j], prev.rows, c);
    }
  }
  auto source_of = [&](std::size_t j) -> const Matrix& {
    return resolved[j].input == InputKind::kPrevBlock ? sources[j] : prev.rows;
  };

  std::exception_ptr failure;
  const auto jobs = static_cast<std::ptrdiff_t>(base_jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::ThreadCount())
  for (std::ptrdiff_t s = 0; s < jobs; ++s) {
    try {
      run_job(s, base_jobs[s], source_of(base_jobs[s].expert));
    } catch (...) {
#pragma omp critical(supercone_meta_level_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t s = 0; s < sibling_jobs.size(); ++s) {
    const Job& job = sibling_jobs[s];
    run_job(base_jobs.size() + s, job, SiblingInput(resolved[job.expert], blocks, c));
  }

  for (auto& w : job_warnings) {
    if (!w.empty()) {
      LogWarning(w);
      result.warnings.push_back(std::move(w));
    }
  }
  result.replicas = std::move(traces);
  result.data = Append(prev, layout, blocks, level);
  return result;
}

ProbVector HTrainForward(const MetaParams& params, std::span<const double> row,
                         const BlockLayout& layout) {
  const auto& s = params.structure();
  if (layout.input_dim != s.input_dim || layout.num_classes != s.num_classes ||
      layout.blocks.size() != s.num_blocks) {
    throw ShapeError("h_train: layout does not match meta parameters");
  }
  if (row.size() != layout.width()) throw ShapeError("h_train: row width mismatch");
  return ForwardMixture(params, row);
}

MetaTrainResult MetaTrain(const AugmentedDataset& aug, const StackConfig& config) {
  if (aug.size() == 0) throw Error("meta_train: empty meta-training set");
  MetaStructure structure;
  structure.input_dim = aug.layout.input_dim;
  structure.num_classes = aug.layout.num_classes;
  structure.num_blocks = aug.layout.blocks.size();
  structure.neural = config.neural;
  MetaTrainResult result{MetaParams::Create(structure, MixSeed(config.seed, 0x3e7a),
                                            config.init),
                         0.0,
                         {}};
  MetaParams& params = result.params;
  params.FitInputScaler(aug.rows);
  result.initial_loss = ComputeLoss(params, aug.rows, aug.labels);
  if (!std::isfinite(result.initial_loss)) {
    throw NumericError("meta_train: non-finite initial loss");
  }

  const std::size_t n = aug.size();
  const std::size_t batch =
      config.optimizer.full_batch ? n
                                  : std::min<std::size_t>(n, config.optimizer.batch_size);
  AdamState adam(params.ParameterCount());
  AdamConfig adam_config;
  adam_config.lr = config.optimizer.lr;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(MixSeed(config.seed, 0xba7c));
  for (int epoch = 1; epoch <= config.optimizer.epochs; ++epoch) {
    if (!config.optimizer.full_batch) rng.Shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += batch, ++batch_index) {
      const std::size_t end = std::min(n, begin + batch);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Matrix rows = SelectRows(aug.rows, idx);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = aug.labels[idx[i]];
      LossAndGradients lg;
      try {
        lg = ComputeLossAndGradients(params, rows, labels);
      } catch (const NumericError&) {
        throw NumericError("meta_train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index) +
                           " (lr=" + std::to_string(adam_config.lr) + ")");
      }
      for (double g : lg.gradients) {
        if (!std::isfinite(g)) {
          throw NumericError("meta_train: non-finite gradient at epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index));
        }
      }
      epoch_loss += lg.loss * static_cast<double>(idx.size());
      AdamStep(adam, params.values(), lg.gradients, adam_config);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    LogInfo("meta-train epoch " + std::to_string(epoch) + " loss " +
            std::to_string(result.loss_trace.back()));
  }
  return result;
}

AdaptResult AdaptExperts(const StackConfig& config,
                         std::span<const AugmentedDataset> levels) {
  config.Validate();
  if (levels.size() < static_cast<std::size_t>(config.K)) {
    throw Error("adapt: need meta-training levels 0..K-1");
  }
  AdaptResult result;
  for (int k = 1; k <= config.K; ++k) {
    const AugmentedDataset& support = levels[k - 1];
    const auto& roster = config.RosterAt(k);
    const auto resolved = Resolve(roster, support.layout, k);
    const std::size_t c = support.layout.num_classes;
    std::vector<std::optional<TrainedExpert>> fitted(roster.size());
    std::vector<Matrix> blocks(roster.size());
    std::exception_ptr failure;
    std::vector<std::size_t> base;
    for (std::size_t j = 0; j < roster.size(); ++j) {
      if (resolved[j].input != InputKind::kSiblings) base.push_back(j);
    }
    auto fit = [&](std::size_t j, const Matrix& x) {
      try {
        fitted[j] = FitExpert(*resolved[j].spec,
                              TrainingSet{x, support.labels, support.ids,
                                          static_cast<int>(c)},
                              MixSeed(MixSeed(config.seed, 0xada0 + k), j));
      } catch (const std::exception& e) {
        throw Error("adapt: level " + std::to_string(k) + " expert " + std::to_string(j) +
                    " (" + resolved[j].spec->name() + "): " + e.what());
      }
      blocks[j] = fitted[j]->PredictBatch(x);
    };
    const auto jobs = static_cast<std::ptrdiff_t>(base.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::ThreadCount())
    for (std::ptrdiff_t s = 0; s < jobs; ++s) {
      try {
        const std::size_t j = base[s];
        fit(j, ExpertInput(resolved[j], support.rows, c));
      } catch (...) {
#pragma omp critical(supercone_adapt_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t j = 0; j < roster.size(); ++j) {
      if (resolved[j].input == InputKind::kSiblings) {
        fit(j, SiblingInput(resolved[j], blocks, c));
      }
    }
    std::vector<TrainedExpert> level_experts;
    for (auto& f : fitted) level_experts.push_back(std::move(*f));
    result.stacks.push_back(std::move(level_experts));
    LogInfo("adapted " + std::to_string(roster.size()) + " serving experts at level " +
            std::to_string(k));
  }
  result.top = levels[std::min<std::size_t>(config.K, levels.size() - 1)];
  return result;
}

namespace {

std::vector<AugmentedDataset> BuildLevels(const StackConfig& config, const Dataset& train,
                                          TrainReport* report) {
  std::vector<AugmentedDataset> levels;
  levels.push_back(AugmentedDataset::FromDataset(train));
  for (int k = 1; k <= config.K; ++k) {
    const FoldMap folds = AssignFolds(levels.back().ids, config.V, k, config.seed);
    MetaLevelResult built = BuildMetaLevel(k, levels.back(), config.RosterAt(k), folds,
                                           MixSeed(config.seed, 0x1e7e1 + k));
    if (report) {
      report->replicas.insert(report->replicas.end(), built.replicas.begin(),
                              built.replicas.end());
      report->warnings.insert(report->warnings.end(), built.warnings.begin(),
                              built.warnings.end());
    }
    levels.push_back(std::move(built.data));
    LogInfo("level " + std::to_string(k) + ": " + std::to_string(built.replicas.size()) +
            " out-of-fold replicas, row width " + std::to_string(levels.back().rows.cols));
  }
  return levels;
}

}  // namespace

AdaptResult AdaptExperts(const StackConfig& config, const Dataset& train) {
  config.Validate();
  if (train.empty()) throw Error("adapt: empty training data");
  const auto levels = BuildLevels(config, train, nullptr);
  return AdaptExperts(config, levels);
}

std::vector<std::string> SuperConeModel::CandidateNames() const {
  std::vector<std::string> names{"complementary"};
  for (const auto& b : layout.blocks) names.push_back(b.name);
  return names;
}

SuperConeModel TrainSuperCone(const StackConfig& config, const Dataset& train,
                              TrainReport* report) {
  config.Validate();
  if (train.empty()) throw Error("train: empty training data");
  auto start = std::chrono::steady_clock::now();
  std::vector<AugmentedDataset> levels = BuildLevels(config, train, report);
  if (report) report->seconds_meta_levels = Seconds(start);

  start = std::chrono::steady_clock::now();
  MetaTrainResult meta = MetaTrain(levels.back(), config);
  if (report) {
    report->seconds_meta_train = Seconds(start);
    report->loss_trace = meta.loss_trace;
    report->initial_loss = meta.initial_loss;
  }

  start = std::chrono::steady_clock::now();
  AdaptResult adapted = AdaptExperts(config, levels);
  if (report) report->seconds_adapt = Seconds(start);

  SuperConeModel model{std::move(meta.params),
                       std::move(adapted.stacks),
                       levels.back().layout,
                       train.label_space(),
                       train.vocab_size(),
                       config};
  if (report && report->keep_levels) report->levels = std::move(levels);
  return model;
}

std::vector<double> AugmentRow(const SuperConeModel& model,
                               std::span<const double> features) {
  if (features.size() != model.vocab_size) {
    throw ShapeError("predict: feature width " + std::to_string(features.size()) +
                     " != vocabulary " + std::to_string(model.vocab_size));
  }
  Matrix x(1, features.size());
  std::copy(features.begin(), features.end(), x.data.begin());
  return AugmentBatch(model, x).data;
}

ProbVector PredictFinal(const SuperConeModel& model, const ConceptVector& c) {
  if (c.extent() > model.vocab_size) {
    throw ShapeError("predict: concept index beyond vocabulary " +
                     std::to_string(model.vocab_size));
  }
  const auto row = AugmentRow(model, c.Densify(model.vocab_size));
  return ForwardMixture(model.meta, row);
}

Matrix PredictFinalBatch(const SuperConeModel& model, const Dataset& data) {
  if (data.vocab_size() != model.vocab_size) {
    throw ShapeError("predict: dataset vocabulary " + std::to_string(data.vocab_size()) +
                     " != model vocabulary " + std::to_string(model.vocab_size));
  }
  const Matrix rows = AugmentBatch(model, data.Densify());
  const std::size_t c = model.layout.num_classes;
  Matrix out(rows.rows, c);
  const auto n = static_cast<std::ptrdiff_t>(rows.rows);
#pragma omp parallel for schedule(static) num_threads(kernels::ThreadCount())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const ProbVector p = ForwardMixture(model.meta, rows.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

std::vector<Matrix> PredictCandidates(const SuperConeModel& model, const Dataset& data) {
  if (data.vocab_size() != model.vocab_size) {
    throw ShapeError("predict: vocabulary mismatch");
  }
  const Matrix rows = AugmentBatch(model, data.Densify());
  const std::size_t c = model.layout.num_classes;
  const std::size_t d = model.layout.input_dim;
  std::vector<Matrix> out(model.num_candidates(), Matrix(rows.rows, c));
  const auto n = static_cast<std::ptrdiff_t>(rows.rows);
#pragma omp parallel for schedule(static) num_threads(kernels::ThreadCount())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = rows.row(i);
    const ProbVector h = ForwardComplementary(model.meta, row.first(d));
    std::copy(h.begin(), h.end(), out[0].row(i).begin());
  }
  for (std::size_t b = 0; b < model.layout.blocks.size(); ++b) {
    out[b + 1] = SliceColumns(rows, model.layout.blocks[b].offset, c);
  }
  return out;
}

AttentionReport ComputeAttention(const SuperConeModel& model, const Dataset& data) {
  if (data.empty()) throw Error("attention: empty dataset");
  if (data.vocab_size() != model.vocab_size) {
    throw ShapeError("attention: vocabulary mismatch");
  }
  AttentionReport report;
  report.names = model.CandidateNames();
  report.weights.assign(model.num_candidates(), 0.0);
  for (const auto& inst : data.instances()) {
    const auto w = ForwardComb(model.meta, inst.concepts.Densify(model.vocab_size));
    for (std::size_t t = 0; t < w.size(); ++t) report.weights[t] += w[t];
  }
  for (double& w : report.weights) w /= static_cast<double>(data.size());
  return report;
}

}  // namespace supercone
