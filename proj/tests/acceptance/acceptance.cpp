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

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance --data-dir DIR --work-dir DIR --cli PATH [--only AC1,AC5]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "../metric_oracle.hpp"
#include "../nn_oracle.hpp"
#include "../test_util.hpp"
#include "supercone/metastack.hpp"
#include "supercone/metrics.hpp"
#include "supercone/model_io.hpp"

namespace supercone {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string data_dir;
  std::string work_dir;
  std::string cli;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

double SecondsSince(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::vector<ExpertSpec> DeskRoster() {
  return testing::Roster({ExpertKind::kLogistic, ExpertKind::kGbt, ExpertKind::kCartTree,
                          ExpertKind::kKnn, ExpertKind::kNaiveBayes, ExpertKind::kMajority,
                          ExpertKind::kMeanAggregate});
}

StackConfig DefaultStack(std::vector<ExpertSpec> roster, std::uint64_t seed) {
  StackConfig cfg;
  cfg.K = 1;
  cfg.V = 3;
  cfg.roster = {std::move(roster)};
  cfg.seed = seed;
  return cfg;
}

struct Split {
  Dataset train;
  Dataset test;
};

Split LoadBenchmark(const Options& o, const std::string& name, std::size_t vocab) {
  const std::string train = o.data_dir + "/" + name + ".train.libsvm";
  const std::string test = o.data_dir + "/" + name + ".test.libsvm";
  for (const auto& p : {train, test}) {
    if (!fs::exists(p)) {
      throw NotFoundError(p + " (generate it with tools/prepare_datasets.py)");
    }
  }
  const LabelSpace labels({"-1", "+1"}, LabelKind::kBinary);
  ParseOptions opt;
  opt.vocab_size = vocab;
  return {ParseLibsvmFile(train, labels, opt), ParseLibsvmFile(test, labels, opt)};
}

Outcome Ac1(const Options& o) {
  const Split d = LoadBenchmark(o, "a9a", 123);
  const auto start = std::chrono::steady_clock::now();
  const SuperConeModel model = TrainSuperCone(DefaultStack(DeskRoster(), 1), d.train);
  const Matrix scores = PredictFinalBatch(model, d.test);
  const double secs = SecondsSince(start);
  const auto y = d.test.Labels();
  const double acc = Accuracy(ArgmaxLabels(scores), y);
  const double auc = WeightedOvrAuc(scores, y);
  return {acc >= 0.84 && auc >= 0.89 && secs <= 900,
          Fmt("acc=%.4f (>=0.84) auc=%.4f (>=0.89) time=%.0fs (<=900)", acc, auc, secs)};
}

Outcome Ac2(const Options& o) {
  const Split d = LoadBenchmark(o, "madelon", 500);
  const auto start = std::chrono::steady_clock::now();
  const SuperConeModel model = TrainSuperCone(DefaultStack(DeskRoster(), 1), d.train);
  const auto cands = PredictCandidates(model, d.test);
  const Matrix scores = PredictFinalBatch(model, d.test);
  const double secs = SecondsSince(start);
  const auto y = d.test.Labels();
  const double acc = Accuracy(ArgmaxLabels(scores), y);
  double best = 0.0;
  std::string best_name;
  const auto names = model.CandidateNames();
  for (std::size_t t = 1; t < cands.size(); ++t) {
    const double a = Accuracy(ArgmaxLabels(cands[t]), y);
    if (a > best) {
      best = a;
      best_name = names[t];
    }
  }
  return {acc >= best - 0.02 && acc >= 0.55 && secs <= 600,
          Fmt("acc=%.4f best_expert=%.4f (need >= best-0.02 and >=0.55) time=%.0fs (<=600)",
              acc, best, secs) +
              " best=" + best_name};
}

Outcome Ac3(const Options&) {
  struct Fixture {
    std::string name;
    Dataset data;
    std::vector<ExpertSpec> roster;
  };
  using testing::Gaussian;
  using testing::Roster;
  std::vector<Fixture> fixtures;
  fixtures.push_back({"binary-sep2", Gaussian(2, 2, 200, 2.0, 1),
                      Roster({ExpertKind::kLogistic, ExpertKind::kKnn, ExpertKind::kMajority})});
  fixtures.push_back({"3class-sep3", Gaussian(3, 2, 240, 3.0, 2),
                      Roster({ExpertKind::kNaiveBayes, ExpertKind::kCartTree,
                              ExpertKind::kMeanAggregate})});
  fixtures.push_back({"4class-dim3-sep1", Gaussian(4, 3, 200, 1.0, 3),
                      Roster({ExpertKind::kGbt, ExpertKind::kLogistic, ExpertKind::kKnn})});
  fixtures.push_back({"binary-sep4", Gaussian(2, 4, 150, 4.0, 4),
                      Roster({ExpertKind::kMajority, ExpertKind::kNaiveBayes})});
  bool pass = true;
  std::ostringstream detail;
  double worst = -1e9;
  for (const auto& f : fixtures) {
    StackConfig cfg = DefaultStack(f.roster, 7);
    cfg.optimizer.full_batch = true;
    cfg.optimizer.epochs = 500;
    cfg.optimizer.lr = 1e-2;
    const auto l0 = AugmentedDataset::FromDataset(f.data);
    const auto l1 = BuildMetaLevel(1, l0, cfg.RosterAt(1), AssignFolds(l0.ids, 3, 1, 7), 7).data;
    const MetaTrainResult r = MetaTrain(l1, cfg);
    const double meta = ComputeLoss(r.params, l1.rows, l1.labels);
    const std::size_t c = l1.layout.num_classes;
    double best = 1e300;
    for (const auto& b : l1.layout.blocks) {
      best = std::min(best, LogLoss(SliceColumns(l1.rows, b.offset, c), l1.labels));
    }
    Matrix h(l1.size(), c);
    for (std::size_t i = 0; i < l1.size(); ++i) {
      const auto p = ForwardComplementary(r.params, l1.rows.row(i).first(l1.layout.input_dim));
      std::copy(p.begin(), p.end(), h.row(i).begin());
    }
    best = std::min(best, LogLoss(h, l1.labels));
    const bool ok = meta <= best * 1.05;
    pass = pass && ok;
    worst = std::max(worst, meta / best - 1.0);
    detail << f.name << Fmt(" %.4f/%.4f", meta, best) << (ok ? "" : "!") << "; ";
  }
  return {pass, detail.str() + Fmt("worst excess=%+.2f%% (<=5%%)", worst * 100)};
}

Outcome Ac4(const Options&) {
  auto gap = [](std::size_t n, std::uint64_t seed) {
    const Dataset train = testing::Gaussian(2, 2, n, 2.0, MixSeed(seed, n));
    const Dataset test = testing::Gaussian(2, 2, 4000, 2.0, MixSeed(seed, 0x7e57));
    const auto roster = testing::Roster({ExpertKind::kLogistic, ExpertKind::kNaiveBayes,
                                         ExpertKind::kKnn, ExpertKind::kGbt});
    const SuperConeModel model = TrainSuperCone(DefaultStack(roster, seed), train);
    const auto y = test.Labels();
    const auto cands = PredictCandidates(model, test);
    double best = 1e300;
    for (std::size_t t = 1; t < cands.size(); ++t) best = std::min(best, LogLoss(cands[t], y));
    return std::fabs(LogLoss(PredictFinalBatch(model, test), y) - best);
  };
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  std::vector<double> small, large;
  for (std::uint64_t s = 1; s <= 11; ++s) {
    small.push_back(gap(250, s));
    large.push_back(gap(4000, s));
  }
  const double a = median(small);
  const double b = median(large);
  return {b < a, Fmt("median gap n=250: %.4f, n=4000: %.4f", a, b)};
}

Outcome Ac5(const Options&) {
  double worst = 0.0;
  std::size_t coords = 0;
  int configs = 0;
  std::string where;
  for (std::uint64_t seed = 1000; seed < 1024; ++seed, ++configs) {
    auto c = testing::RandomGradCase(seed);
    const auto r = testing::CheckGradients(c);
    coords += r.coordinates;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = r.worst;
    }
  }
  return {worst < 1e-4 && configs >= 20,
          Fmt("%.0f configs, %.0f coordinates, max rel error %.2e (<1e-4)", configs,
              static_cast<double>(coords), worst) +
              (worst < 1e-4 ? "" : " at " + where)};
}

Outcome Ac6(const Options&) {
  std::size_t violations = 0;
  std::size_t replicas = 0;
  std::size_t checked = 0;
  const auto roster = testing::Roster({ExpertKind::kLogistic, ExpertKind::kKnn,
                                       ExpertKind::kCartTree, ExpertKind::kMeanAggregate});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset data = testing::Gaussian(3, 3, 120, 1.5, seed);
    for (int K : {1, 2}) {
      for (int V : {2, 3, 5}) {
        AugmentedDataset cur = AugmentedDataset::FromDataset(data);
        for (int k = 1; k <= K; ++k) {
          const FoldMap folds = AssignFolds(cur.ids, V, k, seed);
          MetaLevelResult r = BuildMetaLevel(k, cur, roster, folds, seed);
          for (const auto& rep : r.replicas) {
            ++replicas;
            const std::set<InstanceId> trained(rep.trained_on.begin(), rep.trained_on.end());
            for (InstanceId id : rep.predicted) {
              ++checked;
              violations += trained.count(id);
            }
          }
          cur = std::move(r.data);
        }
      }
    }
  }
  return {violations == 0 && replicas > 0,
          Fmt("%.0f violations over %.0f replicas, %.0f predictions checked",
              static_cast<double>(violations), static_cast<double>(replicas),
              static_cast<double>(checked))};
}

Outcome Ac7(const Options&) {
  Rng rng(0xac7);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + rng.UniformInt(191);
    const int c = 2 + static_cast<int>(rng.UniformInt(4));
    const Matrix s = testing::RandomProbRows(n, c, rng);
    auto y = testing::RandomLabels(n, c, rng);
    y[0] = 0;
    y[1] = 1;
    const auto pred = ArgmaxLabels(s);
    const testing::Confusion cm(pred, y, c);
    worst = std::max({worst, std::fabs(WeightedOvrAuc(s, y) - testing::PairWeightedAuc(s, y)),
                      std::fabs(WeightedF1(pred, y, c) - testing::OracleWeightedF1(cm)),
                      std::fabs(CohenKappa(pred, y, c) - testing::OracleKappa(cm)),
                      std::fabs(LogLoss(s, y) - testing::OracleLogLoss(s, y))});
  }
  return {worst <= 1e-9, Fmt("50 cases, max abs deviation %.2e (<=1e-9)", worst)};
}

int Shell(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

std::string Quote(const std::string& s) { return "'" + s + "'"; }

// Shared by AC8 and AC10: synthetic data and a small config in the work dir.
void PrepareCliInputs(const Options& o) {
  fs::create_directories(o.work_dir);
  const std::string prefix = o.work_dir + "/g";
  if (Shell(Quote(o.cli) + " synth --spec classes=3,dim=4,n=300,test_n=300,sep=3,seed=3 --out " +
            Quote(prefix)) != 0) {
    throw Error("synth command failed");
  }
  WriteTextFile(o.work_dir + "/cfg.json", R"({
  "K": 2, "V": 3, "seed": 11,
  "roster": [{"kind": "logistic"}, {"kind": "gbt", "params": {"rounds": 20}},
             {"kind": "knn"}, {"kind": "naive_bayes"}, {"kind": "mean_aggregate"}],
  "optimizer": {"lr": 0.001, "epochs": 10}
})");
}

std::string TrainAndEvaluate(const Options& o, const std::string& tag) {
  const std::string model = o.work_dir + "/" + tag + ".model.json";
  const std::string report = o.work_dir + "/" + tag + ".report.json";
  if (Shell(Quote(o.cli) + " train --config " + Quote(o.work_dir + "/cfg.json") + " --train " +
            Quote(o.work_dir + "/g.train.libsvm") + " --out " + Quote(model)) != 0) {
    throw Error("train command failed");
  }
  if (Shell(Quote(o.cli) + " evaluate --model " + Quote(model) + " --test " +
            Quote(o.work_dir + "/g.test.libsvm") + " --report " + Quote(report)) != 0) {
    throw Error("evaluate command failed");
  }
  return model;
}

Outcome Ac8(const Options& o) {
  PrepareCliInputs(o);
  const std::string a = TrainAndEvaluate(o, "run1");
  const std::string b = TrainAndEvaluate(o, "run2");
  const bool same_model = ReadTextFile(a, "model") == ReadTextFile(b, "model");
  const std::string ra = ReadTextFile(o.work_dir + "/run1.report.json", "report");
  const bool same_report = ra == ReadTextFile(o.work_dir + "/run2.report.json", "report");
  const double acc = nlohmann::json::parse(ra)["accuracy"].get<double>();
  return {same_model && same_report,
          std::string("model files ") + (same_model ? "identical" : "DIFFER") + ", reports " +
              (same_report ? "identical" : "DIFFER") + Fmt(" (acc %.4f)", acc)};
}

Outcome Ac9(const Options&) {
  const Dataset train = testing::Gaussian(2, 2, 400, 4.0, 91);
  const Dataset test = testing::Gaussian(2, 2, 4000, 4.0, 92);
  // Monte-Carlo Bayes accuracy: the optimal rule is the sign of axis 0.
  Rng rng(93);
  std::size_t hit = 0;
  const std::size_t draws = 1000000;
  for (std::size_t i = 0; i < draws; ++i) hit += rng.Normal() + 2.0 > 0.0;
  const double bayes = static_cast<double>(hit) / draws;
  const auto start = std::chrono::steady_clock::now();
  const auto roster = testing::Roster({ExpertKind::kLogistic, ExpertKind::kGbt,
                                       ExpertKind::kKnn, ExpertKind::kNaiveBayes,
                                       ExpertKind::kMeanAggregate});
  const SuperConeModel model = TrainSuperCone(DefaultStack(roster, 9), train);
  const double secs = SecondsSince(start);
  const double acc = Accuracy(ArgmaxLabels(PredictFinalBatch(model, test)), test.Labels());
  return {acc >= 0.95 && secs < 30,
          Fmt("acc=%.4f (>=0.95, Bayes %.4f) train=%.2fs (<30)", acc, bayes, secs)};
}

Outcome Ac10(const Options& o) {
  if (!fs::exists(o.work_dir + "/run1.model.json")) {
    PrepareCliInputs(o);
    TrainAndEvaluate(o, "run1");
  }
  const std::string csv_path = o.work_dir + "/cost.csv";
  if (Shell(Quote(o.cli) + " bench-cost --model " + Quote(o.work_dir + "/run1.model.json") +
            " --data " + Quote(o.work_dir + "/g.test.libsvm") + " --repeat 5 --out " +
            Quote(csv_path)) != 0) {
    throw Error("bench-cost command failed");
  }
  std::istringstream csv(ReadTextFile(csv_path, "cost report"));
  std::string line;
  std::getline(csv, line);
  double sum = 0.0;
  double total = -1.0;
  int components = 0;
  bool positive = true;
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    const std::string name = line.substr(0, comma);
    const double v = std::stod(line.substr(comma + 1));
    if (name == "total") {
      total = v;
    } else if (name != "overhead") {
      sum += v;
      ++components;
      positive = positive && v >= 0.0;
    }
  }
  const double gap = std::fabs(total - sum) / total;
  return {total > 0 && components >= 4 && positive && gap <= 0.10,
          Fmt("total=%.2fus/instance over %.0f components, sum=%.2fus, gap=%.1f%% (<=10%%)",
              total, components, sum, gap * 100)};
}

}  // namespace
}  // namespace supercone

int main(int argc, char** argv) {
  using namespace supercone;
  CLI::App app{"Acceptance criteria runner"};
  Options o;
  std::vector<std::string> only;
  app.add_option("--data-dir", o.data_dir, "Directory with the benchmark LIBSVM files")
      ->required();
  app.add_option("--work-dir", o.work_dir, "Scratch directory")->required();
  app.add_option("--cli", o.cli, "Path to the supercone executable")->required();
  app.add_option("--only", only, "Subset, e.g. AC1,AC5")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>> checks{
      {"AC1 a9a accuracy/AUC", Ac1},
      {"AC2 madelon dominance", Ac2},
      {"AC3 oracle inequality", Ac3},
      {"AC4 shrinking gap", Ac4},
      {"AC5 gradient check", Ac5},
      {"AC6 no leakage", Ac6},
      {"AC7 metric oracles", Ac7},
      {"AC8 determinism", Ac8},
      {"AC9 synthetic sanity", Ac9},
      {"AC10 cost report", Ac10},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    const std::string id = name.substr(0, name.find(' '));
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome r;
    try {
      r = check(o);
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
