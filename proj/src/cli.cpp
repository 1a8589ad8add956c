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

#include "supercone/cli.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "supercone/cost.hpp"
#include "supercone/kernels.hpp"
#include "supercone/logging.hpp"
#include "supercone/metrics.hpp"
#include "supercone/model_io.hpp"
#include "supercone/rng.hpp"

namespace supercone {
namespace {

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("synth spec: bad value for '" + key + "': '" + text + "'");
  }
  return value;
}

Dataset LoadTrain(const ExperimentConfig& cfg) {
  LabelSpace labels;
  if (!cfg.classes.empty()) {
    LabelKind kind = cfg.label_kind;
    if (!cfg.label_kind_set && cfg.classes.size() > 2) kind = LabelKind::kMulticlass;
    labels = LabelSpace(cfg.classes, kind);
  } else {
    labels = InferLabelSpaceFromFiles({cfg.train_path});
    if (cfg.label_kind_set) labels = LabelSpace(labels.classes, cfg.label_kind);
  }
  ParseOptions options;
  options.vocab_size = cfg.vocab_size;
  return ParseLibsvmFile(cfg.train_path, labels, options);
}

Dataset LoadForModel(const SuperConeModel& model, const std::string& path) {
  ParseOptions options;
  options.vocab_size = model.vocab_size;
  return ParseLibsvmFile(path, model.label_space, options);
}

std::string TraceCsv(const std::vector<double>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) out << e + 1 << ',' << trace[e] << '\n';
  return out.str();
}

int CmdTrain(const std::string& config_path, std::string train_path, std::string out_path,
             std::string trace_path, const std::optional<std::uint64_t>& seed,
             std::ostream& out) {
  ExperimentConfig cfg = LoadExperimentConfig(config_path);
  if (!train_path.empty()) cfg.train_path = train_path;
  if (!out_path.empty()) cfg.model_path = out_path;
  if (!trace_path.empty()) cfg.trace_path = trace_path;
  if (seed) cfg.stack.seed = *seed;
  if (cfg.train_path.empty()) throw UsageError("train: no training data (--train)");
  if (cfg.model_path.empty()) throw UsageError("train: no model output path (--out)");
  if (cfg.trace_path.empty()) cfg.trace_path = cfg.model_path + ".trace.csv";
  cfg.stack.Validate();

  const Dataset train = LoadTrain(cfg);
  TrainReport report;
  const SuperConeModel model = TrainSuperCone(cfg.stack, train, &report);
  SaveModel(model, cfg.model_path);
  WriteTextFile(cfg.trace_path, TraceCsv(report.loss_trace));
  out << "trained on " << train.size() << " instances, " << model.num_candidates()
      << " candidates";
  if (!report.loss_trace.empty()) out << ", final loss " << report.loss_trace.back();
  out << "\nmodel: " << cfg.model_path << "\ntrace: " << cfg.trace_path << "\n";
  return 0;
}

int CmdEvaluate(const std::string& model_path, const std::string& test_path,
                const std::string& report_path, std::ostream& out) {
  const SuperConeModel model = LoadModel(model_path);
  const Dataset test = LoadForModel(model, test_path);
  if (test.empty()) throw Error("evaluate: empty dataset");
  const Matrix scores = PredictFinalBatch(model, test);
  const MetricsReport report = Evaluate(scores, test.Labels(), model.label_space.classes);
  if (report_path.empty()) {
    out << report.ToJson();
  } else {
    WriteTextFile(report_path, report.ToJson());
    out << "accuracy " << report.accuracy << ", weighted_ovr_auc "
        << report.weighted_ovr_auc << "\nreport: " << report_path << "\n";
  }
  return 0;
}

int CmdAttention(const std::string& model_path, const std::string& data_path,
                 const std::string& out_path, std::ostream& out) {
  const SuperConeModel model = LoadModel(model_path);
  const Dataset data = LoadForModel(model, data_path);
  const AttentionReport report = ComputeAttention(model, data);
  std::ostringstream csv;
  csv.precision(17);
  csv << "expert_name,mean_weight\n";
  for (std::size_t t = 0; t < report.names.size(); ++t) {
    csv << report.names[t] << ',' << report.weights[t] << '\n';
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    WriteTextFile(out_path, csv.str());
  }
  return 0;
}

int CmdBenchCost(const std::string& model_path, const std::string& data_path, int repeat,
                 const std::string& out_path, std::ostream& out) {
  const SuperConeModel model = LoadModel(model_path);
  const Dataset data = LoadForModel(model, data_path);
  const CostReport report = BenchCost(model, data, repeat);
  if (out_path.empty()) {
    out << report.ToCsv();
  } else {
    WriteTextFile(out_path, report.ToCsv());
    out << "total " << report.total << " us/instance\n";
  }
  return 0;
}

int CmdSynth(const std::string& spec_text, const std::string& prefix, std::ostream& out) {
  const SynthSpec spec = ParseSynthSpec(spec_text);
  GaussianMixtureSpec test_spec = spec.train;
  test_spec.n = spec.test_n;
  test_spec.seed = MixSeed(spec.train.seed, 0x7e57);
  const std::string train_path = prefix + ".train.libsvm";
  const std::string test_path = prefix + ".test.libsvm";
  WriteLibsvmFile(SynthGaussianMixture(spec.train), train_path);
  WriteLibsvmFile(SynthGaussianMixture(test_spec), test_path);
  out << train_path << "\n" << test_path << "\n";
  return 0;
}

}  // namespace

SynthSpec ParseSynthSpec(const std::string& text) {
  SynthSpec spec;
  bool test_n_set = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("synth spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "classes") {
      spec.train.num_classes = ParseNumber<int>(key, value);
    } else if (key == "dim") {
      spec.train.dim = ParseNumber<int>(key, value);
    } else if (key == "n") {
      spec.train.n = ParseNumber<std::size_t>(key, value);
    } else if (key == "test_n") {
      spec.test_n = ParseNumber<std::size_t>(key, value);
      test_n_set = true;
    } else if (key == "sep") {
      spec.train.class_separation = ParseNumber<double>(key, value);
    } else if (key == "seed") {
      spec.train.seed = ParseNumber<std::uint64_t>(key, value);
    } else {
      throw UsageError("synth spec: unknown key '" + key + "'");
    }
  }
  if (!test_n_set) spec.test_n = spec.train.n;
  if (spec.train.num_classes < 2) throw UsageError("synth spec: classes must be >= 2");
  if (spec.train.dim < 1) throw UsageError("synth spec: dim must be >= 1");
  if (spec.train.n == 0 || spec.test_n == 0) throw UsageError("synth spec: n must be >= 1");
  return spec;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stacked heterogeneous experts with a learned combination network",
               "supercone"};
  app.require_subcommand(1);
  int threads = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "Worker threads (0: runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string config, train, model_out, trace;
  std::optional<std::uint64_t> seed;
  auto* train_cmd = app.add_subcommand("train", "Fit a model from a config file");
  train_cmd->add_option("--config", config, "Experiment JSON")->required();
  train_cmd->add_option("--train", train, "Training data (LIBSVM)");
  train_cmd->add_option("--out", model_out, "Model output path");
  train_cmd->add_option("--trace", trace, "Loss trace CSV (default: <out>.trace.csv)");
  train_cmd->add_option("--seed", seed, "Override the config seed");

  std::string model, test, report;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on labeled data");
  eval_cmd->add_option("--model", model, "Model file")->required();
  eval_cmd->add_option("--test", test, "Test data (LIBSVM)")->required();
  eval_cmd->add_option("--report", report, "Metrics JSON output (default: stdout)");

  std::string data, out_path;
  auto* att_cmd = app.add_subcommand("attention", "Mean combination weight per candidate");
  att_cmd->add_option("--model", model, "Model file")->required();
  att_cmd->add_option("--data", data, "Data (LIBSVM)")->required();
  att_cmd->add_option("--out", out_path, "CSV output (default: stdout)");

  int repeat = 5;
  auto* bench_cmd = app.add_subcommand("bench-cost", "Per-instance serving cost");
  bench_cmd->add_option("--model", model, "Model file")->required();
  bench_cmd->add_option("--data", data, "Data (LIBSVM)")->required();
  bench_cmd->add_option("--repeat", repeat, "Timed passes; the median is reported");
  bench_cmd->add_option("--out", out_path, "CSV output (default: stdout)");

  std::string spec;
  auto* synth_cmd = app.add_subcommand("synth", "Write a Gaussian mixture train/test pair");
  synth_cmd->add_option("--spec", spec, "e.g. classes=2,dim=2,n=400,sep=4,seed=1")
      ->required();
  synth_cmd->add_option("--out", out_path, "Output prefix")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  SetLogLevel(verbose ? LogLevel::kInfo : LogLevel::kWarning);
  if (threads > 0) kernels::SetThreadCount(threads);
  try {
    if (train_cmd->parsed()) return CmdTrain(config, train, model_out, trace, seed, out);
    if (eval_cmd->parsed()) return CmdEvaluate(model, test, report, out);
    if (att_cmd->parsed()) return CmdAttention(model, data, out_path, out);
    if (bench_cmd->parsed()) return CmdBenchCost(model, data, repeat, out_path, out);
    if (synth_cmd->parsed()) return CmdSynth(spec, out_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const NotFoundError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace supercone
