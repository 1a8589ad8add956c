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

// Experiment configuration and the versioned model file.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "supercone/dataio.hpp"
#include "supercone/metastack.hpp"

namespace supercone {

inline constexpr const char* kModelFormatVersion = "supercone-model/1";

// JSON experiment file. Every key is optional except the roster when K > 0;
// unknown keys are rejected.
//
//   {
//     "classes": ["-1", "+1"], "label_kind": "binary", "vocab_size": 123,
//     "K": 1, "V": 3, "seed": 7, "init": "fan_in",
//     "roster": [{"kind": "gbt", "params": {"rounds": 30}}, ...]
//               or one such list per level,
//     "neural": {"inner_experts": 3, "inner_layers": 3, "width": 32,
//                "gate_layers": 2, "gate_width": 32,
//                "comb_layers": 3, "comb_width": 32},
//     "optimizer": {"lr": 1e-4, "epochs": 30, "batch_size": 64,
//                   "full_batch": false},
//     "data": {"train": "a.libsvm", "test": "b.libsvm"},
//     "outputs": {"model": "m.json", "trace": "trace.csv",
//                 "report": "report.json"}
//   }
struct ExperimentConfig {
  StackConfig stack;
  std::vector<std::string> classes;  // empty: inferred from the data
  LabelKind label_kind = LabelKind::kBinary;
  bool label_kind_set = false;
  std::optional<std::size_t> vocab_size;
  std::string train_path;
  std::string test_path;
  std::string model_path;
  std::string trace_path;
  std::string report_path;
};

ExperimentConfig ParseExperimentConfig(const std::string& text);
ExperimentConfig LoadExperimentConfig(const std::string& path);
// Stack settings as config JSON text (the part ParseExperimentConfig reads).
std::string StackConfigToJson(const StackConfig& config);

// Doubles as IEEE-754 bit patterns, 16 lowercase hex digits each.
std::string EncodeDoubles(std::span<const double> values);
std::vector<double> DecodeDoubles(const std::string& hex);

std::string SerializeModel(const SuperConeModel& model);
SuperConeModel DeserializeModel(const std::string& text);
void SaveModel(const SuperConeModel& model, const std::string& path);
SuperConeModel LoadModel(const std::string& path);

std::string ReadTextFile(const std::string& path, const std::string& what);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace supercone
