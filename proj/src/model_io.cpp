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

#include "supercone/model_io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace supercone {
namespace {

using json = nlohmann::ordered_json;

void RejectUnknown(const json& obj, const std::set<std::string>& allowed,
                   const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T Get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

int GetInt(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

ExpertSpec ParseSpec(const json& j, const std::string& where) {
  RejectUnknown(j, {"kind", "params", "sources"}, where);
  if (!j.contains("kind")) throw ConfigError(where + ": missing 'kind'");
  const ExpertKind kind = ParseExpertKind(Get<std::string>(j, "kind", where));
  std::map<std::string, double> hyper;
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (!p.is_object()) throw ConfigError(where + ".params: expected an object");
    for (const auto& [key, value] : p.items()) {
      if (value.is_boolean()) {
        hyper[key] = value.get<bool>() ? 1.0 : 0.0;
      } else if (value.is_number()) {
        hyper[key] = value.get<double>();
      } else {
        throw ConfigError(where + ".params." + key + ": expected a number");
      }
    }
  }
  std::vector<int> sources;
  if (j.contains("sources")) sources = Get<std::vector<int>>(j, "sources", where);
  try {
    return ExpertSpec::Make(kind, hyper, sources);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

json SpecToJson(const ExpertSpec& spec) {
  json j;
  j["kind"] = ExpertKindName(spec.kind());
  json params = json::object();
  for (const auto& [key, value] : spec.hyper()) params[key] = value;
  j["params"] = params;
  j["sources"] = spec.sources();
  return j;
}

std::vector<std::vector<ExpertSpec>> ParseRoster(const json& j) {
  if (!j.is_array()) throw ConfigError("roster: expected a list");
  std::vector<std::vector<ExpertSpec>> roster;
  const bool per_level = !j.empty() && j.front().is_array();
  if (per_level) {
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (!j[k].is_array()) throw ConfigError("roster: mix of lists and experts");
      std::vector<ExpertSpec> level;
      for (std::size_t e = 0; e < j[k].size(); ++e) {
        level.push_back(ParseSpec(j[k][e], "roster[" + std::to_string(k) + "][" +
                                               std::to_string(e) + "]"));
      }
      roster.push_back(std::move(level));
    }
  } else if (!j.empty()) {
    std::vector<ExpertSpec> level;
    for (std::size_t e = 0; e < j.size(); ++e) {
      level.push_back(ParseSpec(j[e], "roster[" + std::to_string(e) + "]"));
    }
    roster.push_back(std::move(level));
  }
  return roster;
}

const char* InitName(InitMode mode) { return mode == InitMode::kZero ? "zero" : "fan_in"; }

InitMode ParseInit(const std::string& s) {
  if (s == "fan_in") return InitMode::kFanIn;
  if (s == "zero") return InitMode::kZero;
  throw ConfigError("init: expected 'fan_in' or 'zero', got '" + s + "'");
}

json StackToJson(const StackConfig& c) {
  json j;
  j["K"] = c.K;
  j["V"] = c.V;
  j["seed"] = c.seed;
  j["init"] = InitName(c.init);
  json roster = json::array();
  for (const auto& level : c.roster) {
    json l = json::array();
    for (const auto& spec : level) l.push_back(SpecToJson(spec));
    roster.push_back(l);
  }
  j["roster"] = roster;
  const auto& n = c.neural;
  j["neural"] = {{"inner_experts", n.inner_experts}, {"inner_layers", n.inner_layers},
                 {"width", n.width},                 {"gate_layers", n.gate_layers},
                 {"gate_width", n.gate_width},       {"comb_layers", n.comb_layers},
                 {"comb_width", n.comb_width}};
  const auto& o = c.optimizer;
  j["optimizer"] = {{"lr", o.lr},
                    {"epochs", o.epochs},
                    {"batch_size", o.batch_size},
                    {"full_batch", o.full_batch}};
  return j;
}

void ParseStackInto(const json& j, StackConfig& c) {
  if (j.contains("K")) c.K = GetInt(j, "K", "config");
  if (j.contains("V")) c.V = GetInt(j, "V", "config");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      throw ConfigError("config.seed: expected a non-negative integer");
    }
    if (j.at("seed").is_number_integer() && j.at("seed").get<long long>() < 0) {
      throw ConfigError("config.seed: expected a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("init")) c.init = ParseInit(Get<std::string>(j, "init", "config"));
  if (j.contains("roster")) c.roster = ParseRoster(j.at("roster"));
  if (j.contains("neural")) {
    const json& n = j.at("neural");
    RejectUnknown(n,
                  {"inner_experts", "inner_layers", "width", "gate_layers", "gate_width",
                   "comb_layers", "comb_width"},
                  "neural");
    auto set = [&](const char* key, int& field, int min) {
      if (!n.contains(key)) return;
      field = GetInt(n, key, "neural");
      if (field < min) {
        throw ConfigError(std::string("neural.") + key + ": must be >= " +
                          std::to_string(min));
      }
    };
    set("inner_experts", c.neural.inner_experts, 1);
    set("inner_layers", c.neural.inner_layers, 0);
    set("width", c.neural.width, 1);
    set("gate_layers", c.neural.gate_layers, 0);
    set("gate_width", c.neural.gate_width, 1);
    set("comb_layers", c.neural.comb_layers, 0);
    set("comb_width", c.neural.comb_width, 1);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    RejectUnknown(o, {"lr", "epochs", "batch_size", "full_batch"}, "optimizer");
    if (o.contains("lr")) c.optimizer.lr = Get<double>(o, "lr", "optimizer");
    if (o.contains("epochs")) c.optimizer.epochs = GetInt(o, "epochs", "optimizer");
    if (o.contains("batch_size")) {
      c.optimizer.batch_size = GetInt(o, "batch_size", "optimizer");
    }
    if (o.contains("full_batch")) {
      c.optimizer.full_batch = Get<bool>(o, "full_batch", "optimizer");
    }
  }
}

json ParseJson(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

json ArraysToJson(const std::vector<NamedArray>& arrays) {
  json out = json::array();
  for (const auto& a : arrays) {
    out.push_back({{"name", a.name}, {"shape", a.shape}, {"values", EncodeDoubles(a.values)}});
  }
  return out;
}

std::vector<NamedArray> ArraysFromJson(const json& j) {
  std::vector<NamedArray> out;
  for (const auto& a : j) {
    NamedArray arr;
    arr.name = a.at("name").get<std::string>();
    arr.shape = a.at("shape").get<std::vector<std::size_t>>();
    arr.values = DecodeDoubles(a.at("values").get<std::string>());
    out.push_back(std::move(arr));
  }
  return out;
}

std::string EncodeIds(const std::vector<InstanceId>& ids) {
  std::vector<double> bits(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) bits[i] = std::bit_cast<double>(ids[i]);
  return EncodeDoubles(bits);
}

std::vector<InstanceId> DecodeIds(const std::string& hex) {
  const auto bits = DecodeDoubles(hex);
  std::vector<InstanceId> ids(bits.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ids[i] = std::bit_cast<InstanceId>(bits[i]);
  }
  return ids;
}

}  // namespace

ExperimentConfig ParseExperimentConfig(const std::string& text) {
  const json j = ParseJson(text, "config");
  RejectUnknown(j,
                {"classes", "label_kind", "vocab_size", "K", "V", "seed", "init", "roster",
                 "neural", "optimizer", "data", "outputs"},
                "config");
  ExperimentConfig cfg;
  ParseStackInto(j, cfg.stack);
  if (j.contains("classes")) {
    cfg.classes = Get<std::vector<std::string>>(j, "classes", "config");
  }
  if (j.contains("label_kind")) {
    try {
      cfg.label_kind = ParseLabelKind(Get<std::string>(j, "label_kind", "config"));
    } catch (const Error& e) {
      throw ConfigError(std::string("config.label_kind: ") + e.what());
    }
    cfg.label_kind_set = true;
  }
  if (j.contains("vocab_size")) {
    const int v = GetInt(j, "vocab_size", "config");
    if (v < 1) throw ConfigError("config.vocab_size: must be >= 1");
    cfg.vocab_size = static_cast<std::size_t>(v);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    RejectUnknown(d, {"train", "test"}, "data");
    if (d.contains("train")) cfg.train_path = Get<std::string>(d, "train", "data");
    if (d.contains("test")) cfg.test_path = Get<std::string>(d, "test", "data");
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    RejectUnknown(o, {"model", "trace", "report"}, "outputs");
    if (o.contains("model")) cfg.model_path = Get<std::string>(o, "model", "outputs");
    if (o.contains("trace")) cfg.trace_path = Get<std::string>(o, "trace", "outputs");
    if (o.contains("report")) cfg.report_path = Get<std::string>(o, "report", "outputs");
  }
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  return ParseExperimentConfig(ReadTextFile(path, "config"));
}

std::string StackConfigToJson(const StackConfig& config) {
  return StackToJson(config).dump(2) + "\n";
}

std::string EncodeDoubles(std::span<const double> values) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(values.size() * 16, '0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int d = 15; d >= 0; --d) {
      out[i * 16 + d] = kDigits[bits & 0xf];
      bits >>= 4;
    }
  }
  return out;
}

std::vector<double> DecodeDoubles(const std::string& hex) {
  if (hex.size() % 16 != 0) throw Error("hex array length not a multiple of 16");
  std::vector<double> out(hex.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    const char* first = hex.data() + i * 16;
    const auto [ptr, ec] = std::from_chars(first, first + 16, bits, 16);
    if (ec != std::errc() || ptr != first + 16) {
      throw Error("bad hex digit in array");
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::string SerializeModel(const SuperConeModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["seed"] = model.config.seed;
  j["config"] = StackToJson(model.config);
  j["label_space"] = {{"classes", model.label_space.classes},
                      {"kind", LabelKindName(model.label_space.kind)}};
  j["vocab_size"] = model.vocab_size;
  json blocks = json::array();
  for (const auto& b : model.layout.blocks) {
    blocks.push_back({{"name", b.name},
                      {"offset", b.offset},
                      {"width", b.width},
                      {"level", b.level},
                      {"roster_index", b.roster_index}});
  }
  j["layout"] = {{"input_dim", model.layout.input_dim},
                 {"num_classes", model.layout.num_classes},
                 {"blocks", blocks}};
  j["meta"] = ArraysToJson(model.meta.Export());
  json stacks = json::array();
  for (const auto& level : model.stacks) {
    json l = json::array();
    for (const auto& e : level) {
      l.push_back({{"spec", SpecToJson(e.spec())},
                   {"input_width", e.input_width()},
                   {"num_classes", e.num_classes()},
                   {"trained_on", EncodeIds(e.trained_on())},
                   {"params", ArraysToJson(e.Params())}});
    }
    stacks.push_back(l);
  }
  j["experts"] = stacks;
  return j.dump(1) + "\n";
}

SuperConeModel DeserializeModel(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    const auto version = j.at("format_version").get<std::string>();
    if (version != kModelFormatVersion) {
      throw ConfigError("model: unsupported format_version '" + version + "'");
    }
    StackConfig config;
    ParseStackInto(j.at("config"), config);
    LabelSpace labels(j.at("label_space").at("classes").get<std::vector<std::string>>(),
                      ParseLabelKind(j.at("label_space").at("kind").get<std::string>()));
    BlockLayout layout;
    layout.input_dim = j.at("layout").at("input_dim").get<std::size_t>();
    layout.num_classes = j.at("layout").at("num_classes").get<std::size_t>();
    for (const auto& b : j.at("layout").at("blocks")) {
      layout.blocks.push_back({b.at("offset").get<std::size_t>(),
                               b.at("width").get<std::size_t>(), b.at("level").get<int>(),
                               b.at("roster_index").get<int>(),
                               b.at("name").get<std::string>()});
    }
    MetaStructure structure{layout.input_dim, layout.num_classes, layout.blocks.size(),
                            config.neural};
    MetaParams meta = MetaParams::Import(structure, ArraysFromJson(j.at("meta")));
    ExpertStacks stacks;
    for (const auto& level : j.at("experts")) {
      std::vector<TrainedExpert> experts;
      for (const auto& e : level) {
        experts.push_back(RestoreExpert(ParseSpec(e.at("spec"), "model expert"),
                                        e.at("input_width").get<std::size_t>(),
                                        e.at("num_classes").get<int>(),
                                        DecodeIds(e.at("trained_on").get<std::string>()),
                                        ArraysFromJson(e.at("params"))));
      }
      stacks.push_back(std::move(experts));
    }
    if (stacks.size() != static_cast<std::size_t>(config.K)) {
      throw ShapeError("model: expert levels do not match K");
    }
    return SuperConeModel{std::move(meta),
                          std::move(stacks),
                          std::move(layout),
                          std::move(labels),
                          j.at("vocab_size").get<std::size_t>(),
                          std::move(config)};
  } catch (const json::exception& e) {
    throw Error(std::string("model: malformed file: ") + e.what());
  }
}

void SaveModel(const SuperConeModel& model, const std::string& path) {
  WriteTextFile(path, SerializeModel(model));
}

SuperConeModel LoadModel(const std::string& path) {
  return DeserializeModel(ReadTextFile(path, "model"));
}

std::string ReadTextFile(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError(what + ": not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw Error("write failed: " + path);
}

}  // namespace supercone
