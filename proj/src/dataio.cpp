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

#include "supercone/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "supercone/rng.hpp"

namespace supercone {
namespace {

std::optional<double> ParseNumber(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) return std::nullopt;
  return value;
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

ConceptVector::ConceptVector(std::vector<ConceptEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!std::isfinite(entries_[i].intensity)) {
      throw Error("ConceptVector: non-finite intensity at concept " +
                  std::to_string(entries_[i].index));
    }
    if (i > 0 && entries_[i].index <= entries_[i - 1].index) {
      throw Error("ConceptVector: indices must be strictly increasing");
    }
  }
}

void ConceptVector::Densify(std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& e : entries_) {
    if (e.index >= out.size()) {
      throw ShapeError("concept index " + std::to_string(e.index) +
                       " outside vocabulary of size " +
                       std::to_string(out.size()));
    }
    out[e.index] = e.intensity;
  }
}

std::vector<double> ConceptVector::Densify(std::size_t width) const {
  std::vector<double> out(width);
  Densify(out);
  return out;
}

const char* LabelKindName(LabelKind kind) {
  switch (kind) {
    case LabelKind::kBinary:
      return "binary";
    case LabelKind::kMulticlass:
      return "multiclass";
    case LabelKind::kDiscretizedRange:
      return "discretized-range";
  }
  return "?";
}

LabelKind ParseLabelKind(const std::string& name) {
  if (name == "binary") return LabelKind::kBinary;
  if (name == "multiclass") return LabelKind::kMulticlass;
  if (name == "discretized-range") return LabelKind::kDiscretizedRange;
  throw ConfigError("unknown label kind '" + name + "'");
}

LabelSpace::LabelSpace(std::vector<std::string> c, LabelKind k)
    : classes(std::move(c)), kind(k) {
  if (classes.size() < 2) throw ConfigError("label space needs >= 2 classes");
  if (kind == LabelKind::kBinary && classes.size() != 2) {
    throw ConfigError("binary label space must have exactly 2 classes");
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (Find(classes[i]) == static_cast<int>(j)) {
        throw ConfigError("duplicate class identifier '" + classes[i] + "'");
      }
    }
  }
}

std::optional<int> LabelSpace::Find(const std::string& token) const {
  const auto numeric = ParseNumber(token);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == token) return static_cast<int>(i);
    if (numeric) {
      const auto other = ParseNumber(classes[i]);
      if (other && *other == *numeric) return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

Dataset::Dataset(std::size_t vocab_size, LabelSpace label_space,
                 std::vector<Instance> instances)
    : vocab_size_(vocab_size),
      label_space_(std::move(label_space)),
      instances_(std::move(instances)) {
  if (vocab_size_ == 0) throw Error("dataset: vocab_size must be positive");
  std::set<InstanceId> seen;
  for (const auto& inst : instances_) {
    if (inst.label < 0 || inst.label >= static_cast<int>(label_space_.size())) {
      throw Error("dataset: label out of range for instance " +
                  std::to_string(inst.id));
    }
    if (inst.concepts.extent() > vocab_size_) {
      throw Error("dataset: concept index beyond vocabulary in instance " +
                  std::to_string(inst.id));
    }
    if (!seen.insert(inst.id).second) {
      throw Error("dataset: duplicate instance id " + std::to_string(inst.id));
    }
  }
}

std::vector<int> Dataset::Labels() const {
  std::vector<int> out;
  out.reserve(instances_.size());
  for (const auto& inst : instances_) out.push_back(inst.label);
  return out;
}

std::vector<InstanceId> Dataset::Ids() const {
  std::vector<InstanceId> out;
  out.reserve(instances_.size());
  for (const auto& inst : instances_) out.push_back(inst.id);
  return out;
}

Matrix Dataset::Densify() const {
  Matrix out(instances_.size(), vocab_size_);
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    instances_[i].concepts.Densify(out.row(i));
  }
  return out;
}

Dataset Dataset::WithVocabSize(std::size_t vocab_size) const {
  return Dataset(vocab_size, label_space_, instances_);
}

Dataset Dataset::Head(std::size_t count) const {
  count = std::min(count, instances_.size());
  return Dataset(vocab_size_, label_space_,
                 std::vector<Instance>(instances_.begin(),
                                       instances_.begin() + count));
}

Dataset ParseLibsvm(std::istream& in, const LabelSpace& labels,
                    const ParseOptions& options) {
  std::vector<Instance> instances;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_extent = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    std::string_view rest(line);
    std::size_t pos = 0;
    auto next_token = [&](std::size_t& column) -> std::string_view {
      while (pos < rest.size() && (rest[pos] == ' ' || rest[pos] == '\t' ||
                                   rest[pos] == '\r')) {
        ++pos;
      }
      column = pos + 1;
      const std::size_t start = pos;
      while (pos < rest.size() && rest[pos] != ' ' && rest[pos] != '\t' &&
             rest[pos] != '\r') {
        ++pos;
      }
      return rest.substr(start, pos - start);
    };

    std::size_t column = 0;
    const std::string label_token(next_token(column));
    const auto label = labels.Find(label_token);
    if (!label) {
      throw ParseError(line_no, column,
                       "label '" + label_token + "' not in label map");
    }
    std::vector<ConceptEntry> entries;
    for (;;) {
      const std::string_view token = next_token(column);
      if (token.empty()) break;
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, column, "expected <index>:<value>");
      }
      const std::string_view idx_text = token.substr(0, colon);
      const std::string_view val_text = token.substr(colon + 1);
      std::uint64_t idx = 0;
      auto [iptr, iec] = std::from_chars(
          idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (iec != std::errc() || iptr != idx_text.data() + idx_text.size() ||
          idx_text.empty() || idx < 1 || idx > UINT32_MAX) {
        throw ParseError(line_no, column, "bad feature index");
      }
      const auto value = ParseNumber(val_text);
      if (!value || !std::isfinite(*value)) {
        throw ParseError(line_no, column + colon + 1, "bad feature value");
      }
      const auto index = static_cast<std::uint32_t>(idx - 1);
      if (!entries.empty()) {
        if (index == entries.back().index) {
          throw ParseError(line_no, column, "duplicate feature index");
        }
        if (index < entries.back().index) {
          throw ParseError(line_no, column,
                           "feature indices not strictly increasing");
        }
      }
      entries.push_back({index, *value});
    }
    ConceptVector concepts(std::move(entries));
    max_extent = std::max(max_extent, concepts.extent());
    if (options.vocab_size && concepts.extent() > *options.vocab_size) {
      throw ParseError(line_no, 1,
                       "feature index exceeds vocab size " +
                           std::to_string(*options.vocab_size));
    }
    instances.push_back(
        {std::move(concepts), *label, static_cast<InstanceId>(line_no - 1)});
  }
  const std::size_t vocab =
      options.vocab_size ? *options.vocab_size : std::max<std::size_t>(1, max_extent);
  return Dataset(vocab, labels, std::move(instances));
}

Dataset ParseLibsvmFile(const std::string& path, const LabelSpace& labels,
                        const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("dataset: not found: " + path);
  try {
    return ParseLibsvm(in, labels, options);
  } catch (const ParseError& e) {
    throw Error("dataset: parse error in " + path + ": " + e.what());
  }
}

namespace {

void CollectLabels(std::istream& in, std::set<std::string>& tokens) {
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    if (ss >> tok) tokens.insert(tok);
  }
}

LabelSpace LabelSpaceFromTokens(const std::set<std::string>& raw) {
  std::vector<std::string> tokens(raw.begin(), raw.end());
  const bool numeric = std::all_of(tokens.begin(), tokens.end(), [](auto& t) {
    return ParseNumber(t).has_value();
  });
  if (numeric) {
    std::stable_sort(tokens.begin(), tokens.end(), [](auto& a, auto& b) {
      return *ParseNumber(a) < *ParseNumber(b);
    });
    // "1" and "+1" are the same class.
    tokens.erase(std::unique(tokens.begin(), tokens.end(),
                             [](auto& a, auto& b) {
                               return *ParseNumber(a) == *ParseNumber(b);
                             }),
                 tokens.end());
  }
  if (tokens.size() < 2) {
    throw Error("dataset: need at least two distinct labels to infer classes");
  }
  const LabelKind kind =
      tokens.size() == 2 ? LabelKind::kBinary : LabelKind::kMulticlass;
  return LabelSpace(std::move(tokens), kind);
}

}  // namespace

LabelSpace InferLabelSpace(std::istream& in) {
  std::set<std::string> tokens;
  CollectLabels(in, tokens);
  return LabelSpaceFromTokens(tokens);
}

LabelSpace InferLabelSpaceFromFiles(const std::vector<std::string>& paths) {
  std::set<std::string> tokens;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("dataset: not found: " + path);
    CollectLabels(in, tokens);
  }
  return LabelSpaceFromTokens(tokens);
}

std::string SerializeLibsvm(const Dataset& dataset) {
  std::string out;
  for (const auto& inst : dataset.instances()) {
    out += dataset.label_space().classes[inst.label];
    for (const auto& e : inst.concepts.entries()) {
      out += ' ';
      out += std::to_string(e.index + 1);
      out += ':';
      out += FormatDouble(e.intensity);
    }
    out += '\n';
  }
  return out;
}

void WriteLibsvmFile(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << SerializeLibsvm(dataset);
}

FoldMap::FoldMap(int level, int num_folds, std::map<InstanceId, int> assignment)
    : level_(level), num_folds_(num_folds), assignment_(std::move(assignment)) {
  if (num_folds_ < 2) throw ConfigError("fold count V must be >= 2");
  std::vector<std::size_t> sizes(num_folds_ + 1, 0);
  for (const auto& [id, fold] : assignment_) {
    if (fold < 1 || fold > num_folds_) throw Error("fold out of range");
    ++sizes[fold];
  }
  for (int f = 1; f <= num_folds_; ++f) {
    if (sizes[f] == 0) throw Error("fold " + std::to_string(f) + " is empty");
  }
}

int FoldMap::FoldOf(InstanceId id) const {
  auto it = assignment_.find(id);
  if (it == assignment_.end()) {
    throw Error("unknown instance id " + std::to_string(id));
  }
  return it->second;
}

std::size_t FoldMap::FoldSize(int fold) const {
  std::size_t count = 0;
  for (const auto& [id, f] : assignment_) count += (f == fold);
  return count;
}

FoldMap AssignFolds(std::span<const InstanceId> ids, int num_folds, int level,
                    std::uint64_t seed) {
  if (num_folds < 2) throw ConfigError("fold count V must be >= 2");
  if (ids.size() < static_cast<std::size_t>(num_folds)) {
    throw ConfigError("cannot split " + std::to_string(ids.size()) +
                      " instances into " + std::to_string(num_folds) +
                      " folds");
  }
  std::vector<InstanceId> order(ids.begin(), ids.end());
  Rng rng(MixSeed(seed, static_cast<std::uint64_t>(level)));
  rng.Shuffle(std::span<InstanceId>(order));
  std::map<InstanceId, int> assignment;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!assignment.emplace(order[i], static_cast<int>(i % num_folds) + 1)
             .second) {
      throw Error("duplicate instance id " + std::to_string(order[i]));
    }
  }
  return FoldMap(level, num_folds, std::move(assignment));
}

FoldMap AssignFolds(std::size_t n, int num_folds, int level,
                    std::uint64_t seed) {
  std::vector<InstanceId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return AssignFolds(ids, num_folds, level, seed);
}

std::vector<InstanceId> FoldComplement(const FoldMap& folds, InstanceId id,
                                       const Dataset& dataset) {
  const int fold = folds.FoldOf(id);
  std::vector<InstanceId> out;
  for (const auto& inst : dataset.instances()) {
    if (folds.FoldOf(inst.id) != fold) out.push_back(inst.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> GaussianMixtureMean(const GaussianMixtureSpec& spec,
                                        int c) {
  std::vector<double> mean(spec.dim, 0.0);
  if (spec.num_classes == 2) {
    mean[0] = (c == 0 ? -0.5 : 0.5) * spec.class_separation;
  } else {
    const int axis = c % spec.dim;
    const double sign = (c / spec.dim) % 2 == 0 ? 1.0 : -1.0;
    mean[axis] = sign * spec.class_separation / std::sqrt(2.0);
  }
  return mean;
}

Dataset SynthGaussianMixture(const GaussianMixtureSpec& spec) {
  if (spec.num_classes < 2 || spec.dim < 1 ||
      spec.n < static_cast<std::size_t>(spec.num_classes)) {
    throw ConfigError("synth: need num_classes >= 2, dim >= 1, n >= classes");
  }
  if (spec.num_classes > 2 && spec.num_classes > 2 * spec.dim) {
    throw ConfigError("synth: more than 2*dim classes would share a mean");
  }
  if (!std::isfinite(spec.class_separation) || spec.class_separation < 0) {
    throw ConfigError("synth: separation must be finite and >= 0");
  }
  std::vector<std::vector<double>> means;
  for (int c = 0; c < spec.num_classes; ++c) {
    means.push_back(GaussianMixtureMean(spec, c));
  }
  Rng rng(MixSeed(spec.seed, 0x5e7d));
  std::vector<Instance> instances;
  instances.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int label = static_cast<int>(i % spec.num_classes);
    std::vector<ConceptEntry> entries(spec.dim);
    for (int d = 0; d < spec.dim; ++d) {
      entries[d] = {static_cast<std::uint32_t>(d), means[label][d] + rng.Normal()};
    }
    instances.push_back({ConceptVector(std::move(entries)), label, i});
  }
  std::vector<std::string> classes;
  for (int c = 0; c < spec.num_classes; ++c) classes.push_back(std::to_string(c));
  return Dataset(spec.dim,
                 LabelSpace(std::move(classes), spec.num_classes == 2
                                                    ? LabelKind::kBinary
                                                    : LabelKind::kMulticlass),
                 std::move(instances));
}

}  // namespace supercone
