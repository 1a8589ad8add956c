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

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "supercone/common.hpp"

namespace supercone {

struct ConceptEntry {
  std::uint32_t index = 0;
  double intensity = 0.0;
  bool operator==(const ConceptEntry&) const = default;
};

// Sparse concept vector. Indices are strictly increasing and every
// intensity is finite; both are enforced by the constructor.
class ConceptVector {
 public:
  ConceptVector() = default;
  explicit ConceptVector(std::vector<ConceptEntry> entries);

  const std::vector<ConceptEntry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  // One past the largest index, 0 if empty.
  std::size_t extent() const {
    return entries_.empty() ? 0 : entries_.back().index + 1;
  }
  // Writes the dense form into `out`; missing concepts are zero.
  void Densify(std::span<double> out) const;
  std::vector<double> Densify(std::size_t width) const;

  bool operator==(const ConceptVector&) const = default;

 private:
  std::vector<ConceptEntry> entries_;
};

enum class LabelKind { kBinary, kMulticlass, kDiscretizedRange };

const char* LabelKindName(LabelKind kind);
LabelKind ParseLabelKind(const std::string& name);

// Ordered set of class identifiers. Class index i is classes[i]; for
// discretized ranges that order is the range order.
struct LabelSpace {
  std::vector<std::string> classes;
  LabelKind kind = LabelKind::kBinary;

  LabelSpace() = default;
  LabelSpace(std::vector<std::string> classes, LabelKind kind);
  std::size_t size() const { return classes.size(); }
  // Finds the class whose identifier matches `token`. Numeric identifiers
  // compare by value, so "1" matches "+1".
  std::optional<int> Find(const std::string& token) const;
  bool operator==(const LabelSpace&) const = default;
};

struct Instance {
  ConceptVector concepts;
  int label = 0;
  InstanceId id = 0;
  bool operator==(const Instance&) const = default;
};

// Immutable labeled sample: vocabulary size, label space and instances.
class Dataset {
 public:
  Dataset(std::size_t vocab_size, LabelSpace label_space,
          std::vector<Instance> instances);

  std::size_t vocab_size() const { return vocab_size_; }
  const LabelSpace& label_space() const { return label_space_; }
  std::size_t num_classes() const { return label_space_.size(); }
  const std::vector<Instance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  std::vector<int> Labels() const;
  std::vector<InstanceId> Ids() const;
  // n x vocab_size dense feature matrix.
  Matrix Densify() const;
  // Same label space and instances, wider vocabulary.
  Dataset WithVocabSize(std::size_t vocab_size) const;
  // Leading `count` instances.
  Dataset Head(std::size_t count) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t vocab_size_;
  LabelSpace label_space_;
  std::vector<Instance> instances_;
};

struct ParseOptions {
  // When set, the dataset vocabulary; an index at or beyond it is an error.
  std::optional<std::size_t> vocab_size;
};

// Parses LIBSVM text (`<label> <idx>:<val> ...`, 1-based strictly increasing
// indices). Instance ids are 0-based physical line numbers; blank lines are
// skipped.
Dataset ParseLibsvm(std::istream& in, const LabelSpace& labels,
                    const ParseOptions& options = {});
Dataset ParseLibsvmFile(const std::string& path, const LabelSpace& labels,
                        const ParseOptions& options = {});

// Collects the distinct label tokens of a LIBSVM file, ordered numerically
// when all are numeric and lexicographically otherwise.
LabelSpace InferLabelSpace(std::istream& in);
LabelSpace InferLabelSpaceFromFiles(const std::vector<std::string>& paths);

// Lossless writer: values are printed with 17 significant digits.
std::string SerializeLibsvm(const Dataset& dataset);
void WriteLibsvmFile(const Dataset& dataset, const std::string& path);

// Cross-validation fold assignment for one stacking level. Folds are
// numbered 1..num_folds.
class FoldMap {
 public:
  FoldMap(int level, int num_folds, std::map<InstanceId, int> assignment);

  int level() const { return level_; }
  int num_folds() const { return num_folds_; }
  int FoldOf(InstanceId id) const;
  bool Contains(InstanceId id) const { return assignment_.count(id) > 0; }
  std::size_t FoldSize(int fold) const;
  const std::map<InstanceId, int>& assignment() const { return assignment_; }
  bool operator==(const FoldMap&) const = default;

 private:
  int level_;
  int num_folds_;
  std::map<InstanceId, int> assignment_;
};

// Seeded shuffle followed by round-robin dealing, so fold sizes differ by at
// most one. Ids are taken in the given order before shuffling.
FoldMap AssignFolds(std::span<const InstanceId> ids, int num_folds, int level,
                    std::uint64_t seed);
// Convenience overload over ids 0..n-1.
FoldMap AssignFolds(std::size_t n, int num_folds, int level,
                    std::uint64_t seed);

// Ids of `dataset` whose fold differs from the fold of `id`, ascending.
std::vector<InstanceId> FoldComplement(const FoldMap& folds, InstanceId id,
                                       const Dataset& dataset);

struct GaussianMixtureSpec {
  int num_classes = 2;
  int dim = 2;
  std::size_t n = 100;
  double class_separation = 2.0;
  std::uint64_t seed = 0;
};

// Class-balanced isotropic unit-variance Gaussian clusters. Two classes sit
// at +-separation/2 on axis 0; with more classes, class c sits at distance
// separation/sqrt(2) from the origin on axis c mod dim (sign alternating each
// wrap), so orthogonal class pairs are `separation` apart. Instance i has
// class i mod num_classes.
Dataset SynthGaussianMixture(const GaussianMixtureSpec& spec);

// Mean of class c in the mixture above, for oracles.
std::vector<double> GaussianMixtureMean(const GaussianMixtureSpec& spec, int c);

}  // namespace supercone
