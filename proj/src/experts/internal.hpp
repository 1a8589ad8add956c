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

#include <memory>
#include <vector>

#include "supercone/experts.hpp"

namespace supercone::experts_internal {

struct FitResult {
  std::shared_ptr<const ExpertModel> model;
  std::vector<double> loss_trace;
};

FitResult FitMajority(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitLogistic(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitNaiveBayes(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitKnn(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitCart(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitGbt(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitMeanAggregate(const ExpertSpec& spec, const TrainingSet& data);
FitResult FitPassthrough(const ExpertSpec& spec, const TrainingSet& data);

using Params = std::vector<NamedArray>;
std::shared_ptr<const ExpertModel> RestoreMajority(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestoreLogistic(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestoreNaiveBayes(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestoreKnn(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestoreCart(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestoreGbt(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestoreMeanAggregate(const ExpertSpec&, std::size_t, int, const Params&);
std::shared_ptr<const ExpertModel> RestorePassthrough(const ExpertSpec&, std::size_t, int, const Params&);

// Looks up a named array, checking its element count.
const NamedArray& FindArray(const std::vector<NamedArray>& params,
                            const std::string& name, std::size_t expected);

// Renormalizes `p` to the simplex, falling back to uniform when it carries
// no mass.
void Normalize(std::span<double> p);

}  // namespace supercone::experts_internal
