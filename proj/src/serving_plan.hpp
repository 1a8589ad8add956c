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

// Input wiring of roster experts, shared by training, serving and the cost
// benchmark.

#include <span>
#include <vector>

#include "supercone/metastack.hpp"

namespace supercone::internal {

enum class InputKind { kFullRow, kPrevBlock, kSiblings };

struct ResolvedExpert {
  const ExpertSpec* spec = nullptr;
  InputKind input = InputKind::kFullRow;
  std::size_t block_offset = 0;  // kPrevBlock
  std::vector<int> siblings;     // kSiblings
};

std::vector<ResolvedExpert> Resolve(std::span<const ExpertSpec> roster,
                                    const BlockLayout& prev, int level);

BlockLayout ExtendLayout(const BlockLayout& prev, std::span<const ExpertSpec> roster,
                         int level);

// Layout after levels 0..level of the model.
BlockLayout LayoutThrough(const SuperConeModel& model, int level);

}  // namespace supercone::internal
