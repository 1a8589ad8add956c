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

// Per-instance serving cost, measured sequentially one instance at a time.

#include <string>
#include <vector>

#include "supercone/dataio.hpp"
#include "supercone/metastack.hpp"

namespace supercone {

struct CostComponent {
  std::string name;
  double micros_per_instance = 0.0;  // median over passes
};

struct CostReport {
  std::size_t instances = 0;
  int repeat = 0;
  // input, one entry per expert block, complementary, combination, mixture.
  std::vector<CostComponent> components;
  double component_sum = 0.0;
  double overhead = 0.0;  // total - component_sum
  double total = 0.0;     // median whole-pass time per instance

  // CSV: component,micros_per_instance with overhead and total rows last.
  std::string ToCsv() const;
};

CostReport BenchCost(const SuperConeModel& model, const Dataset& data, int repeat);

}  // namespace supercone
