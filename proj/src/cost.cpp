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

#include "supercone/cost.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "serving_plan.hpp"
#include "supercone/kernels.hpp"

namespace supercone {
namespace {

using Clock = std::chrono::steady_clock;

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double Micros(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

struct ThreadScope {
  int saved = kernels::ThreadCount();
  explicit ThreadScope(int n) { kernels::SetThreadCount(n); }
  ~ThreadScope() { kernels::SetThreadCount(saved); }
};

}  // namespace

CostReport BenchCost(const SuperConeModel& model, const Dataset& data, int repeat) {
  if (repeat < 1) throw UsageError("bench-cost: --repeat must be >= 1");
  if (data.empty()) throw Error("bench-cost: empty dataset");
  if (data.vocab_size() != model.vocab_size) {
    throw ShapeError("bench-cost: dataset vocabulary does not match the model");
  }
  ThreadScope sequential(1);

  const std::size_t d = model.layout.input_dim;
  const std::size_t c = model.layout.num_classes;
  const int K = model.config.K;
  std::vector<std::vector<internal::ResolvedExpert>> plan;
  std::vector<std::size_t> level_start;  // row offset of each level's first block
  {
    BlockLayout layout;
    layout.input_dim = d;
    layout.num_classes = c;
    for (int k = 1; k <= K; ++k) {
      plan.push_back(internal::Resolve(model.config.RosterAt(k), layout, k));
      level_start.push_back(layout.width());
      layout = internal::ExtendLayout(layout, model.config.RosterAt(k), k);
    }
  }

  CostReport report;
  report.instances = data.size();
  report.repeat = repeat;
  report.components.push_back({"input", 0.0});
  for (const auto& b : model.layout.blocks) report.components.push_back({b.name, 0.0});
  report.components.push_back({"complementary", 0.0});
  report.components.push_back({"combination", 0.0});
  report.components.push_back({"mixture", 0.0});
  const std::size_t num = report.components.size();
  const std::size_t comp_slot = num - 3;

  std::vector<std::vector<double>> samples(num);
  std::vector<double> totals;
  std::vector<double> row(model.layout.width());
  std::vector<double> gathered;
  std::vector<double> mixed(c);
  std::vector<double> acc(num);
  const auto n = static_cast<double>(data.size());
  volatile double sink = 0.0;

  for (int r = 0; r < repeat; ++r) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const auto pass_start = Clock::now();
    for (const auto& inst : data.instances()) {
      auto t0 = Clock::now();
      std::fill(row.begin(), row.end(), 0.0);
      inst.concepts.Densify(std::span<double>(row.data(), d));
      auto t1 = Clock::now();
      acc[0] += Micros(t0, t1);
      std::size_t slot = 1;
      for (int k = 0; k < K; ++k) {
        const std::size_t start = level_start[k];
        for (std::size_t j = 0; j < plan[k].size(); ++j, ++slot) {
          t0 = Clock::now();
          const auto& e = plan[k][j];
          std::span<double> out(row.data() + start + j * c, c);
          std::span<const double> in;
          if (e.input == internal::InputKind::kFullRow) {
            in = std::span<const double>(row.data(), start);
          } else if (e.input == internal::InputKind::kPrevBlock) {
            in = std::span<const double>(row.data() + e.block_offset, c);
          } else {
            gathered.clear();
            for (int s : e.siblings) {
              gathered.insert(gathered.end(), row.begin() + start + s * c,
                              row.begin() + start + (s + 1) * c);
            }
            in = gathered;
          }
          model.stacks[k][j].PredictInto(in, out);
          t1 = Clock::now();
          acc[slot] += Micros(t0, t1);
        }
      }
      const std::span<const double> features(row.data(), d);
      t0 = Clock::now();
      const ProbVector h = ForwardComplementary(model.meta, features);
      t1 = Clock::now();
      acc[comp_slot] += Micros(t0, t1);
      const std::vector<double> w = ForwardComb(model.meta, features);
      const auto t2 = Clock::now();
      acc[comp_slot + 1] += Micros(t1, t2);
      for (std::size_t y = 0; y < c; ++y) mixed[y] = w[0] * h[y];
      for (std::size_t t = 1; t < w.size(); ++t) {
        const double* block = row.data() + model.layout.blocks[t - 1].offset;
        for (std::size_t y = 0; y < c; ++y) mixed[y] += w[t] * block[y];
      }
      const auto t3 = Clock::now();
      acc[comp_slot + 2] += Micros(t2, t3);
      sink = sink + mixed[0];
    }
    totals.push_back(Micros(pass_start, Clock::now()) / n);
    for (std::size_t s = 0; s < num; ++s) samples[s].push_back(acc[s] / n);
  }

  for (std::size_t s = 0; s < num; ++s) {
    report.components[s].micros_per_instance = Median(samples[s]);
    report.component_sum += report.components[s].micros_per_instance;
  }
  report.total = Median(totals);
  report.overhead = report.total - report.component_sum;
  return report;
}

std::string CostReport::ToCsv() const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "component,micros_per_instance\n";
  for (const auto& c : components) out << c.name << ',' << c.micros_per_instance << '\n';
  out << "overhead," << overhead << '\n';
  out << "total," << total << '\n';
  return out.str();
}

}  // namespace supercone
