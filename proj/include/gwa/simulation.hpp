// Copyright 2026 The gwa Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GWA_SIMULATION_HPP
#define GWA_SIMULATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gwa/grouping.hpp"
#include "gwa/mask.hpp"
#include "gwa/window.hpp"

// Analytical cost experiments: cost-vs-group-size sweeps over repeated random
// masks, and grouped-vs-dense FLOPs comparisons per stage. Everything here is
// exact integer cost arithmetic on top of the grouping module; no wall-clock
// or memory measurement.

namespace gwa {

// One stage of the default 4-stage hierarchical encoder. The mask unit grid
// is tokens/unit_span; all four defaults share a 7x7 unit grid so a single
// batch mask projects consistently onto every stage.
struct StageConfig {
  int id = 0;
  int tokens_h = 0;
  int tokens_w = 0;
  int window = 0;
  int unit_span = 1;
  int channels = 0;

  int units_h() const { return tokens_h / unit_span; }
  int units_w() const { return tokens_w / unit_span; }
  int num_windows() const { return (tokens_h / window) * (tokens_w / window); }

  StageGeometry geometry() const {
    return StageGeometry{tokens_h, tokens_w, window, 0, 0, channels, unit_span};
  }
};

inline std::array<StageConfig, 4> default_stages() {
  return {{
      {1, 56, 56, 7, 8, 128},
      {2, 28, 28, 7, 4, 256},
      {3, 14, 14, 7, 2, 512},
      {4, 7, 7, 7, 1, 1024},
  }};
}

inline StageConfig stage_config(int id) {
  for (const StageConfig& s : default_stages()) {
    if (s.id == id) return s;
  }
  throw std::invalid_argument("stage_config: stage id must be 1..4");
}

struct CurvePoint {
  int group_size = 0;
  double mean_flops = 0.0;
  double std_flops = 0.0;  // unbiased sample standard deviation
  int trials_valid = 0;
};

// Aggregated cost-vs-group-size sweep over repeated masks.
struct SweepStats {
  int stage = 0;
  int channels = 0;
  double ratio = 0.0;
  int trials = 0;
  int trials_skipped = 0;      // degenerate all-masked trials
  bool single_window = false;  // one local window: grouping unnecessary
  std::vector<CurvePoint> curve;     // union of per-trial ranges, ascending g_s
  std::vector<int> argmin_per_trial; // cheapest g_s per valid trial
  int mean_curve_argmin = 0;         // g_s minimizing the mean curve
};

namespace detail {

struct TrialCurve {
  bool valid = false;
  int min_gs = 0;
  std::vector<std::uint64_t> flops;  // for g_s = min_gs .. min_gs + size - 1
  int argmin_gs = 0;
};

inline TrialCurve run_trial(const StageConfig& stage, double ratio, std::uint64_t seed) {
  TrialCurve trial;
  const Mask mask = gen_batch_mask(seed, stage.units_h(), stage.units_w(), ratio);
  const TokenVisibility vis = expand_to_tokens(mask, stage.unit_span);
  const WindowLayout layout = partition_windows(stage.geometry());
  const VisibleWindows windows = drop_empty(visible_counts(layout, vis));
  if (windows.sizes.empty()) return trial;  // skipped, nothing visible

  const int max_size = *std::max_element(windows.sizes.begin(), windows.sizes.end());
  const std::int64_t total =
      std::accumulate(windows.sizes.begin(), windows.sizes.end(), std::int64_t{0});

  trial.valid = true;
  trial.min_gs = max_size;
  trial.flops.reserve(static_cast<std::size_t>(total - max_size + 1));
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (int g = max_size; g <= total; ++g) {
    const GroupPlan plan = partition(g, windows.sizes);
    const std::uint64_t cost = attention_cost(static_cast<std::uint64_t>(g),
                                              static_cast<std::uint64_t>(plan.num_groups()),
                                              static_cast<std::uint64_t>(stage.channels));
    trial.flops.push_back(cost);
    if (cost < best) {
      best = cost;
      trial.argmin_gs = g;
    }
  }
  return trial;
}

}  // namespace detail

// Cost curve of one stage over n_trials masks seeded seed, seed+1, ....
// Trials may run on several threads; aggregation always walks the stored
// per-trial results in trial order, so the statistics are bit-identical for
// any thread count.
inline SweepStats sweep_cost_curve(const StageConfig& stage, double ratio, int trials,
                                   std::uint64_t seed, int threads = 1) {
  if (trials < 1) {
    throw std::invalid_argument("sweep_cost_curve: need at least one trial");
  }
  if (stage.tokens_h % stage.window != 0 || stage.tokens_w % stage.window != 0) {
    throw std::invalid_argument("sweep_cost_curve: stage grid must be divisible by window");
  }
  if (stage.tokens_h % stage.unit_span != 0 || stage.tokens_w % stage.unit_span != 0) {
    throw std::invalid_argument("sweep_cost_curve: stage grid must be divisible by unit span");
  }

  std::vector<detail::TrialCurve> results(static_cast<std::size_t>(trials));
  const int workers = std::max(1, std::min(threads, trials));
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) {
      results[static_cast<std::size_t>(t)] = detail::run_trial(stage, ratio, seed + static_cast<std::uint64_t>(t));
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < trials; t += workers) {
          results[static_cast<std::size_t>(t)] =
              detail::run_trial(stage, ratio, seed + static_cast<std::uint64_t>(t));
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  SweepStats stats;
  stats.stage = stage.id;
  stats.channels = stage.channels;
  stats.ratio = ratio;
  stats.trials = trials;
  stats.single_window = stage.num_windows() == 1;

  int union_min = std::numeric_limits<int>::max();
  int union_max = 0;
  for (const auto& trial : results) {
    if (!trial.valid) continue;
    union_min = std::min(union_min, trial.min_gs);
    union_max = std::max(union_max, trial.min_gs + static_cast<int>(trial.flops.size()) - 1);
  }

  for (const auto& trial : results) {
    if (!trial.valid) {
      ++stats.trials_skipped;
      continue;
    }
    stats.argmin_per_trial.push_back(trial.argmin_gs);
  }
  if (stats.argmin_per_trial.empty()) return stats;  // every trial degenerate

  // Welford accumulation per group size, walked in trial order.
  const int span = union_max - union_min + 1;
  std::vector<int> counts(static_cast<std::size_t>(span), 0);
  std::vector<double> means(static_cast<std::size_t>(span), 0.0);
  std::vector<double> m2(static_cast<std::size_t>(span), 0.0);
  for (const auto& trial : results) {
    if (!trial.valid) continue;
    for (std::size_t i = 0; i < trial.flops.size(); ++i) {
      const std::size_t slot = static_cast<std::size_t>(trial.min_gs - union_min) + i;
      const double x = static_cast<double>(trial.flops[i]);
      const int n = ++counts[slot];
      const double delta = x - means[slot];
      means[slot] += delta / n;
      m2[slot] += delta * (x - means[slot]);
    }
  }

  stats.curve.reserve(static_cast<std::size_t>(span));
  double best_mean = std::numeric_limits<double>::infinity();
  for (int i = 0; i < span; ++i) {
    const std::size_t slot = static_cast<std::size_t>(i);
    if (counts[slot] == 0) continue;  // hole in the union of ranges
    CurvePoint point;
    point.group_size = union_min + i;
    point.mean_flops = means[slot];
    point.std_flops = counts[slot] > 1 ? std::sqrt(m2[slot] / (counts[slot] - 1)) : 0.0;
    point.trials_valid = counts[slot];
    if (point.mean_flops < best_mean) {
      best_mean = point.mean_flops;
      stats.mean_curve_argmin = point.group_size;
    }
    stats.curve.push_back(point);
  }
  return stats;
}

// Grouped-vs-dense attention FLOPs of one stage under one mask.
struct StageFlops {
  int stage = 0;
  int channels = 0;
  int num_windows = 0;
  int visible_tokens = 0;
  int optimal_group_size = 0;
  int num_groups = 0;
  std::uint64_t dense_flops = 0;    // all windows attend p*p tokens
  std::uint64_t grouped_flops = 0;  // optimal plan on visible tokens only
  double ratio = 0.0;               // grouped / dense
};

struct FlopsComparison {
  std::vector<StageFlops> stages;
  std::uint64_t total_dense = 0;
  std::uint64_t total_grouped = 0;
  double total_ratio = 0.0;
};

// One shared mask (the unit grids of all default stages coincide), expanded
// per stage; dense cost charges every window at full p*p occupancy.
inline FlopsComparison flops_comparison(std::span<const StageConfig> stages, double ratio,
                                        std::uint64_t seed) {
  FlopsComparison report;
  for (const StageConfig& stage : stages) {
    const Mask mask = gen_batch_mask(seed, stage.units_h(), stage.units_w(), ratio);
    const TokenVisibility vis = expand_to_tokens(mask, stage.unit_span);
    const WindowLayout layout = partition_windows(stage.geometry());
    const VisibleWindows windows = drop_empty(visible_counts(layout, vis));

    StageFlops entry;
    entry.stage = stage.id;
    entry.channels = stage.channels;
    entry.num_windows = static_cast<int>(layout.windows.size());
    entry.visible_tokens = vis.visible_count();
    entry.dense_flops = attention_cost(static_cast<std::uint64_t>(stage.window) * stage.window,
                                       static_cast<std::uint64_t>(entry.num_windows),
                                       static_cast<std::uint64_t>(stage.channels));
    if (!windows.sizes.empty()) {
      const GroupingResult result = optimal_grouping(windows.sizes, stage.channels);
      entry.optimal_group_size = result.plan.group_size;
      entry.num_groups = result.plan.num_groups();
      entry.grouped_flops = result.plan.cost_flops;
    }
    entry.ratio = static_cast<double>(entry.grouped_flops) / static_cast<double>(entry.dense_flops);
    report.total_dense += entry.dense_flops;
    report.total_grouped += entry.grouped_flops;
    report.stages.push_back(entry);
  }
  report.total_ratio =
      static_cast<double>(report.total_grouped) / static_cast<double>(report.total_dense);
  return report;
}

}  // namespace gwa

#endif  // GWA_SIMULATION_HPP
