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

#ifndef GWA_GROUPING_HPP
#define GWA_GROUPING_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Partitioning of uneven visible-token windows into equal-capacity groups.
//
// The problem is a multiple subset-sum with identical capacities: the group
// size g_s is the knapsack capacity, window sizes are both the weights and
// the values, and the number of groups is unbounded. It is solved greedily by
// repeated single-knapsack DP: each round packs a maximum-fill subset of the
// remaining windows into a fresh group. The group size itself is chosen by
// sweeping every candidate capacity and keeping the one whose partition has
// the lowest attention FLOPs.

namespace gwa {

// Assignment of window indices to equal-capacity groups.
struct GroupPlan {
  int group_size = 0;                   // slot capacity g_s of every group
  std::vector<std::vector<int>> groups; // window indices, in selection order
  std::vector<int> fill;                // per group: sum of member sizes
  std::vector<int> padding;             // per group: group_size - fill
  std::uint64_t cost_flops = 0;         // attention FLOPs; 0 until costed

  int num_groups() const { return static_cast<int>(groups.size()); }
};

struct CostCandidate {
  int group_size = 0;
  int num_groups = 0;
  std::uint64_t flops = 0;
};

// Full record of a group-size sweep.
struct CostReport {
  std::vector<CostCandidate> candidates;  // in sweep order (ascending g_s)
  int optimal_group_size = 0;
  std::uint64_t optimal_flops = 0;
};

struct GroupingResult {
  GroupPlan plan;
  CostReport report;
};

// Max-fill subset of `sizes` with sum <= capacity, as strictly increasing
// indices. Bottom-up DP table over (item, budget); the backtracking order
// (scan items from last to first, include item i-1 whenever the residual
// differs from K[i-1][w]) pins a deterministic subset among equal-fill
// optima. Empty result when every size exceeds the capacity.
inline std::vector<int> knapsack(int capacity, std::span<const int> sizes) {
  if (capacity < 1) {
    throw std::invalid_argument("knapsack: capacity must be >= 1");
  }
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("knapsack: window sizes must be >= 1");
  }

  const int n = static_cast<int>(sizes.size());
  const int width = capacity + 1;
  std::vector<int> table(static_cast<std::size_t>(n + 1) * width, 0);
  auto cell = [&](int i, int w) -> int& { return table[static_cast<std::size_t>(i) * width + w]; };

  for (int i = 1; i <= n; ++i) {
    const int size = sizes[static_cast<std::size_t>(i - 1)];
    for (int w = 1; w <= capacity; ++w) {
      const int without = cell(i - 1, w);
      cell(i, w) = size <= w ? std::max(size + cell(i - 1, w - size), without) : without;
    }
  }

  int residual = cell(n, capacity);
  int budget = capacity;
  std::vector<int> picked;
  for (int i = n; i >= 1 && residual > 0; --i) {
    if (residual == cell(i - 1, budget)) continue;  // not included
    picked.push_back(i - 1);
    residual -= sizes[static_cast<std::size_t>(i - 1)];
    budget -= sizes[static_cast<std::size_t>(i - 1)];
  }
  std::reverse(picked.begin(), picked.end());
  return picked;
}

// Greedy repeated-knapsack partition at a fixed capacity. Every window lands
// in exactly one group and every group fill stays within the capacity. The
// plan is returned uncosted (cost_flops = 0); see optimal_grouping.
inline GroupPlan partition(int group_size, std::span<const int> sizes) {
  if (sizes.empty()) {
    throw std::invalid_argument("partition: window list is empty");
  }
  const int max_size = *std::max_element(sizes.begin(), sizes.end());
  const int min_size = *std::min_element(sizes.begin(), sizes.end());
  if (min_size < 1) {
    throw std::invalid_argument("partition: window sizes must be >= 1");
  }
  if (group_size < max_size) {
    throw std::invalid_argument("partition: group size " + std::to_string(group_size) +
                                " below largest window " + std::to_string(max_size));
  }

  GroupPlan plan;
  plan.group_size = group_size;

  std::vector<int> remaining_sizes(sizes.begin(), sizes.end());
  std::vector<int> remaining_ids(sizes.size());
  std::iota(remaining_ids.begin(), remaining_ids.end(), 0);

  while (!remaining_sizes.empty()) {
    const std::vector<int> picked = knapsack(group_size, remaining_sizes);
    // picked is nonempty: group_size >= max size, so at least one window fits.
    std::vector<int> group;
    int fill = 0;
    group.reserve(picked.size());
    for (int k : picked) {
      group.push_back(remaining_ids[static_cast<std::size_t>(k)]);
      fill += remaining_sizes[static_cast<std::size_t>(k)];
    }
    plan.groups.push_back(std::move(group));
    plan.fill.push_back(fill);
    plan.padding.push_back(group_size - fill);

    std::vector<int> next_sizes;
    std::vector<int> next_ids;
    next_sizes.reserve(remaining_sizes.size() - picked.size());
    next_ids.reserve(remaining_ids.size() - picked.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < remaining_sizes.size(); ++i) {
      if (cursor < picked.size() && static_cast<std::size_t>(picked[cursor]) == i) {
        ++cursor;
        continue;
      }
      next_sizes.push_back(remaining_sizes[i]);
      next_ids.push_back(remaining_ids[i]);
    }
    remaining_sizes = std::move(next_sizes);
    remaining_ids = std::move(next_ids);
  }
  return plan;
}

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw std::overflow_error("attention_cost: FLOPs exceed 64-bit range");
  }
  return a * b;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw std::overflow_error("attention_cost: FLOPs exceed 64-bit range");
  }
  return a + b;
}

}  // namespace detail

// Multi-head attention FLOPs of n_g groups of g_s tokens at width C:
//   n_g * (4 * g_s * C^2 + 2 * g_s^2 * C)
// Exact integer arithmetic; throws std::overflow_error when the result does
// not fit in 64 bits.
inline std::uint64_t attention_cost(std::uint64_t group_size, std::uint64_t num_groups,
                                    std::uint64_t channels) {
  if (group_size < 1 || num_groups < 1 || channels < 1) {
    throw std::invalid_argument("attention_cost: all arguments must be >= 1");
  }
  using detail::checked_add;
  using detail::checked_mul;
  const std::uint64_t projections =
      checked_mul(checked_mul(4, group_size), checked_mul(channels, channels));
  const std::uint64_t scores =
      checked_mul(checked_mul(2, group_size), checked_mul(group_size, channels));
  return checked_mul(num_groups, checked_add(projections, scores));
}

inline std::uint64_t plan_cost(const GroupPlan& plan, int channels) {
  return attention_cost(static_cast<std::uint64_t>(plan.group_size),
                        static_cast<std::uint64_t>(plan.num_groups()),
                        static_cast<std::uint64_t>(channels));
}

// Sweeps the group size from max(sizes) to sum(sizes), partitions at each
// candidate, and keeps the cheapest plan. Strict `<` comparison resolves cost
// ties toward the smallest group size. A nonempty `candidates` list restricts
// the sweep to those capacities (values below max(sizes) are infeasible and
// skipped); by default every integer in the full range is evaluated.
inline GroupingResult optimal_grouping(std::span<const int> sizes, int channels,
                                       std::span<const int> candidates = {}) {
  if (sizes.empty()) {
    throw std::invalid_argument("optimal_grouping: window list is empty");
  }
  if (channels < 1) {
    throw std::invalid_argument("optimal_grouping: channels must be >= 1");
  }
  const int max_size = *std::max_element(sizes.begin(), sizes.end());
  const std::int64_t total = std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});

  std::vector<int> sweep;
  if (candidates.empty()) {
    sweep.resize(static_cast<std::size_t>(total - max_size + 1));
    std::iota(sweep.begin(), sweep.end(), max_size);
  } else {
    for (int g : candidates) {
      if (g >= max_size && g <= total) sweep.push_back(g);
    }
    std::sort(sweep.begin(), sweep.end());
    sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
    if (sweep.empty()) {
      throw std::invalid_argument("optimal_grouping: no feasible candidate group size");
    }
  }

  GroupingResult result;
  std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
  for (int g : sweep) {
    GroupPlan plan = partition(g, sizes);
    const std::uint64_t cost = plan_cost(plan, channels);
    result.report.candidates.push_back({g, plan.num_groups(), cost});
    if (cost < best_cost) {
      best_cost = cost;
      plan.cost_flops = cost;
      result.plan = std::move(plan);
    }
  }
  result.report.optimal_group_size = result.plan.group_size;
  result.report.optimal_flops = best_cost;
  return result;
}

}  // namespace gwa

#endif  // GWA_GROUPING_HPP
