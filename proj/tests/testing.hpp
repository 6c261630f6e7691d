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

// Independent oracles for the test suite. Everything here recomputes results
// by brute force or by a direct construction, deliberately sharing no code
// with the library paths under test.

#ifndef GWA_TESTS_TESTING_HPP
#define GWA_TESTS_TESTING_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gwa/attention.hpp"
#include "gwa/matrix.hpp"
#include "gwa/window.hpp"

namespace gwa::testing {

// Exhaustive max subset-sum <= capacity. n must stay small (2^n subsets).
inline int brute_force_best_fill(int capacity, std::span<const int> sizes) {
  const int n = static_cast<int>(sizes.size());
  int best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    int sum = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) sum += sizes[static_cast<std::size_t>(i)];
    }
    if (sum <= capacity) best = std::max(best, sum);
  }
  return best;
}

// Exhaustive minimum number of capacity-bounded bins (first-fit order search
// over all assignments). Only for tiny instances.
inline int brute_force_min_bins(int capacity, std::span<const int> sizes) {
  const int n = static_cast<int>(sizes.size());
  std::vector<int> bins;
  int best = n;
  auto place = [&](auto&& self, int item) -> void {
    if (static_cast<int>(bins.size()) >= best) return;  // cannot improve
    if (item == n) {
      best = static_cast<int>(bins.size());
      return;
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (bins[b] + sizes[static_cast<std::size_t>(item)] <= capacity) {
        bins[b] += sizes[static_cast<std::size_t>(item)];
        self(self, item + 1);
        bins[b] -= sizes[static_cast<std::size_t>(item)];
      }
    }
    bins.push_back(sizes[static_cast<std::size_t>(item)]);
    self(self, item + 1);
    bins.pop_back();
  };
  place(place, 0);
  return best;
}

// Dense per-window bias matrix built the standard way: precompute the
// flattened relative-position index for every token pair of a p x p window
// from scratch, then take the entries for the window's actual tokens.
template <typename T>
gwa::Matrix<T> dense_window_bias(const gwa::AttentionParams<T>& params, int head,
                                 std::span<const gwa::TokenCoord> tokens) {
  const int p = params.window_side;
  const int w = static_cast<int>(tokens.size());
  gwa::Matrix<T> out(w, w);
  for (int a = 0; a < w; ++a) {
    for (int b = 0; b < w; ++b) {
      const int flat = (tokens[static_cast<std::size_t>(a)].row -
                        tokens[static_cast<std::size_t>(b)].row + p - 1) *
                           (2 * p - 1) +
                       (tokens[static_cast<std::size_t>(a)].col -
                        tokens[static_cast<std::size_t>(b)].col + p - 1);
      out(a, b) = params.bias[static_cast<std::size_t>(head)].data()[static_cast<std::size_t>(flat)];
    }
  }
  return out;
}

}  // namespace gwa::testing

#endif  // GWA_TESTS_TESTING_HPP
