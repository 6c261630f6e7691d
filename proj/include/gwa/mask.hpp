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

#ifndef GWA_MASK_HPP
#define GWA_MASK_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwa/rng.hpp"

// Batch-wise random masking at mask-unit resolution. One mask is shared by
// every sample of a batch and by every stage of a hierarchical encoder; each
// stage expands it to its own token resolution with expand_to_tokens().

namespace gwa {

// Boolean visibility grid over mask units. true = visible, false = hidden.
struct Mask {
  int units_h = 0;
  int units_w = 0;
  double ratio = 0.0;
  std::vector<std::uint8_t> visible;  // row-major, units_h * units_w entries

  int units() const { return units_h * units_w; }

  bool at(int row, int col) const {
    return visible[static_cast<std::size_t>(row) * units_w + col] != 0;
  }

  int visible_count() const {
    return static_cast<int>(
        std::accumulate(visible.begin(), visible.end(), std::int64_t{0}));
  }

  int hidden_count() const { return units() - visible_count(); }
};

// Visibility grid at token resolution of one stage.
struct TokenVisibility {
  int tokens_h = 0;
  int tokens_w = 0;
  std::vector<std::uint8_t> visible;  // row-major

  bool at(int row, int col) const {
    return visible[static_cast<std::size_t>(row) * tokens_w + col] != 0;
  }

  int visible_count() const {
    return static_cast<int>(
        std::accumulate(visible.begin(), visible.end(), std::int64_t{0}));
  }
};

// Exactly floor(ratio * units) hidden units, chosen as a uniform random
// subset. The subset is the prefix of a seeded Fisher-Yates permutation of
// the unit indices, so identical seeds replay identical masks on any
// platform.
inline Mask gen_batch_mask(std::uint64_t seed, int units_h, int units_w, double ratio) {
  if (units_h < 1 || units_w < 1) {
    throw std::invalid_argument("gen_batch_mask: grid dimensions must be >= 1");
  }
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("gen_batch_mask: mask ratio must satisfy 0 <= r < 1, got " +
                                std::to_string(ratio));
  }

  const std::int64_t n = static_cast<std::int64_t>(units_h) * units_w;
  const std::int64_t n_hidden = static_cast<std::int64_t>(std::floor(ratio * static_cast<double>(n)));

  Mask mask;
  mask.units_h = units_h;
  mask.units_w = units_w;
  mask.ratio = ratio;
  mask.visible.assign(static_cast<std::size_t>(n), 1);

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  RngEngine rng = make_engine(seed);
  shuffle(order, rng);
  for (std::int64_t i = 0; i < n_hidden; ++i) {
    mask.visible[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 0;
  }
  return mask;
}

// Expands each mask unit to a unit_span x unit_span block of tokens.
inline TokenVisibility expand_to_tokens(const Mask& mask, int unit_span) {
  if (unit_span < 1) {
    throw std::invalid_argument("expand_to_tokens: unit span must be >= 1");
  }
  TokenVisibility vis;
  vis.tokens_h = mask.units_h * unit_span;
  vis.tokens_w = mask.units_w * unit_span;
  vis.visible.resize(static_cast<std::size_t>(vis.tokens_h) * vis.tokens_w);
  for (int row = 0; row < vis.tokens_h; ++row) {
    for (int col = 0; col < vis.tokens_w; ++col) {
      vis.visible[static_cast<std::size_t>(row) * vis.tokens_w + col] =
          mask.at(row / unit_span, col / unit_span) ? 1 : 0;
    }
  }
  return vis;
}

}  // namespace gwa

#endif  // GWA_MASK_HPP
