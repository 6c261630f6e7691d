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

#ifndef GWA_ATTENTION_HPP
#define GWA_ATTENTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwa/grouping.hpp"
#include "gwa/mask.hpp"
#include "gwa/matrix.hpp"
#include "gwa/rng.hpp"
#include "gwa/window.hpp"

// Masked multi-head attention on grouped tokens: gather visible tokens into
// equal-sized groups, attend with a block-diagonal window mask plus relative
// position bias, scatter back. reference_window_attention() is the
// per-window oracle the grouped path must match.
//
// Masked score entries are set to the most negative finite value rather than
// -infinity; after row-max subtraction they underflow to exactly 0 in exp(),
// which keeps softmax rows NaN-free and makes masked slots contribute exact
// zeros to every weighted sum.

namespace gwa {

// Sentinel window id for padding slots; never collides with real windows.
inline constexpr int kPadWindow = -1;

// Visible tokens of one stage in canonical order: window-major (compact
// window ids ascending), row-major within each window.
template <typename T>
struct TokenArray {
  Matrix<T> values;                  // L x C
  std::vector<TokenCoord> positions; // absolute (row, col) per token
  std::vector<int> window_id;        // compact owning-window index per token

  int count() const { return values.rows(); }
  int channels() const { return values.cols(); }
};

// Tokens rearranged into num_groups groups of exactly group_size slots.
template <typename T>
struct GroupedTokens {
  int group_size = 0;
  int num_groups = 0;
  Matrix<T> values;                  // (num_groups * group_size) x C
  std::vector<TokenCoord> positions; // per slot; {-1, -1} for padding
  std::vector<int> window_id;        // per slot; kPadWindow for padding
  std::vector<int> shuffle;          // slot -> source token index, -1 for padding
  std::vector<int> unshuffle;        // token index -> slot

  int slots() const { return num_groups * group_size; }
  bool is_pad(int slot) const { return window_id[static_cast<std::size_t>(slot)] == kPadWindow; }
};

// Projection weights and relative-position bias of one attention layer.
// Weights are packed across heads (C x C); the bias table has one
// (2p-1) x (2p-1) grid per head, indexed by relative coordinate.
template <typename T>
struct AttentionParams {
  int channels = 0;
  int heads = 1;
  int window_side = 0;  // p
  Matrix<T> wq, wk, wv, wo;
  std::vector<Matrix<T>> bias;

  int head_dim() const { return channels / heads; }
};

template <typename T>
AttentionParams<T> random_attention_params(int channels, int heads, int window_side,
                                           std::uint64_t seed) {
  if (channels < 1 || heads < 1 || channels % heads != 0) {
    throw std::invalid_argument("random_attention_params: heads must divide channels");
  }
  if (window_side < 1) {
    throw std::invalid_argument("random_attention_params: window side must be >= 1");
  }
  AttentionParams<T> params;
  params.channels = channels;
  params.heads = heads;
  params.window_side = window_side;
  RngEngine rng = make_engine(seed);
  const T weight_scale = T(1) / std::sqrt(static_cast<T>(channels));
  params.wq = random_normal_matrix<T>(channels, channels, rng, weight_scale);
  params.wk = random_normal_matrix<T>(channels, channels, rng, weight_scale);
  params.wv = random_normal_matrix<T>(channels, channels, rng, weight_scale);
  params.wo = random_normal_matrix<T>(channels, channels, rng, weight_scale);
  const int span = 2 * window_side - 1;
  params.bias.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    params.bias.push_back(random_normal_matrix<T>(span, span, rng));
  }
  return params;
}

// Bias for an intra-window token pair, retrieved from absolute positions.
// Inter-window pairs are masked before any lookup, so a relative coordinate
// outside the table means the caller's layout is inconsistent.
template <typename T>
T relative_bias(const AttentionParams<T>& params, int head, TokenCoord a, TokenCoord b) {
  const int p = params.window_side;
  const int dr = a.row - b.row;
  const int dc = a.col - b.col;
  if (dr <= -p || dr >= p || dc <= -p || dc >= p) {
    throw std::out_of_range("relative_bias: intra-window pair with relative offset (" +
                            std::to_string(dr) + ", " + std::to_string(dc) +
                            ") outside window side " + std::to_string(p));
  }
  return params.bias[static_cast<std::size_t>(head)](dr + p - 1, dc + p - 1);
}

namespace detail {

template <typename T>
void check_params(const AttentionParams<T>& params, int channels) {
  if (params.channels != channels) {
    throw std::invalid_argument("attention: params are for " + std::to_string(params.channels) +
                                " channels, tokens have " + std::to_string(channels));
  }
  if (params.heads < 1 || params.channels % params.heads != 0) {
    throw std::invalid_argument("attention: heads must divide channels");
  }
  const int span = 2 * params.window_side - 1;
  if (static_cast<int>(params.bias.size()) != params.heads) {
    throw std::invalid_argument("attention: bias table count does not match heads");
  }
  for (const auto& b : params.bias) {
    if (b.rows() != span || b.cols() != span) {
      throw std::invalid_argument("attention: bias table must be (2p-1) x (2p-1)");
    }
    if (!all_finite(b)) throw std::invalid_argument("attention: non-finite bias values");
  }
  if (params.wq.rows() != channels || params.wq.cols() != channels ||
      params.wk.rows() != channels || params.wk.cols() != channels ||
      params.wv.rows() != channels || params.wv.cols() != channels ||
      params.wo.rows() != channels || params.wo.cols() != channels) {
    throw std::invalid_argument("attention: projection weights must be C x C");
  }
  if (!all_finite(params.wq) || !all_finite(params.wk) || !all_finite(params.wv) ||
      !all_finite(params.wo)) {
    throw std::invalid_argument("attention: non-finite projection weights");
  }
}

template <typename T>
Matrix<T> rows_slice(const Matrix<T>& m, int first, int count) {
  Matrix<T> out(count, m.cols());
  for (int r = 0; r < count; ++r) {
    const T* src = m.row(first + r);
    std::copy(src, src + m.cols(), out.row(r));
  }
  return out;
}

// Masked MSA over one block of slots (a group, or a single window in the
// reference path). win[a] selects the owning window per slot; rows with
// win == kPadWindow are fully masked and produce zero output rows.
template <typename T>
Matrix<T> attend_block(const Matrix<T>& x, std::span<const TokenCoord> pos,
                       std::span<const int> win, const AttentionParams<T>& params) {
  const int slots = x.rows();
  const int channels = x.cols();
  const int head_dim = params.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  const T masked_score = std::numeric_limits<T>::lowest();

  const Matrix<T> q = matmul(x, params.wq);
  const Matrix<T> k = matmul(x, params.wk);
  const Matrix<T> v = matmul(x, params.wv);

  Matrix<T> heads_out(slots, channels);
  std::vector<T> scores(static_cast<std::size_t>(slots));

  for (int h = 0; h < params.heads; ++h) {
    const int offset = h * head_dim;
    for (int a = 0; a < slots; ++a) {
      if (win[a] == kPadWindow) continue;  // zero row, discarded by scatter

      for (int b = 0; b < slots; ++b) {
        if (win[b] != win[a]) {
          scores[static_cast<std::size_t>(b)] = masked_score;
          continue;
        }
        const T* qa = q.row(a) + offset;
        const T* kb = k.row(b) + offset;
        T dot = T(0);
        for (int d = 0; d < head_dim; ++d) dot += qa[d] * kb[d];
        scores[static_cast<std::size_t>(b)] =
            dot * scale + relative_bias(params, h, pos[a], pos[b]);
      }

      T row_max = scores[0];
      for (int b = 1; b < slots; ++b) row_max = std::max(row_max, scores[static_cast<std::size_t>(b)]);
      T denom = T(0);
      for (int b = 0; b < slots; ++b) {
        scores[static_cast<std::size_t>(b)] = std::exp(scores[static_cast<std::size_t>(b)] - row_max);
        denom += scores[static_cast<std::size_t>(b)];
      }

      T* out_row = heads_out.row(a) + offset;
      for (int b = 0; b < slots; ++b) {
        const T weight = scores[static_cast<std::size_t>(b)] / denom;
        const T* vb = v.row(b) + offset;
        for (int d = 0; d < head_dim; ++d) out_row[d] += weight * vb[d];
      }
    }
  }
  return matmul(heads_out, params.wo);
}

}  // namespace detail

// Derives per-window token counts from a canonical TokenArray; throws if the
// window ids are not a contiguous 0..n_w-1 run.
template <typename T>
std::vector<int> token_counts(const TokenArray<T>& tokens) {
  std::vector<int> counts;
  int prev = -1;
  for (int id : tokens.window_id) {
    if (id == prev) {
      ++counts.back();
    } else if (id == prev + 1) {
      counts.push_back(1);
      prev = id;
    } else {
      throw std::invalid_argument("token_counts: window ids are not canonical");
    }
  }
  return counts;
}

// Lays out the visible tokens of nonempty windows in canonical order, with
// zeroed values to be filled by the caller.
template <typename T>
TokenArray<T> collect_visible(const WindowLayout& layout, const TokenVisibility& vis,
                              int channels) {
  if (channels < 1) {
    throw std::invalid_argument("collect_visible: channels must be >= 1");
  }
  if (vis.tokens_h != layout.tokens_h || vis.tokens_w != layout.tokens_w) {
    throw std::invalid_argument("collect_visible: visibility grid does not match layout");
  }
  std::vector<TokenCoord> positions;
  std::vector<int> ids;
  int next_id = 0;
  for (const Window& win : layout.windows) {
    bool any = false;
    for (const TokenCoord& t : win.tokens) {
      if (vis.at(t.row, t.col)) {
        positions.push_back(t);
        ids.push_back(next_id);
        any = true;
      }
    }
    if (any) ++next_id;
  }
  TokenArray<T> tokens;
  tokens.values = Matrix<T>(static_cast<int>(positions.size()), channels);
  tokens.positions = std::move(positions);
  tokens.window_id = std::move(ids);
  return tokens;
}

template <typename T>
void randomize_values(TokenArray<T>& tokens, std::uint64_t seed) {
  RngEngine rng = make_engine(seed);
  tokens.values = random_normal_matrix<T>(tokens.count(), tokens.channels(), rng);
}

// Permutes tokens into groups per the plan: group j concatenates its windows
// in selection order, each window's tokens in canonical order, then pads the
// tail slots with zero rows. Records the slot permutation and its inverse.
template <typename T>
GroupedTokens<T> gather_groups(const TokenArray<T>& tokens, const GroupPlan& plan) {
  const std::vector<int> counts = token_counts(tokens);
  const int n_w = static_cast<int>(counts.size());

  std::vector<int> offsets(counts.size() + 1, 0);
  for (std::size_t i = 0; i < counts.size(); ++i) offsets[i + 1] = offsets[i] + counts[i];

  std::vector<char> seen(counts.size(), 0);
  int covered = 0;
  for (const auto& group : plan.groups) {
    int fill = 0;
    for (int k : group) {
      if (k < 0 || k >= n_w || seen[static_cast<std::size_t>(k)]) {
        throw std::invalid_argument("gather_groups: plan does not match token windows");
      }
      seen[static_cast<std::size_t>(k)] = 1;
      fill += counts[static_cast<std::size_t>(k)];
      ++covered;
    }
    if (fill > plan.group_size) {
      throw std::invalid_argument("gather_groups: group fill exceeds group size");
    }
  }
  if (covered != n_w) {
    throw std::invalid_argument("gather_groups: plan leaves windows unassigned");
  }

  GroupedTokens<T> grouped;
  grouped.group_size = plan.group_size;
  grouped.num_groups = plan.num_groups();
  grouped.values = Matrix<T>(grouped.slots(), tokens.channels());
  grouped.positions.assign(static_cast<std::size_t>(grouped.slots()), TokenCoord{-1, -1});
  grouped.window_id.assign(static_cast<std::size_t>(grouped.slots()), kPadWindow);
  grouped.shuffle.assign(static_cast<std::size_t>(grouped.slots()), -1);
  grouped.unshuffle.assign(static_cast<std::size_t>(tokens.count()), -1);

  for (int j = 0; j < grouped.num_groups; ++j) {
    int slot = j * plan.group_size;
    for (int k : plan.groups[static_cast<std::size_t>(j)]) {
      for (int t = offsets[static_cast<std::size_t>(k)]; t < offsets[static_cast<std::size_t>(k) + 1];
           ++t, ++slot) {
        const T* src = tokens.values.row(t);
        std::copy(src, src + tokens.channels(), grouped.values.row(slot));
        grouped.positions[static_cast<std::size_t>(slot)] = tokens.positions[static_cast<std::size_t>(t)];
        grouped.window_id[static_cast<std::size_t>(slot)] = k;
        grouped.shuffle[static_cast<std::size_t>(slot)] = t;
        grouped.unshuffle[static_cast<std::size_t>(t)] = slot;
      }
    }
  }
  return grouped;
}

// Reverses gather_groups: non-pad slots return to canonical token order.
template <typename T>
TokenArray<T> scatter_groups(const GroupedTokens<T>& grouped) {
  const int count = static_cast<int>(grouped.unshuffle.size());
  TokenArray<T> tokens;
  tokens.values = Matrix<T>(count, grouped.values.cols());
  tokens.positions.resize(static_cast<std::size_t>(count));
  tokens.window_id.resize(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    const int slot = grouped.unshuffle[static_cast<std::size_t>(t)];
    if (slot < 0 || slot >= grouped.slots() || grouped.is_pad(slot) ||
        grouped.shuffle[static_cast<std::size_t>(slot)] != t) {
      throw std::invalid_argument("scatter_groups: corrupted index map");
    }
    const T* src = grouped.values.row(slot);
    std::copy(src, src + grouped.values.cols(), tokens.values.row(t));
    tokens.positions[static_cast<std::size_t>(t)] = grouped.positions[static_cast<std::size_t>(slot)];
    tokens.window_id[static_cast<std::size_t>(t)] = grouped.window_id[static_cast<std::size_t>(slot)];
  }
  return tokens;
}

// Attention within each group under the block-diagonal window mask. Pad-slot
// outputs are zero rows; their values never reach scatter_groups output.
template <typename T>
GroupedTokens<T> masked_group_attention(const GroupedTokens<T>& grouped,
                                        const AttentionParams<T>& params) {
  detail::check_params(params, grouped.values.cols());
  if (!all_finite(grouped.values)) {
    throw std::invalid_argument("masked_group_attention: non-finite token values");
  }

  GroupedTokens<T> out = grouped;
  for (int j = 0; j < grouped.num_groups; ++j) {
    const int first = j * grouped.group_size;
    const Matrix<T> block = detail::rows_slice(grouped.values, first, grouped.group_size);
    const std::span<const TokenCoord> pos(grouped.positions.data() + first,
                                          static_cast<std::size_t>(grouped.group_size));
    const std::span<const int> win(grouped.window_id.data() + first,
                                   static_cast<std::size_t>(grouped.group_size));
    const Matrix<T> result = detail::attend_block(block, pos, win, params);
    for (int r = 0; r < grouped.group_size; ++r) {
      const T* src = result.row(r);
      std::copy(src, src + result.cols(), out.values.row(first + r));
    }
  }
  return out;
}

// Correctness oracle: dense attention within each window independently, no
// grouping, no padding.
template <typename T>
TokenArray<T> reference_window_attention(const TokenArray<T>& tokens,
                                         const AttentionParams<T>& params) {
  if (tokens.count() == 0) {
    TokenArray<T> empty;
    empty.values = Matrix<T>(0, tokens.channels());
    return empty;
  }
  detail::check_params(params, tokens.channels());
  if (!all_finite(tokens.values)) {
    throw std::invalid_argument("reference_window_attention: non-finite token values");
  }

  const std::vector<int> counts = token_counts(tokens);
  TokenArray<T> out = tokens;
  int first = 0;
  for (int count : counts) {
    const Matrix<T> block = detail::rows_slice(tokens.values, first, count);
    const std::span<const TokenCoord> pos(tokens.positions.data() + first,
                                          static_cast<std::size_t>(count));
    const std::span<const int> win(tokens.window_id.data() + first,
                                   static_cast<std::size_t>(count));
    const Matrix<T> result = detail::attend_block(block, pos, win, params);
    for (int r = 0; r < count; ++r) {
      const T* src = result.row(r);
      std::copy(src, src + result.cols(), out.values.row(first + r));
    }
    first += count;
  }
  return out;
}

// Largest elementwise relative difference between two token arrays.
template <typename T>
double max_rel_error(const TokenArray<T>& a, const TokenArray<T>& b) {
  if (a.count() != b.count() || a.channels() != b.channels()) {
    throw std::invalid_argument("max_rel_error: shape mismatch");
  }
  double worst = 0.0;
  for (int r = 0; r < a.count(); ++r) {
    for (int c = 0; c < a.channels(); ++c) {
      const double x = static_cast<double>(a.values(r, c));
      const double y = static_cast<double>(b.values(r, c));
      const double denom = std::max({std::fabs(x), std::fabs(y), 1e-12});
      worst = std::max(worst, std::fabs(x - y) / denom);
    }
  }
  return worst;
}

}  // namespace gwa

#endif  // GWA_ATTENTION_HPP
