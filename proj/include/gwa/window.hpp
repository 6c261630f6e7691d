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

#ifndef GWA_WINDOW_HPP
#define GWA_WINDOW_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "gwa/mask.hpp"

// Local-window partition of a stage's token grid and per-window visible-token
// counting. A nonzero shift offsets the tiling, producing smaller irregular
// windows along the borders instead of cyclically rolling the grid; the
// grouping stage downstream is agnostic to window sizes, so no regularization
// trick is needed.

namespace gwa {

struct TokenCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const TokenCoord&, const TokenCoord&) = default;
};

// Token grid and attention parameters of one encoder stage.
struct StageGeometry {
  int tokens_h = 0;
  int tokens_w = 0;
  int window = 0;   // window side p, in tokens
  int shift_y = 0;  // tiling offset, 0 <= shift < window
  int shift_x = 0;
  int channels = 0;   // attention width C
  int unit_span = 1;  // mask-unit span u, in tokens
};

struct Window {
  int id = 0;
  int origin_row = 0;
  int origin_col = 0;
  int height = 0;
  int width = 0;
  std::vector<TokenCoord> tokens;  // absolute coords, row-major

  int size() const { return height * width; }
};

struct WindowLayout {
  int tokens_h = 0;
  int tokens_w = 0;
  int window_side = 0;
  std::vector<Window> windows;  // row-major by window origin
};

namespace detail {

// Cut positions along one axis: {0, shift, shift+p, shift+2p, ..., extent}.
inline std::vector<int> window_cuts(int extent, int side, int shift) {
  std::vector<int> cuts{0};
  int next = shift > 0 ? shift : side;
  while (next < extent) {
    cuts.push_back(next);
    next += side;
  }
  cuts.push_back(extent);
  return cuts;
}

}  // namespace detail

// Tiles the token grid into windows. With zero shift every window is exactly
// p x p and the grid must be divisible by p; with a nonzero shift the border
// windows are allowed to be smaller.
inline WindowLayout partition_windows(const StageGeometry& geom) {
  if (geom.tokens_h < 1 || geom.tokens_w < 1) {
    throw std::invalid_argument("partition_windows: token grid dimensions must be >= 1");
  }
  if (geom.window < 1) {
    throw std::invalid_argument("partition_windows: window side must be >= 1");
  }
  if (geom.shift_y < 0 || geom.shift_y >= geom.window || geom.shift_x < 0 ||
      geom.shift_x >= geom.window) {
    throw std::invalid_argument("partition_windows: shift must satisfy 0 <= shift < window");
  }
  const bool shifted = geom.shift_y != 0 || geom.shift_x != 0;
  if (!shifted && (geom.tokens_h % geom.window != 0 || geom.tokens_w % geom.window != 0)) {
    throw std::invalid_argument(
        "partition_windows: token grid " + std::to_string(geom.tokens_h) + "x" +
        std::to_string(geom.tokens_w) + " is not divisible by window side " +
        std::to_string(geom.window) + " and no shift was given");
  }

  const std::vector<int> row_cuts = detail::window_cuts(geom.tokens_h, geom.window, geom.shift_y);
  const std::vector<int> col_cuts = detail::window_cuts(geom.tokens_w, geom.window, geom.shift_x);

  WindowLayout layout;
  layout.tokens_h = geom.tokens_h;
  layout.tokens_w = geom.tokens_w;
  layout.window_side = geom.window;
  for (std::size_t wr = 0; wr + 1 < row_cuts.size(); ++wr) {
    for (std::size_t wc = 0; wc + 1 < col_cuts.size(); ++wc) {
      Window win;
      win.id = static_cast<int>(layout.windows.size());
      win.origin_row = row_cuts[wr];
      win.origin_col = col_cuts[wc];
      win.height = row_cuts[wr + 1] - row_cuts[wr];
      win.width = col_cuts[wc + 1] - col_cuts[wc];
      win.tokens.reserve(static_cast<std::size_t>(win.size()));
      for (int r = row_cuts[wr]; r < row_cuts[wr + 1]; ++r) {
        for (int c = col_cuts[wc]; c < col_cuts[wc + 1]; ++c) {
          win.tokens.push_back({r, c});
        }
      }
      layout.windows.push_back(std::move(win));
    }
  }
  return layout;
}

// Visible-token count per window, in window order. Empty windows stay in the
// list with count 0; drop_empty() compacts them away before grouping.
inline std::vector<int> visible_counts(const WindowLayout& layout, const TokenVisibility& vis) {
  if (vis.tokens_h != layout.tokens_h || vis.tokens_w != layout.tokens_w) {
    throw std::invalid_argument("visible_counts: visibility grid is " +
                                std::to_string(vis.tokens_h) + "x" + std::to_string(vis.tokens_w) +
                                " but layout expects " + std::to_string(layout.tokens_h) + "x" +
                                std::to_string(layout.tokens_w));
  }
  std::vector<int> counts;
  counts.reserve(layout.windows.size());
  for (const Window& win : layout.windows) {
    int count = 0;
    for (const TokenCoord& t : win.tokens) {
      if (vis.at(t.row, t.col)) ++count;
    }
    counts.push_back(count);
  }
  return counts;
}

// Windows that still hold visible tokens, compacted for the grouping stage.
// sizes[k] is the visible count of the window whose layout id is source[k].
struct VisibleWindows {
  std::vector<int> sizes;
  std::vector<int> source;
};

inline VisibleWindows drop_empty(const std::vector<int>& counts) {
  VisibleWindows out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      out.sizes.push_back(counts[i]);
      out.source.push_back(static_cast<int>(i));
    }
  }
  return out;
}

}  // namespace gwa

#endif  // GWA_WINDOW_HPP
