// Copyright 2026 The scenesketch Authors.
//
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

#pragma once

#include <algorithm>
#include <vector>

#include "scenesketch/stroke/bitmap.hpp"

namespace scenesketch::stroke {

inline constexpr int kMaskSide = 64;

/// Outline condition for the object generators.
struct Mask {
  Bitmap bitmap;

  friend bool operator==(const Mask&, const Mask&) = default;
};

/// Sets every pixel lying between the leftmost and rightmost ink of its row,
/// or between the topmost and bottommost ink of its column. Rows and columns
/// without ink contribute no span; a single ink pixel spans only itself.
inline Mask build_mask(const Bitmap& ink) {
  const int w = ink.width();
  const int h = ink.height();
  std::vector<int> row_min(static_cast<std::size_t>(h), w), row_max(static_cast<std::size_t>(h), -1);
  std::vector<int> col_min(static_cast<std::size_t>(w), h), col_max(static_cast<std::size_t>(w), -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!ink.get(x, y)) continue;
      const auto ys = static_cast<std::size_t>(y);
      const auto xs = static_cast<std::size_t>(x);
      row_min[ys] = std::min(row_min[ys], x);
      row_max[ys] = std::max(row_max[ys], x);
      col_min[xs] = std::min(col_min[xs], y);
      col_max[xs] = std::max(col_max[xs], y);
    }
  }
  Mask m{Bitmap(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto ys = static_cast<std::size_t>(y);
      const auto xs = static_cast<std::size_t>(x);
      const bool in_row = row_min[ys] <= x && x <= row_max[ys];
      const bool in_col = col_min[xs] <= y && y <= col_max[xs];
      if (in_row || in_col) m.bitmap.set(x, y);
    }
  }
  return m;
}

/// Clip-art silhouettes go through the same span rule as rendered strokes.
inline Mask mask_from_clipart(const Bitmap& silhouette) { return build_mask(silhouette); }

/// Mask of a drawing rendered at the standard conditioning resolution.
inline Mask drawing_mask(const SketchDrawing& d, int side = kMaskSide) { return build_mask(render(d, side, side)); }

}  // namespace scenesketch::stroke
