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
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenesketch/stroke/stroke5.hpp"

namespace scenesketch::stroke {

class BitmapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary pixel grid; (x, y) with x along a row and y down the rows.
class Bitmap {
 public:
  Bitmap() : Bitmap(1, 1) {}
  Bitmap(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw BitmapError("bitmap dimensions must be at least 1x1");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }

  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }
  bool blank() const { return count() == 0; }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Row-major 0/1 values, as fed to the mask encoder.
  std::vector<double> as_doubles() const { return {bits_.begin(), bits_.end()}; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t index(int x, int y) const {
    if (!in_bounds(x, y)) throw BitmapError("pixel out of range");
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

inline Bitmap flip_horizontal(const Bitmap& b) {
  Bitmap out(b.width(), b.height());
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) out.set(b.width() - 1 - x, y, b.get(x, y));
  }
  return out;
}

/// 8-connected Bresenham line, clipped to the grid.
inline void draw_line(Bitmap& b, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (b.in_bounds(x0, y0)) b.set(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

/// Maps drawing coordinates into a grid: aspect ratio preserved, extent
/// centered, one-pixel margin on the constraining axis.
struct GridFit {
  double scale = 1.0;
  double center_x = 0.0;
  double center_y = 0.0;
  int width = 1;
  int height = 1;

  static GridFit of(const Bounds& b, int width, int height) {
    GridFit f;
    f.width = width;
    f.height = height;
    f.center_x = 0.5 * (b.min_x + b.max_x);
    f.center_y = 0.5 * (b.min_y + b.max_y);
    const double span_x = std::max(0, width - 3);
    const double span_y = std::max(0, height - 3);
    double s = std::numeric_limits<double>::infinity();
    if (b.width() > 0.0) s = std::min(s, span_x / b.width());
    if (b.height() > 0.0) s = std::min(s, span_y / b.height());
    f.scale = std::isfinite(s) ? s : 1.0;
    return f;
  }

  int px(double x) const { return static_cast<int>(std::lround((x - center_x) * scale + 0.5 * (width - 1))); }
  int py(double y) const { return static_cast<int>(std::lround((y - center_y) * scale + 0.5 * (height - 1))); }
};

/// Rasterizes every pen-down segment as a 1-pixel line; isolated points set
/// a single pixel.
inline Bitmap render(const SketchDrawing& d, int width = 64, int height = 64) {
  Bitmap out(width, height);
  const auto lines = to_absolute(d);
  std::vector<Point> all;
  for (const auto& l : lines) all.insert(all.end(), l.begin(), l.end());
  if (all.empty()) return out;
  const GridFit fit = GridFit::of(bounds(all), width, height);
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) {
      const int x = fit.px(l[i].x);
      const int y = fit.py(l[i].y);
      if (i == 0) {
        if (out.in_bounds(x, y)) out.set(x, y);
      } else {
        draw_line(out, fit.px(l[i - 1].x), fit.py(l[i - 1].y), x, y);
      }
    }
  }
  return out;
}

/// Crops to the ink and rescales into a width x height grid with the same
/// fit rule as render(). Blank input yields a blank grid.
inline Bitmap fit_bitmap(const Bitmap& src, int width, int height) {
  Bitmap out(width, height);
  std::vector<Point> ink;
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      if (src.get(x, y)) ink.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  if (ink.empty()) return out;
  const Bounds b = bounds(ink);
  const GridFit fit = GridFit::of(b, width, height);
  // Forward-map ink so thin features survive downscaling ...
  for (const auto& p : ink) {
    const int x = fit.px(p.x);
    const int y = fit.py(p.y);
    if (out.in_bounds(x, y)) out.set(x, y);
  }
  // ... and backward-map target pixels so upscaling leaves no holes.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double sx = (x - 0.5 * (width - 1)) / fit.scale + fit.center_x;
      const double sy = (y - 0.5 * (height - 1)) / fit.scale + fit.center_y;
      const int ix = static_cast<int>(std::lround(sx));
      const int iy = static_cast<int>(std::lround(sy));
      if (ix >= b.min_x && ix <= b.max_x && iy >= b.min_y && iy <= b.max_y && src.in_bounds(ix, iy) &&
          src.get(ix, iy)) {
        out.set(x, y);
      }
    }
  }
  return out;
}

/// Intersection over union; two blank grids count as identical.
inline double iou(const Bitmap& a, const Bitmap& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw BitmapError("iou: dimension mismatch");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) {
    inter += (a.bits()[i] & b.bits()[i]);
    uni += (a.bits()[i] | b.bits()[i]);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Plain (P1) portable bitmap.
inline void write_pbm(std::ostream& out, const Bitmap& b) {
  out << "P1\n" << b.width() << ' ' << b.height() << '\n';
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      out << (b.get(x, y) ? '1' : '0');
      out << (x + 1 == b.width() ? '\n' : ' ');
    }
  }
}

inline std::string to_pbm(const Bitmap& b) {
  std::ostringstream s;
  write_pbm(s, b);
  return s.str();
}

/// Reads P1 (plain) or P4 (raw) portable bitmaps.
inline Bitmap read_pbm(std::istream& in) {
  auto next_token = [&in]() {
    std::string tok;
    while (in) {
      const int c = in.peek();
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    in >> tok;
    return tok;
  };
  const std::string magic = next_token();
  if (magic != "P1" && magic != "P4") throw BitmapError("not a PBM file");
  int w = 0;
  int h = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
  } catch (const std::exception&) {
    throw BitmapError("bad PBM header");
  }
  Bitmap b(w, h);
  if (magic == "P1") {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        char c = 0;
        do {
          if (!in.get(c)) throw BitmapError("PBM data truncated");
        } while (std::isspace(static_cast<unsigned char>(c)));
        if (c != '0' && c != '1') throw BitmapError("bad PBM pixel");
        b.set(x, y, c == '1');
      }
    }
  } else {
    in.get();  // single whitespace after header
    const int row_bytes = (w + 7) / 8;
    std::vector<unsigned char> row(static_cast<std::size_t>(row_bytes));
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), row_bytes);
      if (!in) throw BitmapError("PBM data truncated");
      for (int x = 0; x < w; ++x) b.set(x, y, (row[static_cast<std::size_t>(x / 8)] >> (7 - x % 8)) & 1);
    }
  }
  return b;
}

inline Bitmap load_pbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BitmapError("cannot open " + path);
  return read_pbm(in);
}

inline void save_pbm(const std::string& path, const Bitmap& b) {
  std::ofstream out(path);
  if (!out) throw BitmapError("cannot write " + path);
  write_pbm(out, b);
}

}  // namespace scenesketch::stroke
