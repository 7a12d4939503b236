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
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scenesketch::stroke {

class EmptySketch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateCorpus : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateGeometry : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidDrawing : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Polyline = std::vector<Point>;

/// Pen state after reaching a stroke's point.
enum class Pen { Down = 0, Up = 1, End = 2 };

/// One Stroke-5 row [dx, dy, p_down, p_up, p_end].
struct Stroke5 {
  double dx = 0.0;
  double dy = 0.0;
  Pen pen = Pen::Down;

  bool pen_down() const { return pen == Pen::Down; }
  bool pen_up() const { return pen == Pen::Up; }
  bool pen_end() const { return pen == Pen::End; }

  std::array<double, 5> to_array() const {
    return {dx, dy, pen_down() ? 1.0 : 0.0, pen_up() ? 1.0 : 0.0, pen_end() ? 1.0 : 0.0};
  }

  static Stroke5 initial() { return {0.0, 0.0, Pen::Down}; }
  static Stroke5 end() { return {0.0, 0.0, Pen::End}; }

  friend bool operator==(const Stroke5&, const Stroke5&) = default;
};

/// A drawn object as Stroke-5 rows. The first row is always [0,0,1,0,0] and
/// sits at `origin`; every later row moves the pen by its offset.
struct SketchDrawing {
  std::vector<Stroke5> strokes;
  std::string category;
  Point origin;

  std::size_t length() const { return strokes.size(); }

  void validate() const {
    if (strokes.empty()) throw InvalidDrawing("drawing has no strokes");
    if (!(strokes.front() == Stroke5::initial())) throw InvalidDrawing("drawing must begin with [0,0,1,0,0]");
    for (std::size_t i = 0; i + 1 < strokes.size(); ++i) {
      if (strokes[i].pen_end()) throw InvalidDrawing("pen_end before the final stroke");
    }
    for (const auto& s : strokes) {
      if (!std::isfinite(s.dx) || !std::isfinite(s.dy)) throw InvalidDrawing("non-finite offset");
    }
  }

  bool ended() const { return !strokes.empty() && strokes.back().pen_end(); }

  friend bool operator==(const SketchDrawing&, const SketchDrawing&) = default;
};

/// Converts absolute polylines to Stroke-5. Offsets chain consecutive points;
/// the last point of every polyline but the final one carries pen_up, and a
/// zero-offset pen_end row closes the drawing. The first point becomes the
/// initial row. A single-point first polyline followed by others is marked
/// by a zero-offset pen_up row right after the initial row.
inline SketchDrawing from_raw(const std::vector<Polyline>& polylines, std::string category = {}) {
  if (polylines.empty()) throw EmptySketch("no polylines");
  for (const auto& p : polylines) {
    if (p.empty()) throw EmptySketch("polyline without points");
  }
  SketchDrawing d;
  d.category = std::move(category);
  d.origin = polylines.front().front();
  d.strokes.push_back(Stroke5::initial());
  Point prev = d.origin;
  for (std::size_t li = 0; li < polylines.size(); ++li) {
    const auto& line = polylines[li];
    const bool last_line = li + 1 == polylines.size();
    std::size_t first = 0;
    if (li == 0) {
      first = 1;
      if (line.size() == 1 && !last_line) d.strokes.push_back({0.0, 0.0, Pen::Up});
    }
    for (std::size_t pi = first; pi < line.size(); ++pi) {
      const bool lift = !last_line && pi + 1 == line.size();
      d.strokes.push_back({line[pi].x - prev.x, line[pi].y - prev.y, lift ? Pen::Up : Pen::Down});
      prev = line[pi];
    }
  }
  d.strokes.push_back(Stroke5::end());
  return d;
}

/// Inverse of from_raw: splits the pen path into polylines at pen_up rows.
/// Offsets on a pen_end row are ignored.
inline std::vector<Polyline> to_absolute(const SketchDrawing& d) {
  std::vector<Polyline> out;
  if (d.strokes.empty()) return out;
  Point pos = d.origin;
  out.push_back({pos});
  std::size_t i = 1;
  bool lifted = false;
  if (d.strokes.size() > 2 && d.strokes[1] == Stroke5{0.0, 0.0, Pen::Up}) {
    i = 2;  // single-point first polyline
    lifted = true;
  }
  for (; i < d.strokes.size(); ++i) {
    const Stroke5& s = d.strokes[i];
    if (s.pen_end()) break;
    pos.x += s.dx;
    pos.y += s.dy;
    if (lifted) out.emplace_back();
    out.back().push_back(pos);
    lifted = s.pen_up();
  }
  return out;
}

/// Absolute positions of every pen point, in drawing order.
inline std::vector<Point> absolute_points(const SketchDrawing& d) {
  std::vector<Point> pts;
  for (const auto& line : to_absolute(d)) pts.insert(pts.end(), line.begin(), line.end());
  return pts;
}

struct Bounds {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

inline Bounds bounds(const std::vector<Point>& pts) {
  if (pts.empty()) return {};
  Bounds b{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (const auto& p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.max_x = std::max(b.max_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

struct AspectRatio {
  double r = 1.0;
};

/// Height over width of the drawing's absolute extent.
inline AspectRatio aspect_ratio(const SketchDrawing& d) {
  const Bounds b = bounds(absolute_points(d));
  if (!(b.width() > 0.0)) throw DegenerateGeometry("drawing has zero width");
  return {b.height() / b.width()};
}

inline SketchDrawing flip_horizontal(SketchDrawing d) {
  d.origin.x = -d.origin.x;
  for (auto& s : d.strokes) s.dx = s.dx == 0.0 ? 0.0 : -s.dx;
  return d;
}

inline SketchDrawing scaled(SketchDrawing d, double factor) {
  d.origin.x *= factor;
  d.origin.y *= factor;
  for (auto& s : d.strokes) {
    s.dx *= factor;
    s.dy *= factor;
  }
  return d;
}

struct NormalizedCorpus {
  std::vector<SketchDrawing> drawings;
  double sigma = 1.0;
};

/// Divides every offset by the population standard deviation of all movement
/// offsets (dx and dy pooled) in the corpus. The initial and pen_end rows
/// carry no movement and are left out of the statistic.
inline NormalizedCorpus normalize_offsets(std::vector<SketchDrawing> drawings) {
  if (drawings.empty()) throw DegenerateCorpus("empty corpus");
  double sum = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& d : drawings) {
    for (std::size_t i = 1; i < d.strokes.size(); ++i) {
      if (d.strokes[i].pen_end()) continue;
      sum += d.strokes[i].dx + d.strokes[i].dy;
      sq += d.strokes[i].dx * d.strokes[i].dx + d.strokes[i].dy * d.strokes[i].dy;
      n += 2;
    }
  }
  if (n == 0) throw DegenerateCorpus("corpus has no movement offsets");
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
  const double sigma = std::sqrt(var);
  if (!(sigma > 0.0)) throw DegenerateCorpus("corpus offsets have zero variance");
  NormalizedCorpus out;
  out.sigma = sigma;
  for (auto& d : drawings) out.drawings.push_back(scaled(std::move(d), 1.0 / sigma));
  return out;
}

}  // namespace scenesketch::stroke
