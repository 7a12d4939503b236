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
#include <cstdio>
#include <string>
#include <vector>

#include "scenesketch/scene/classes.hpp"
#include "scenesketch/service/state.hpp"

namespace scenesketch::service {

/// Unit canvas: width 1, height 3/4. Scene positions are fractions of each side.
inline constexpr double kCanvasWidth = 1.0;
inline constexpr double kCanvasHeight = 0.75;

/// Larger drawn extent per size level, as a fraction of canvas width.
inline constexpr std::array<double, 3> kSizeScale = {0.12, 0.18, 0.26};

inline double size_scale(int size_id) {
  return kSizeScale.at(static_cast<std::size_t>(std::clamp(size_id, 0, 2)));
}

struct PlacedGroup {
  std::uint64_t object_id = 0;
  int class_id = 0;
  std::string label;
  std::vector<stroke::Polyline> polylines;  // canvas units
};

struct CanvasRendering {
  double width = kCanvasWidth;
  double height = kCanvasHeight;
  std::vector<PlacedGroup> groups;  // back to front

  bool blank() const {
    for (const auto& g : groups) {
      if (!g.polylines.empty()) return false;
    }
    return true;
  }
};

inline stroke::Point canvas_center(const scene::SceneObject& o) { return {o.x * kCanvasWidth, o.y * kCanvasHeight}; }

/// Scales a drawing so its larger extent matches the object's size level,
/// centres it on the object and mirrors it about that centre when flipped.
inline std::vector<stroke::Polyline> place_drawing(const stroke::SketchDrawing& d, const scene::SceneObject& o) {
  const auto lines = stroke::to_absolute(d);
  std::vector<stroke::Point> all;
  for (const auto& l : lines) all.insert(all.end(), l.begin(), l.end());
  if (all.empty()) return {};
  const stroke::Bounds b = stroke::bounds(all);
  const double extent = std::max(b.width(), b.height());
  const double s = extent > 0.0 ? size_scale(o.size_id) / extent : 0.0;
  const double bx = 0.5 * (b.min_x + b.max_x);
  const double by = 0.5 * (b.min_y + b.max_y);
  const stroke::Point c = canvas_center(o);
  const double mirror = o.flip ? -1.0 : 1.0;
  std::vector<stroke::Polyline> out;
  for (const auto& l : lines) {
    stroke::Polyline p;
    for (const auto& pt : l) p.push_back({c.x + mirror * (pt.x - bx) * s, c.y + (pt.y - by) * s});
    out.push_back(std::move(p));
  }
  return out;
}

/// A user drawing follows its object: translated with moves, rescaled with
/// size changes and mirrored when the flip bit changes. Unchanged poses
/// return the submitted points untouched.
inline std::vector<stroke::Polyline> place_user_drawing(const TrackedObject& t) {
  const auto& a = t.anchor;
  const auto& o = t.object;
  if (a.x == o.x && a.y == o.y && a.flip == o.flip && a.size_id == o.size_id) return t.user_polylines;
  const stroke::Point from = canvas_center(a);
  const stroke::Point to = canvas_center(o);
  const double k = size_scale(o.size_id) / size_scale(a.size_id);
  const double mirror = a.flip != o.flip ? -1.0 : 1.0;
  std::vector<stroke::Polyline> out;
  for (const auto& l : t.user_polylines) {
    stroke::Polyline p;
    for (const auto& pt : l) p.push_back({to.x + mirror * k * (pt.x - from.x), to.y + k * (pt.y - from.y)});
    out.push_back(std::move(p));
  }
  return out;
}

/// Groups are ordered by object id, so earlier objects are drawn first.
inline CanvasRendering compose_canvas(const std::vector<TrackedObject>& objects) {
  std::vector<const TrackedObject*> order;
  for (const auto& o : objects) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  CanvasRendering r;
  for (const auto* t : order) {
    PlacedGroup g;
    g.object_id = t->id;
    g.class_id = t->object.class_id;
    g.label = std::string(scene::class_name(static_cast<std::size_t>(t->object.class_id)));
    g.polylines = t->user_redrawn ? place_user_drawing(*t) : place_drawing(t->drawing, t->object);
    r.groups.push_back(std::move(g));
  }
  return r;
}

inline nlohmann::json canvas_to_json(const CanvasRendering& c) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : c.groups) {
    groups.push_back({{"object_id", g.object_id},
                      {"class", g.class_id},
                      {"label", g.label},
                      {"polylines", polylines_to_json(g.polylines)}});
  }
  return {{"width", c.width}, {"height", c.height}, {"groups", std::move(groups)}};
}

/// SVG at `pixel_width` pixels across; one <g> per object, one <polyline>
/// per stroke.
inline std::string canvas_to_svg(const CanvasRendering& c, int pixel_width = 800) {
  const double k = pixel_width / c.width;
  const int pixel_height = static_cast<int>(std::lround(c.height * k));
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                pixel_width, pixel_height, pixel_width, pixel_height);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& g : c.groups) {
    out += "<g data-object=\"" + std::to_string(g.object_id) + "\" data-class=\"" + g.label +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" stroke-linecap=\"round\" stroke-linejoin=\"round\">\n";
    for (const auto& l : g.polylines) {
      out += "<polyline points=\"";
      for (std::size_t i = 0; i < l.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", l[i].x * k, l[i].y * k);
        out += buf;
      }
      out += "\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Raster view of the canvas, for tests and PBM output.
inline stroke::Bitmap canvas_to_bitmap(const CanvasRendering& c, int pixel_width = 400) {
  const double k = pixel_width / c.width;
  const int pixel_height = static_cast<int>(std::lround(c.height * k));
  stroke::Bitmap b(pixel_width, pixel_height);
  for (const auto& g : c.groups) {
    for (const auto& l : g.polylines) {
      for (std::size_t i = 0; i < l.size(); ++i) {
        const int x1 = static_cast<int>(std::lround(l[i].x * k));
        const int y1 = static_cast<int>(std::lround(l[i].y * k));
        if (i == 0) {
          if (b.in_bounds(x1, y1)) b.set(x1, y1);
          continue;
        }
        stroke::draw_line(b, static_cast<int>(std::lround(l[i - 1].x * k)),
                          static_cast<int>(std::lround(l[i - 1].y * k)), x1, y1);
      }
    }
  }
  return b;
}

}  // namespace scenesketch::service
