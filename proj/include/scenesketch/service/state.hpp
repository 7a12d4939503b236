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

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/generator/model.hpp"
#include "scenesketch/scene/scene_json.hpp"
#include "scenesketch/stroke/stroke5.hpp"

namespace scenesketch::service {

/// Status-coded failure; the HTTP layer maps `status` onto the response.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline constexpr int kExportVersion = 1;

/// One object on the canvas with everything needed to redraw it unchanged.
struct TrackedObject {
  std::uint64_t id = 0;
  scene::SceneObject object;
  generator::Latent z;
  stroke::SketchDrawing drawing;  // generator output, in its own units
  bool truncated = false;
  bool user_redrawn = false;
  std::vector<stroke::Polyline> user_polylines;  // canvas units, as submitted
  scene::SceneObject anchor;                     // pose when the user redrew it
  int turns_survived = 0;                        // later turns that kept it

  bool redraw_eligible() const { return turns_survived >= 3; }
};

struct HistoryTurn {
  std::string text;
  scene::Scene scene;
};

/// Attention from the output slots of one turn, averaged over layers and
/// heads. rows[k] belongs to outputs[k]; the last output is the end slot.
struct AttentionView {
  int turn = 0;
  std::vector<std::string> labels;
  std::vector<std::string> outputs;
  std::vector<std::vector<double>> rows;
};

/// Everything one undo step restores.
struct Snapshot {
  int turn = 0;
  std::vector<HistoryTurn> history;
  std::vector<TrackedObject> objects;  // scene order
  std::uint64_t next_id = 1;
  std::vector<AttentionView> attention;

  scene::Scene scene() const {
    scene::Scene s;
    for (const auto& o : objects) s.objects.push_back(o.object);
    s.turn_index = turn;
    return s;
  }

  const TrackedObject* find(std::uint64_t id) const {
    for (const auto& o : objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }
  TrackedObject* find(std::uint64_t id) {
    for (auto& o : objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }
};

struct SessionState {
  std::string id;
  std::uint64_t seed = 0;
  Snapshot current;
  std::deque<Snapshot> undo;
};

// --- JSON -------------------------------------------------------------------------

inline nlohmann::json polylines_to_json(const std::vector<stroke::Polyline>& lines) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : lines) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : l) pts.push_back({p.x, p.y});
    out.push_back(std::move(pts));
  }
  return out;
}

inline std::vector<stroke::Polyline> polylines_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ServiceError(400, "polylines must be an array");
  std::vector<stroke::Polyline> out;
  for (const auto& l : j) {
    if (!l.is_array()) throw ServiceError(400, "each polyline must be an array of points");
    stroke::Polyline line;
    for (const auto& p : l) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ServiceError(400, "points must be [x, y] number pairs");
      }
      line.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    out.push_back(std::move(line));
  }
  return out;
}

inline nlohmann::json drawing_to_json(const stroke::SketchDrawing& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : d.strokes) rows.push_back({s.dx, s.dy, static_cast<int>(s.pen)});
  return {{"category", d.category}, {"origin", {d.origin.x, d.origin.y}}, {"strokes", std::move(rows)}};
}

inline stroke::SketchDrawing drawing_from_json(const nlohmann::json& j) {
  stroke::SketchDrawing d;
  d.category = j.at("category").get<std::string>();
  d.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  for (const auto& r : j.at("strokes")) {
    const int pen = r.at(2).get<int>();
    if (pen < 0 || pen > 2) throw ServiceError(400, "pen state out of range");
    d.strokes.push_back({r.at(0).get<double>(), r.at(1).get<double>(), static_cast<stroke::Pen>(pen)});
  }
  return d;
}

inline nlohmann::json tracked_to_json(const TrackedObject& o) {
  return {{"id", o.id},
          {"object", scene::object_to_json(o.object)},
          {"z", o.z},
          {"drawing", drawing_to_json(o.drawing)},
          {"truncated", o.truncated},
          {"user_redrawn", o.user_redrawn},
          {"user_polylines", polylines_to_json(o.user_polylines)},
          {"anchor", scene::object_to_json(o.anchor)},
          {"turns_survived", o.turns_survived}};
}

inline TrackedObject tracked_from_json(const nlohmann::json& j) {
  TrackedObject o;
  o.id = j.at("id").get<std::uint64_t>();
  o.object = scene::object_from_json(j.at("object"));
  o.z = j.at("z").get<std::vector<double>>();
  o.drawing = drawing_from_json(j.at("drawing"));
  o.truncated = j.at("truncated").get<bool>();
  o.user_redrawn = j.at("user_redrawn").get<bool>();
  o.user_polylines = polylines_from_json(j.at("user_polylines"));
  o.anchor = scene::object_from_json(j.at("anchor"));
  o.turns_survived = j.at("turns_survived").get<int>();
  return o;
}

inline nlohmann::json attention_to_json(const AttentionView& a) {
  return {{"turn", a.turn}, {"labels", a.labels}, {"outputs", a.outputs}, {"rows", a.rows}};
}

inline AttentionView attention_from_json(const nlohmann::json& j) {
  return {j.at("turn").get<int>(), j.at("labels").get<std::vector<std::string>>(),
          j.at("outputs").get<std::vector<std::string>>(), j.at("rows").get<std::vector<std::vector<double>>>()};
}

inline nlohmann::json snapshot_to_json(const Snapshot& s) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : s.history) {
    history.push_back({{"text", h.text}, {"scene", scene::scene_to_json(h.scene)}, {"turn_index", h.scene.turn_index}});
  }
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : s.objects) objects.push_back(tracked_to_json(o));
  nlohmann::json attention = nlohmann::json::array();
  for (const auto& a : s.attention) attention.push_back(attention_to_json(a));
  return {{"turn", s.turn},
          {"history", std::move(history)},
          {"objects", std::move(objects)},
          {"next_id", s.next_id},
          {"attention", std::move(attention)}};
}

inline Snapshot snapshot_from_json(const nlohmann::json& j) {
  Snapshot s;
  s.turn = j.at("turn").get<int>();
  for (const auto& h : j.at("history")) {
    s.history.push_back({h.at("text").get<std::string>(), scene::scene_from_json(h.at("scene"))});
    s.history.back().scene.turn_index = h.at("turn_index").get<int>();
  }
  for (const auto& o : j.at("objects")) s.objects.push_back(tracked_from_json(o));
  s.next_id = j.at("next_id").get<std::uint64_t>();
  for (const auto& a : j.at("attention")) s.attention.push_back(attention_from_json(a));
  return s;
}

/// Versioned export document, lossless for every session field.
inline nlohmann::json export_state(const SessionState& st) {
  nlohmann::json undo = nlohmann::json::array();
  for (const auto& s : st.undo) undo.push_back(snapshot_to_json(s));
  return {{"format", "scenesketch-session"},
          {"version", kExportVersion},
          {"id", st.id},
          {"seed", st.seed},
          {"current", snapshot_to_json(st.current)},
          {"undo", std::move(undo)}};
}

inline SessionState import_state(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "scenesketch-session") throw ServiceError(400, "not a session export");
    if (j.value("version", 0) != kExportVersion) {
      throw ServiceError(400, "unsupported session export version " + std::to_string(j.value("version", 0)));
    }
    SessionState st;
    st.id = j.at("id").get<std::string>();
    st.seed = j.at("seed").get<std::uint64_t>();
    st.current = snapshot_from_json(j.at("current"));
    for (const auto& s : j.at("undo")) st.undo.push_back(snapshot_from_json(s));
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError(400, std::string("malformed session export: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ServiceError(400, std::string("malformed session export: ") + e.what());
  }
}

}  // namespace scenesketch::service
