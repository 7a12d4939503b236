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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/data/clipart.hpp"
#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/scene/scene_object.hpp"

namespace scenesketch::data {

inline constexpr double kCanvasWidth = 500.0;
inline constexpr double kCanvasHeight = 400.0;

struct DialogueTurn {
  std::string teller;
  scene::Scene scene;  // the drawer's canvas after this turn

  friend bool operator==(const DialogueTurn&, const DialogueTurn&) = default;
};

struct DialogueSession {
  std::string id;
  std::vector<DialogueTurn> turns;
  scene::Scene final_scene;

  void validate() const {
    if (turns.empty()) throw FormatError("session " + id + " has no turns");
    for (const auto& t : turns) t.scene.validate();
    final_scene.validate();
  }

  friend bool operator==(const DialogueSession&, const DialogueSession&) = default;
};

// Abstract-scene strings: "N,png,local_idx,obj_idx,subtype,x,y,z,flip,..."
// with N cliparts of 8 fields each; x, y in canvas pixels, z the depth
// (0 nearest, drawn largest).

inline scene::Scene parse_abstract_scene(const std::string& abs, const ClipArtMapping& mapping,
                                         const std::string& where) {
  std::vector<std::string> f;
  std::stringstream ss(abs);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(item);
  scene::Scene s;
  if (abs.empty()) return s;
  auto fail = [&](const std::string& why) { throw FormatError(where + ": " + why); };
  std::size_t n = 0;
  try {
    n = static_cast<std::size_t>(std::stoul(f.at(0)));
  } catch (const std::exception&) {
    fail("abstract scene must start with a clip-art count");
  }
  if (f.size() != 1 + 8 * n) fail("expected " + std::to_string(1 + 8 * n) + " fields, got " + std::to_string(f.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = 1 + 8 * i;
    const ClipArtAsset* asset = nullptr;
    try {
      asset = &mapping.by_png(f[b]);
    } catch (const MappingError& e) {
      throw MappingError(where + ": " + e.what());
    }
    int obj = 0, z = 0, flip = 0;
    double x = 0, y = 0;
    try {
      obj = std::stoi(f[b + 2]);
      x = std::stod(f[b + 4]);
      y = std::stod(f[b + 5]);
      z = std::stoi(f[b + 6]);
      flip = std::stoi(f[b + 7]);
    } catch (const std::exception&) {
      fail("clip-art " + std::to_string(i) + " has a non-numeric field");
    }
    if (obj != asset->class_id) {
      throw MappingError(where + ": " + f[b] + " is class " + std::to_string(asset->class_id) + ", record says " +
                         std::to_string(obj));
    }
    if (z < 0 || z > 2) fail("depth must be 0, 1 or 2");
    if (flip != 0 && flip != 1) fail("flip must be 0 or 1");
    auto o = scene::SceneObject::make(asset->class_id, asset->subtype_id, 2 - z, flip == 1,
                                      std::clamp(x / kCanvasWidth, 0.0, 1.0), std::clamp(y / kCanvasHeight, 0.0, 1.0));
    s.objects.push_back(o);
  }
  return s;
}

inline std::string format_abstract_scene(const scene::Scene& s, const ClipArtMapping& mapping) {
  std::ostringstream out;
  out.precision(17);
  out << s.objects.size();
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    const ClipArtAsset* a = mapping.find(o.class_id, o.subtype_id);
    if (!a) throw MappingError("no clip-art for class " + std::to_string(o.class_id));
    out << ',' << a->png << ',' << i << ',' << o.class_id << ',' << o.subtype_id << ',' << o.x * kCanvasWidth << ','
        << o.y * kCanvasHeight << ',' << 2 - o.size_id << ',' << (o.flip ? 1 : 0);
  }
  return out.str();
}

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

/// {"data": {"<id>": {"dialog": [{"msg_t": ..., "msg_d": ..., "abs_d": ...}],
///                     "abs_t": ...}}}
inline std::vector<DialogueSession> parse_codraw(const std::string& text, const ClipArtMapping& mapping) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("data") || !j["data"].is_object()) {
    throw FormatError("line 1: top level must be an object with a \"data\" object");
  }
  std::vector<DialogueSession> out;
  for (const auto& [id, rec] : j["data"].items()) {
    const std::size_t line = line_of_offset(text, text.find("\"" + id + "\""));
    const std::string where = "line " + std::to_string(line) + " (session " + id + ")";
    if (!rec.is_object() || !rec.contains("dialog") || !rec["dialog"].is_array()) {
      throw FormatError(where + ": missing dialog array");
    }
    DialogueSession s;
    s.id = id;
    for (std::size_t t = 0; t < rec["dialog"].size(); ++t) {
      const auto& turn = rec["dialog"][t];
      const std::string tw = where + " turn " + std::to_string(t);
      if (!turn.is_object() || !turn.contains("msg_t") || !turn["msg_t"].is_string() || !turn.contains("abs_d") ||
          !turn["abs_d"].is_string()) {
        throw FormatError(tw + ": needs string msg_t and abs_d");
      }
      s.turns.push_back({turn["msg_t"].get<std::string>(),
                         parse_abstract_scene(turn["abs_d"].get<std::string>(), mapping, tw)});
    }
    if (rec.contains("abs_t")) {
      if (!rec["abs_t"].is_string()) throw FormatError(where + ": abs_t must be a string");
      s.final_scene = parse_abstract_scene(rec["abs_t"].get<std::string>(), mapping, where + " abs_t");
    } else if (!s.turns.empty()) {
      s.final_scene = s.turns.back().scene;
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<DialogueSession> load_codraw(const std::string& path, const ClipArtMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_codraw(buf.str(), mapping);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline nlohmann::json codraw_to_json(const std::vector<DialogueSession>& sessions, const ClipArtMapping& mapping) {
  nlohmann::json data = nlohmann::json::object();
  for (const auto& s : sessions) {
    nlohmann::json dialog = nlohmann::json::array();
    for (const auto& t : s.turns) {
      dialog.push_back({{"msg_t", t.teller}, {"msg_d", ""}, {"abs_d", format_abstract_scene(t.scene, mapping)}});
    }
    data[s.id] = {{"dialog", dialog}, {"abs_t", format_abstract_scene(s.final_scene, mapping)}};
  }
  return {{"data", data}};
}

/// Every word used by the tellers, case-folded.
inline std::set<std::string> session_vocabulary(const std::vector<DialogueSession>& sessions) {
  std::set<std::string> v;
  for (const auto& s : sessions) {
    for (const auto& t : s.turns) {
      for (const auto& w : scene::tokenize(t.teller)) v.insert(w);
    }
  }
  return v;
}

}  // namespace scenesketch::data
