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

#include "json.hpp"
#include "scenesketch/scene/scene_object.hpp"

namespace scenesketch::scene {

// {"objects":[{"class":int,"subtype":int,"size":int,"flip":bool,"x":float,"y":float}]}

inline nlohmann::json object_to_json(const SceneObject& o) {
  return {{"class", o.class_id}, {"subtype", o.subtype_id}, {"size", o.size_id},
          {"flip", o.flip},      {"x", o.x},                {"y", o.y}};
}

inline SceneObject object_from_json(const nlohmann::json& j) {
  try {
    SceneObject o = SceneObject::make(j.at("class").get<int>(), j.at("subtype").get<int>(), j.at("size").get<int>(),
                                      j.at("flip").get<bool>(), j.at("x").get<double>(), j.at("y").get<double>());
    o.validate();
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidObject(std::string("scene object json: ") + e.what());
  }
}

inline nlohmann::json scene_to_json(const Scene& s) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : s.objects) objects.push_back(object_to_json(o));
  return {{"objects", std::move(objects)}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("objects") || !j["objects"].is_array()) {
    throw InvalidObject("scene json must be an object with an \"objects\" array");
  }
  Scene s;
  for (const auto& o : j["objects"]) s.objects.push_back(object_from_json(o));
  return s;
}

}  // namespace scenesketch::scene
