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

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/scene/classes.hpp"
#include "scenesketch/stroke/bitmap.hpp"

namespace scenesketch::data {

class MappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClipArtAsset {
  std::string png;
  int class_id = 0;
  int subtype_id = 0;
  std::string silhouette_path;
  stroke::Bitmap silhouette;
};

/// Clip-art asset table: png name -> (class, subtype, silhouette).
///   {"assets": [{"png": "duck.png", "class": 5, "subtype": 0,
///                "silhouette": "clipart/duck.pbm"}, ...]}
/// Silhouette paths are relative to the mapping file.
class ClipArtMapping {
 public:
  void add(ClipArtAsset a) {
    if (a.class_id < 0 || a.class_id >= static_cast<int>(scene::kNumClasses)) {
      throw MappingError("clip-art " + a.png + ": class out of range");
    }
    if (a.subtype_id < 0 || a.subtype_id >= static_cast<int>(scene::kNumSubtypes)) {
      throw MappingError("clip-art " + a.png + ": subtype out of range");
    }
    assets_.push_back(std::move(a));
  }

  const std::vector<ClipArtAsset>& assets() const { return assets_; }

  const ClipArtAsset& by_png(const std::string& png) const {
    for (const auto& a : assets_) {
      if (a.png == png) return a;
    }
    throw MappingError("unknown clip-art id '" + png + "'");
  }

  /// Exact (class, subtype) match, else the first asset of the class.
  const ClipArtAsset* find(int class_id, int subtype_id) const {
    const ClipArtAsset* fallback = nullptr;
    for (const auto& a : assets_) {
      if (a.class_id != class_id) continue;
      if (a.subtype_id == subtype_id) return &a;
      if (!fallback) fallback = &a;
    }
    return fallback;
  }

 private:
  std::vector<ClipArtAsset> assets_;
};

inline ClipArtMapping clipart_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  ClipArtMapping m;
  if (!j.contains("assets") || !j["assets"].is_array()) throw MappingError("clip-art mapping needs an assets array");
  for (const auto& e : j["assets"]) {
    ClipArtAsset a;
    try {
      a.png = e.at("png").get<std::string>();
      a.class_id = e.at("class").get<int>();
      a.subtype_id = e.at("subtype").get<int>();
      a.silhouette_path = e.value("silhouette", "");
    } catch (const nlohmann::json::exception& ex) {
      throw MappingError(std::string("clip-art entry: ") + ex.what());
    }
    if (!a.silhouette_path.empty()) a.silhouette = stroke::load_pbm((base / a.silhouette_path).string());
    m.add(std::move(a));
  }
  return m;
}

inline ClipArtMapping load_clipart(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MappingError("cannot open clip-art mapping " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw MappingError(path + ": " + e.what());
  }
  return clipart_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace scenesketch::data
