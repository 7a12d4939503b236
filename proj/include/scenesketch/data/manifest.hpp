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
#include <map>
#include <string>

#include "json.hpp"
#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/data/quickdraw.hpp"

namespace scenesketch::data {

/// Dataset locations and split sizes. Relative paths resolve against the
/// manifest's directory.
///   {"codraw": {"train": ..., "val": ..., "test": ...},
///    "clipart": ..., "embeddings": ..., "categories": ..., "similarity": ...,
///    "quickdraw": {"dir": ..., "train": 64, "val": 0, "test": 0}}
struct Manifest {
  std::filesystem::path base;
  std::map<std::string, std::string> codraw;  // split -> file
  std::string clipart;
  std::string embeddings;
  std::string categories;
  std::string similarity;
  std::string quickdraw_dir;
  SplitSizes quickdraw_sizes;

  std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).string();
  }

  std::string codraw_split(const std::string& split) const {
    auto it = codraw.find(split);
    if (it == codraw.end()) throw FormatError("manifest has no codraw split '" + split + "'");
    return resolve(it->second);
  }

  std::string quickdraw_file(const std::string& category) const {
    return resolve((std::filesystem::path(quickdraw_dir) / (category + ".ndjson")).string());
  }
};

inline Manifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base) {
  Manifest m;
  m.base = std::move(base);
  try {
    for (const auto& [split, file] : j.at("codraw").items()) m.codraw[split] = file.get<std::string>();
    m.clipart = j.value("clipart", "");
    m.embeddings = j.value("embeddings", "");
    m.categories = j.value("categories", "");
    m.similarity = j.value("similarity", "");
    if (j.contains("quickdraw")) {
      const auto& q = j["quickdraw"];
      m.quickdraw_dir = q.value("dir", "quickdraw");
      m.quickdraw_sizes.train = q.value("train", m.quickdraw_sizes.train);
      m.quickdraw_sizes.val = q.value("val", m.quickdraw_sizes.val);
      m.quickdraw_sizes.test = q.value("test", m.quickdraw_sizes.test);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return m;
}

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path);
  try {
    return manifest_from_json(nlohmann::json::parse(in), std::filesystem::path(path).parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace scenesketch::data
