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
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/generator/model.hpp"
#include "scenesketch/scene/classes.hpp"

namespace scenesketch::generator {

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CategoryEntry {
  std::string name;
  std::vector<int> classes;
  std::string checkpoint;  // empty when no model has been trained
};

/// Maps clip-art classes onto stroke categories:
///   {"categories": [{"name": "tree", "classes": [28, 29, 30], "checkpoint": "generators/tree.ckpt"}, ...]}
class CategoryRegistry {
 public:
  CategoryRegistry() = default;

  void add(CategoryEntry e) {
    for (int c : e.classes) {
      if (c < 0 || c >= static_cast<int>(scene::kNumClasses)) throw RegistryError("category " + e.name + ": class out of range");
      if (by_class_.count(c)) throw RegistryError("class " + std::to_string(c) + " mapped twice");
      by_class_[c] = entries_.size();
    }
    entries_.push_back(std::move(e));
  }

  const std::vector<CategoryEntry>& entries() const { return entries_; }

  const CategoryEntry* for_class(int class_id) const {
    auto it = by_class_.find(class_id);
    return it == by_class_.end() ? nullptr : &entries_[it->second];
  }

  const CategoryEntry* find(const std::string& name) const {
    for (const auto& e : entries_) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  /// A class is supported when it maps to a category with a checkpoint.
  bool supported(int class_id) const {
    const CategoryEntry* e = for_class(class_id);
    return e && !e->checkpoint.empty();
  }

 private:
  std::vector<CategoryEntry> entries_;
  std::map<int, std::size_t> by_class_;
};

inline CategoryRegistry registry_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  CategoryRegistry r;
  try {
    for (const auto& c : j.at("categories")) {
      CategoryEntry e;
      e.name = c.at("name").get<std::string>();
      e.classes = c.at("classes").get<std::vector<int>>();
      const std::string ck = c.value("checkpoint", "");
      if (!ck.empty()) {
        const std::filesystem::path p(ck);
        e.checkpoint = p.is_absolute() || base.empty() ? ck : (base / p).string();
      }
      r.add(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw RegistryError(std::string("category registry: ") + e.what());
  }
  return r;
}

inline CategoryRegistry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegistryError("cannot open " + path);
  try {
    return registry_from_json(nlohmann::json::parse(in), std::filesystem::path(path).parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw RegistryError(path + ": " + e.what());
  }
}

/// Loads each category's generator on first use and keeps it. Loaded models
/// are read-only and may be shared across sessions.
class GeneratorPool {
 public:
  explicit GeneratorPool(CategoryRegistry registry) : registry_(std::move(registry)) {}

  const CategoryRegistry& registry() const { return registry_; }

  /// Null when the class has no trained generator.
  std::shared_ptr<const GeneratorBundle> for_class(int class_id) {
    const CategoryEntry* e = registry_.for_class(class_id);
    if (!e) return nullptr;
    std::lock_guard<std::mutex> lock(mu_);
    auto it = loaded_.find(e->name);
    if (it != loaded_.end()) return it->second;
    if (e->checkpoint.empty() || !std::filesystem::exists(e->checkpoint)) return nullptr;
    auto b = std::make_shared<const GeneratorBundle>(load_generator(e->checkpoint));
    loaded_[e->name] = b;
    return b;
  }

  /// Installs an in-memory model, e.g. one trained in the same process.
  void put(const std::string& category, std::shared_ptr<const GeneratorBundle> b) {
    std::lock_guard<std::mutex> lock(mu_);
    loaded_[category] = std::move(b);
  }

 private:
  CategoryRegistry registry_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const GeneratorBundle>> loaded_;
};

}  // namespace scenesketch::generator
