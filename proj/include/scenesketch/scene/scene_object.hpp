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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenesketch/scene/classes.hpp"

namespace scenesketch::scene {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidObject : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Object vector layout: [start, end, class(58), subtype(35), size(3), flip(2), x, y].
inline constexpr std::size_t kObjectDims = 102;
inline constexpr std::size_t kTokenDims = 300;
inline constexpr std::size_t kUnifiedDims = kObjectDims + kTokenDims;

inline constexpr std::size_t kStartOffset = 0;
inline constexpr std::size_t kEndOffset = 1;
inline constexpr std::size_t kClassOffset = 2;
inline constexpr std::size_t kSubtypeOffset = kClassOffset + kNumClasses;   // 60
inline constexpr std::size_t kSizeOffset = kSubtypeOffset + kNumSubtypes;   // 95
inline constexpr std::size_t kFlipOffset = kSizeOffset + kNumSizes;         // 98
inline constexpr std::size_t kXOffset = kFlipOffset + kNumFlips;            // 100
inline constexpr std::size_t kYOffset = kXOffset + 1;                       // 101

static_assert(kYOffset + 1 == kObjectDims);

using ObjectVector = std::array<double, kObjectDims>;
using UnifiedVector = std::array<double, kUnifiedDims>;

enum class ObjectKind { Start, End, Object };

struct SceneObject {
  ObjectKind kind = ObjectKind::Object;
  int class_id = 0;
  int subtype_id = 0;
  int size_id = 0;
  bool flip = false;
  double x = 0.5;
  double y = 0.5;

  static SceneObject start() { return {ObjectKind::Start, 0, 0, 0, false, 0.0, 0.0}; }
  static SceneObject end() { return {ObjectKind::End, 0, 0, 0, false, 0.0, 0.0}; }
  static SceneObject make(int cls, int subtype, int size, bool flip, double x, double y) {
    return {ObjectKind::Object, cls, subtype, size, flip, x, y};
  }

  bool is_object() const { return kind == ObjectKind::Object; }

  void validate() const {
    if (kind != ObjectKind::Object) return;
    if (class_id < 0 || class_id >= static_cast<int>(kNumClasses)) {
      throw InvalidObject("class id out of range: " + std::to_string(class_id));
    }
    if (subtype_id < 0 || subtype_id >= static_cast<int>(kNumSubtypes)) {
      throw InvalidObject("subtype id out of range: " + std::to_string(subtype_id));
    }
    if (size_id < 0 || size_id >= static_cast<int>(kNumSizes)) {
      throw InvalidObject("size id out of range: " + std::to_string(size_id));
    }
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) throw InvalidObject("position outside unit canvas");
  }

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  int turn_index = 0;

  std::size_t size() const { return objects.size(); }
  bool empty() const { return objects.empty(); }

  void validate() const {
    if (turn_index < 0) throw InvalidObject("negative turn index");
    for (const auto& o : objects) {
      if (!o.is_object()) throw InvalidObject("scene holds a sentinel token");
      o.validate();
    }
  }

  friend bool operator==(const Scene&, const Scene&) = default;
};

inline ObjectVector encode_object(const SceneObject& obj) {
  obj.validate();
  ObjectVector v{};
  switch (obj.kind) {
    case ObjectKind::Start:
      v[kStartOffset] = 1.0;
      break;
    case ObjectKind::End:
      v[kEndOffset] = 1.0;
      break;
    case ObjectKind::Object:
      v[kClassOffset + static_cast<std::size_t>(obj.class_id)] = 1.0;
      v[kSubtypeOffset + static_cast<std::size_t>(obj.subtype_id)] = 1.0;
      v[kSizeOffset + static_cast<std::size_t>(obj.size_id)] = 1.0;
      v[kFlipOffset + (obj.flip ? 1 : 0)] = 1.0;
      v[kXOffset] = obj.x;
      v[kYOffset] = obj.y;
      break;
  }
  return v;
}

/// Index of the largest entry; the lowest index wins ties.
inline std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

/// Inverse of encode_object that also accepts soft (probability) blocks.
/// The kind is the argmax over (start, end, 1 - start - end).
inline SceneObject decode_object(std::span<const double> v) {
  if (v.size() != kObjectDims) {
    throw DimensionError("object vector must have " + std::to_string(kObjectDims) + " dims, got " +
                         std::to_string(v.size()));
  }
  const std::array<double, 3> kind{v[kStartOffset], v[kEndOffset], 1.0 - v[kStartOffset] - v[kEndOffset]};
  switch (argmax(kind)) {
    case 0:
      return SceneObject::start();
    case 1:
      return SceneObject::end();
    default:
      break;
  }
  SceneObject o;
  o.class_id = static_cast<int>(argmax(v.subspan(kClassOffset, kNumClasses)));
  o.subtype_id = static_cast<int>(argmax(v.subspan(kSubtypeOffset, kNumSubtypes)));
  o.size_id = static_cast<int>(argmax(v.subspan(kSizeOffset, kNumSizes)));
  o.flip = argmax(v.subspan(kFlipOffset, kNumFlips)) == 1;
  o.x = std::clamp(v[kXOffset], 0.0, 1.0);
  o.y = std::clamp(v[kYOffset], 0.0, 1.0);
  return o;
}

/// [object, 0(300)]
inline UnifiedVector pad_object(std::span<const double> v) {
  if (v.size() != kObjectDims) throw DimensionError("pad_object expects 102 dims, got " + std::to_string(v.size()));
  UnifiedVector out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

/// [0(102), token]
inline UnifiedVector pad_token(std::span<const double> v) {
  if (v.size() != kTokenDims) throw DimensionError("pad_token expects 300 dims, got " + std::to_string(v.size()));
  UnifiedVector out{};
  std::copy(v.begin(), v.end(), out.begin() + kObjectDims);
  return out;
}

}  // namespace scenesketch::scene
