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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace scenesketch::scene {

inline constexpr std::size_t kNumClasses = 58;
inline constexpr std::size_t kNumSubtypes = 35;
inline constexpr std::size_t kNumSizes = 3;
inline constexpr std::size_t kNumFlips = 2;

/// Clip-art class names, indexed by class id.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "boy",          "girl",        "bear",        "cat",          "dog",         "duck",
    "owl",          "snake",       "baseball cap", "crown",       "chef hat",    "pirate hat",
    "viking hat",   "wizard hat",  "sunglasses",  "glasses",      "pie",         "pizza",
    "hot dog",      "ketchup",     "mustard",     "drink",        "baseball",    "beach ball",
    "basketball",   "football",    "soccer ball", "tennis ball",  "pine tree",   "oak tree",
    "apple tree",   "sun",         "cloud",       "rain cloud",   "lightning",   "balloons",
    "tent",         "table",       "grill",       "slide",        "swing",       "sandbox",
    "frisbee",      "kite",        "bat",         "glove",        "shovel",      "pail",
    "rocket",       "airplane",    "bush",        "flower",       "campfire",    "umbrella",
    "bench",        "basket",      "bird",        "butterfly",
};

inline std::string_view class_name(std::size_t id) {
  return id < kNumClasses ? kClassNames[id] : std::string_view("unknown");
}

inline std::optional<std::size_t> class_id(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return i;
  }
  return std::nullopt;
}

inline constexpr std::array<std::string_view, kNumSizes> kSizeNames = {"small", "medium", "large"};

}  // namespace scenesketch::scene
