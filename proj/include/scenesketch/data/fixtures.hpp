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

// Desk-scale corpora: hand-authored dialogue sessions, clip-art silhouettes,
// deterministic stand-in word vectors and procedural stroke sketches. They
// exercise every loader and are small enough to overfit on one CPU core.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/data/clipart.hpp"
#include "scenesketch/data/codraw.hpp"
#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/data/quickdraw.hpp"
#include "scenesketch/data/similarity.hpp"
#include "scenesketch/stroke/mask.hpp"

namespace scenesketch::data::fixtures {

using stroke::Point;
using stroke::Polyline;

// --- shapes -------------------------------------------------------------------

enum class Shape { Pine, Oak, Apple, Duck, Sun, Cloud, Airplane, Tall, Wide, Round };

inline Polyline ellipse(double cx, double cy, double rx, double ry, int n, double wobble = 0.0, double phase = 0.0) {
  Polyline p;
  for (int i = 0; i <= n; ++i) {
    const double t = 2.0 * std::numbers::pi * (i % n) / n + phase;
    const double r = 1.0 + wobble * std::abs(std::sin(3.0 * t));
    p.push_back({cx + rx * r * std::cos(t), cy + ry * r * std::sin(t)});
  }
  return p;
}

/// Canonical outline in a 256 x 256 box.
inline std::vector<Polyline> shape_outline(Shape s) {
  switch (s) {
    case Shape::Pine:
      return {{{128, 20}, {60, 110}, {100, 105}, {45, 180}, {211, 180}, {156, 105}, {196, 110}, {128, 20}},
              {{115, 180}, {115, 230}, {141, 230}, {141, 180}}};
    case Shape::Oak:
      return {ellipse(128, 95, 80, 75, 12), {{113, 168}, {110, 235}, {146, 235}, {143, 168}}};
    case Shape::Apple:
      return {ellipse(128, 100, 115, 55, 12), {{118, 155}, {116, 215}, {140, 215}, {138, 155}}};
    case Shape::Duck:
      return {ellipse(145, 160, 80, 45, 10), ellipse(75, 90, 30, 28, 8), {{47, 86}, {18, 95}, {47, 102}}};
    case Shape::Sun: {
      std::vector<Polyline> out{ellipse(128, 128, 55, 55, 10)};
      for (int k = 0; k < 8; ++k) {
        const double a = k * std::numbers::pi / 4.0;
        out.push_back({{128 + 72 * std::cos(a), 128 + 72 * std::sin(a)}, {128 + 105 * std::cos(a), 128 + 105 * std::sin(a)}});
      }
      return out;
    }
    case Shape::Cloud:
      return {ellipse(128, 128, 95, 45, 16, 0.3)};
    case Shape::Airplane:
      return {ellipse(128, 128, 110, 20, 10),
              {{110, 118}, {150, 40}, {172, 40}, {152, 120}},
              {{110, 138}, {150, 216}, {172, 216}, {152, 136}},
              {{28, 122}, {14, 86}, {34, 86}, {48, 118}}};
    case Shape::Tall:
      return {ellipse(128, 128, 45, 110, 12)};
    case Shape::Wide:
      return {ellipse(128, 128, 115, 50, 12)};
    case Shape::Round:
      return {ellipse(128, 128, 90, 90, 12)};
  }
  return {};
}

/// A hand-drawn-looking variant: random anisotropic scale, small rotation,
/// shift and per-point noise, rounded to integer pixels in [0, 255].
inline std::vector<Polyline> jittered(const std::vector<Polyline>& base, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> sx(0.8, 1.1), sy(0.8, 1.1), rot(-0.12, 0.12), shift(-10, 10), noise(-4, 4);
  const double ax = sx(rng), ay = sy(rng), th = rot(rng), tx = shift(rng), ty = shift(rng);
  const double c = std::cos(th), s = std::sin(th);
  std::vector<Polyline> out;
  for (const auto& line : base) {
    Polyline l;
    for (const auto& p : line) {
      const double x = (p.x - 128) * ax, y = (p.y - 128) * ay;
      const double rx = c * x - s * y + 128 + tx + noise(rng);
      const double ry = s * x + c * y + 128 + ty + noise(rng);
      l.push_back({std::clamp(std::round(rx), 0.0, 255.0), std::clamp(std::round(ry), 0.0, 255.0)});
    }
    out.push_back(std::move(l));
  }
  return out;
}

/// Filled 64 x 64 silhouette of a canonical outline.
inline stroke::Bitmap silhouette(Shape s) {
  const auto d = stroke::from_raw(shape_outline(s));
  return stroke::build_mask(stroke::render(d, stroke::kMaskSide, stroke::kMaskSide)).bitmap;
}

// --- clip art -----------------------------------------------------------------

struct AssetSpec {
  const char* png;
  int class_id;
  int subtype_id;
  Shape shape;
};

inline const std::vector<AssetSpec>& asset_specs() {
  static const std::vector<AssetSpec> specs = {
      {"boy_0.png", 0, 0, Shape::Tall},          {"boy_1.png", 0, 1, Shape::Tall},
      {"girl_0.png", 1, 2, Shape::Tall},         {"girl_1.png", 1, 3, Shape::Tall},
      {"bear.png", 2, 4, Shape::Round},          {"cat.png", 3, 5, Shape::Round},
      {"dog.png", 4, 6, Shape::Wide},            {"duck.png", 5, 7, Shape::Duck},
      {"owl.png", 6, 8, Shape::Tall},            {"pizza.png", 17, 9, Shape::Round},
      {"pine_tree.png", 28, 10, Shape::Pine},    {"oak_tree.png", 29, 11, Shape::Oak},
      {"apple_tree.png", 30, 12, Shape::Apple},  {"sun.png", 31, 13, Shape::Sun},
      {"cloud.png", 32, 14, Shape::Cloud},       {"rain_cloud.png", 33, 15, Shape::Cloud},
      {"lightning.png", 34, 16, Shape::Tall},    {"balloons.png", 35, 17, Shape::Tall},
      {"tent.png", 36, 18, Shape::Wide},         {"table.png", 37, 19, Shape::Wide},
      {"slide.png", 39, 20, Shape::Wide},        {"swing.png", 40, 21, Shape::Wide},
      {"sandbox.png", 41, 22, Shape::Wide},      {"kite.png", 43, 23, Shape::Round},
      {"rocket.png", 48, 24, Shape::Tall},       {"airplane.png", 49, 25, Shape::Airplane},
      {"bush.png", 50, 26, Shape::Wide},         {"flower.png", 51, 27, Shape::Tall},
      {"campfire.png", 52, 28, Shape::Round},    {"bench.png", 54, 29, Shape::Wide},
      {"butterfly.png", 57, 30, Shape::Wide},
  };
  return specs;
}

inline ClipArtMapping make_clipart() {
  ClipArtMapping m;
  for (const auto& s : asset_specs()) {
    ClipArtAsset a;
    a.png = s.png;
    a.class_id = s.class_id;
    a.subtype_id = s.subtype_id;
    a.silhouette_path = std::string("clipart/") + std::filesystem::path(s.png).stem().string() + ".pbm";
    a.silhouette = silhouette(s.shape);
    m.add(std::move(a));
  }
  return m;
}

// --- dialogue sessions ----------------------------------------------------------

struct ObjSpec {
  const char* png;
  int size;  // 0 small, 1 medium, 2 large
  bool flip;
  int px;  // canvas pixels, 500 x 400
  int py;
};

struct TurnSpec {
  const char* teller;
  std::vector<ObjSpec> added;
};

struct SessionSpec {
  const char* id;
  std::vector<TurnSpec> turns;
};

inline const std::vector<SessionSpec>& session_specs() {
  static const std::vector<SessionSpec> specs = {
      {"train_00", {{"draw a duck in the middle", {{"duck.png", 1, false, 250, 200}}},
                    {"add a small sun in the top left corner", {{"sun.png", 0, false, 70, 60}}}}},
      {"train_01", {{"put a large pine tree on the left side", {{"pine_tree.png", 2, false, 100, 220}}},
                    {"a cloud floats above it to the right", {{"cloud.png", 1, false, 330, 70}}}}},
      {"train_02", {{"there is an airplane flying at the top", {{"airplane.png", 1, false, 250, 70}}},
                    {"a boy stands at the bottom right facing left", {{"boy_0.png", 1, true, 390, 300}}},
                    {"add an oak tree behind him on the left", {{"oak_tree.png", 2, false, 130, 210}}}}},
      {"train_03", {{"draw an apple tree in the center", {{"apple_tree.png", 2, false, 250, 190}}},
                    {"a dog sits to its right", {{"dog.png", 0, false, 360, 300}}}}},
      {"train_04", {{"a girl on the left holding a kite",
                     {{"girl_0.png", 1, false, 120, 290}, {"kite.png", 0, false, 170, 90}}},
                    {"put the sun in the top right", {{"sun.png", 1, false, 430, 60}}}}},
      {"train_05", {{"a tent in the middle with a campfire in front",
                     {{"tent.png", 2, false, 250, 220}, {"campfire.png", 0, false, 260, 330}}}}},
      {"train_06", {{"there is a slide on the right", {{"slide.png", 2, false, 380, 250}}},
                    {"a boy is going down the slide facing right", {{"boy_1.png", 1, false, 350, 240}}},
                    {"two clouds in the sky", {{"cloud.png", 1, false, 120, 60}, {"cloud.png", 0, false, 300, 50}}}}},
      {"train_07", {{"an owl sits in an oak tree on the right",
                     {{"oak_tree.png", 2, false, 370, 200}, {"owl.png", 0, false, 380, 150}}},
                    {"a sun shines on the top left", {{"sun.png", 0, false, 80, 70}}}}},
      {"train_08", {{"a bench in the middle with a cat on it",
                     {{"bench.png", 1, false, 250, 290}, {"cat.png", 0, false, 260, 250}}}}},
      {"train_09", {{"a big bear on the right facing left", {{"bear.png", 2, true, 380, 260}}},
                    {"a pine tree on the far left", {{"pine_tree.png", 1, false, 70, 210}}},
                    {"an airplane in the top left", {{"airplane.png", 0, false, 110, 60}}}}},
      {"train_10", {{"a table in the center", {{"table.png", 1, false, 250, 280}}},
                    {"a pizza on the table", {{"pizza.png", 0, false, 250, 240}}},
                    {"a girl sits on the right of the table", {{"girl_1.png", 1, false, 370, 280}}}}},
      {"train_11", {{"balloons on the left", {{"balloons.png", 1, false, 90, 120}}},
                    {"a duck at the bottom right", {{"duck.png", 0, true, 420, 330}}}}},
      {"train_12", {{"a rain cloud at the top", {{"rain_cloud.png", 1, false, 250, 60}}},
                    {"lightning under the rain cloud", {{"lightning.png", 0, false, 260, 150}}}}},
      {"train_13", {{"a flower at the bottom left", {{"flower.png", 0, false, 60, 340}}},
                    {"a bush on the right", {{"bush.png", 1, false, 420, 320}}},
                    {"a butterfly above the flower", {{"butterfly.png", 0, false, 80, 270}}}}},
      {"train_14", {{"a swing on the left and a sandbox on the right",
                     {{"swing.png", 2, false, 120, 240}, {"sandbox.png", 1, false, 380, 320}}}}},
      {"train_15", {{"a rocket flying up in the middle", {{"rocket.png", 1, false, 250, 150}}},
                    {"add a sun at the top right", {{"sun.png", 0, false, 440, 60}}}}},
  };
  return specs;
}

inline std::vector<DialogueSession> make_sessions(const ClipArtMapping& mapping) {
  std::vector<DialogueSession> out;
  for (const auto& spec : session_specs()) {
    DialogueSession s;
    s.id = spec.id;
    scene::Scene canvas;
    for (const auto& t : spec.turns) {
      for (const auto& o : t.added) {
        const ClipArtAsset& a = mapping.by_png(o.png);
        canvas.objects.push_back(scene::SceneObject::make(a.class_id, a.subtype_id, o.size, o.flip,
                                                          o.px / kCanvasWidth, o.py / kCanvasHeight));
      }
      s.turns.push_back({t.teller, canvas});
    }
    s.final_scene = canvas;
    out.push_back(std::move(s));
  }
  return out;
}

// --- word vectors ------------------------------------------------------------------

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Deterministic stand-in for pretrained vectors: Gaussian entries seeded by
/// the word, on the scale of real 300-d vectors.
inline std::vector<double> pseudo_vector(std::string_view word, std::size_t dim = scene::kTokenDims) {
  std::mt19937_64 rng(fnv1a(word));
  std::normal_distribution<double> n(0.0, 0.4);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

/// Words beyond the sessions, for out-of-session prompts in tests and demos.
inline const std::vector<std::string>& extra_words() {
  static const std::vector<std::string> words = {"sandwich", "parrot", "scene", "draw", "add", "duck", "tree", "sun"};
  return words;
}

inline EmbeddingTable make_embeddings(const std::vector<DialogueSession>& sessions) {
  EmbeddingTable t;
  for (const auto& w : session_vocabulary(sessions)) t.insert(w, pseudo_vector(w));
  for (const auto& w : extra_words()) t.insert(w, pseudo_vector(w));
  return t;
}

// --- stroke sketches ------------------------------------------------------------------

struct SketchCategory {
  const char* name;
  std::vector<Shape> variants;
};

inline const std::vector<SketchCategory>& sketch_categories() {
  static const std::vector<SketchCategory> cats = {
      {"tree", {Shape::Pine, Shape::Oak, Shape::Apple}},
      {"duck", {Shape::Duck}},
      {"sun", {Shape::Sun}},
      {"cloud", {Shape::Cloud}},
      {"airplane", {Shape::Airplane}},
  };
  return cats;
}

inline std::vector<std::vector<Polyline>> make_sketches(const SketchCategory& cat, std::size_t count,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ fnv1a(cat.name));
  std::vector<std::vector<Polyline>> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(jittered(shape_outline(cat.variants[i % cat.variants.size()]), rng));
  }
  return out;
}

// --- generator categories ---------------------------------------------------------------

struct CategorySpec {
  const char* name;
  std::vector<int> classes;
};

/// 34 stroke categories onto the 58 clip-art classes, many-to-one.
inline const std::vector<CategorySpec>& category_specs() {
  static const std::vector<CategorySpec> specs = {
      {"bear", {2}},         {"cat", {3}},           {"dog", {4}},          {"duck", {5}},
      {"owl", {6}},          {"snake", {7}},         {"hat", {8, 10, 11, 12, 13}},
      {"crown", {9}},        {"eyeglasses", {14, 15}}, {"pizza", {17}},    {"hot dog", {18}},
      {"cup", {21}},         {"baseball", {22}},     {"basketball", {24}}, {"football", {25}},
      {"soccer ball", {26}}, {"tree", {28, 29, 30}}, {"sun", {31}},        {"cloud", {32, 33}},
      {"lightning", {34}},   {"tent", {36}},         {"table", {37}},      {"swing set", {40}},
      {"baseball bat", {44}}, {"shovel", {46}},      {"bucket", {47}},     {"airplane", {49}},
      {"bush", {50}},        {"flower", {51}},       {"campfire", {52}},   {"umbrella", {53}},
      {"bench", {54}},       {"bird", {56}},         {"butterfly", {57}},
  };
  return specs;
}

// --- writer ---------------------------------------------------------------------------------

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw FormatError("cannot write " + p.string());
  out << text;
}

struct FixtureOptions {
  std::size_t sketches_per_category = 64;
  std::uint64_t seed = 2024;
};

/// Writes the full desk-scale corpus under `dir`; returns the files written.
inline std::vector<std::string> write_fixtures(const std::filesystem::path& dir, const FixtureOptions& opt = {}) {
  std::vector<std::string> written;
  auto emit = [&](const std::filesystem::path& rel, const std::string& text) {
    write_text(dir / rel, text);
    written.push_back(rel.string());
  };

  const ClipArtMapping clipart = make_clipart();
  nlohmann::json assets = nlohmann::json::array();
  for (const auto& a : clipart.assets()) {
    assets.push_back({{"png", a.png}, {"class", a.class_id}, {"subtype", a.subtype_id}, {"silhouette", a.silhouette_path}});
    emit(a.silhouette_path, stroke::to_pbm(a.silhouette));
  }
  emit("clipart.json", nlohmann::json{{"assets", assets}}.dump(2) + "\n");

  const auto sessions = make_sessions(clipart);
  emit("codraw_fixture.json", codraw_to_json(sessions, clipart).dump(2) + "\n");

  std::ostringstream glove;
  write_embeddings(glove, make_embeddings(sessions));
  emit("glove_fixture.txt", glove.str());

  for (const auto& cat : sketch_categories()) {
    std::string nd;
    for (const auto& s : make_sketches(cat, opt.sketches_per_category, opt.seed)) {
      nd += quickdraw_record(cat.name, s).dump() + "\n";
    }
    emit(std::filesystem::path("quickdraw") / (std::string(cat.name) + ".ndjson"), nd);
  }

  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : category_specs()) {
    nlohmann::json entry{{"name", c.name}, {"classes", c.classes}};
    for (const auto& sc : sketch_categories()) {
      if (std::string(sc.name) == c.name) entry["checkpoint"] = std::string("generators/") + c.name + ".ckpt";
    }
    cats.push_back(entry);
  }
  emit("categories.json", nlohmann::json{{"categories", cats}}.dump(2) + "\n");

  emit("similarity.json", nlohmann::json(SimilarityWeights{}).dump(2) + "\n");

  const nlohmann::json manifest = {
      {"codraw", {{"train", "codraw_fixture.json"}, {"val", "codraw_fixture.json"}, {"test", "codraw_fixture.json"}}},
      {"clipart", "clipart.json"},
      {"embeddings", "glove_fixture.txt"},
      {"categories", "categories.json"},
      {"similarity", "similarity.json"},
      {"quickdraw", {{"dir", "quickdraw"}, {"train", opt.sketches_per_category}, {"val", 0}, {"test", 0}}}};
  emit("manifest.json", manifest.dump(2) + "\n");
  return written;
}

}  // namespace scenesketch::data::fixtures
