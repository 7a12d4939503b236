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

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <set>

#include "scenesketch/data/fixtures.hpp"
#include "scenesketch/service/service.hpp"

namespace scenesketch::service::stubs {

using scene::Scene;
using scene::SceneObject;

inline constexpr int kDuck = 5;
inline constexpr int kSun = 31;
inline constexpr int kTree = 29;
inline constexpr int kKite = 43;

/// Replies with a fixed layout per instruction text. Attention is uniform
/// over the visible prefix, as a single-head, single-layer map.
class ScriptedProposer : public LayoutProposer {
 public:
  std::map<std::string, Scene> script;

  std::vector<scene::TextToken> embed(const std::string& text) const override {
    std::vector<scene::TextToken> out;
    for (const auto& w : scene::tokenize(text)) out.push_back({w, std::vector<double>(scene::kTokenDims, 0.0)});
    return out;
  }

  proposer::GenerationResult propose(const scene::ContextWindow& ctx) const override {
    std::string text;
    for (const auto& t : ctx.current_instruction) text += (text.empty() ? "" : " ") + t.surface;
    auto it = script.find(text);
    if (it == script.end()) throw std::runtime_error("unscripted instruction: " + text);
    proposer::GenerationResult r;
    auto seq = scene::build_labeled_sequence(ctx);
    r.prompt_position = seq.size() - 1;
    r.scene = it->second;
    r.scene.turn_index = static_cast<int>(ctx.turns.size());
    for (const auto& o : r.scene.objects) seq.push_back(scene::object_row(o, r.scene.turn_index));
    const std::size_t n = seq.size();
    nn::Tensor w = nn::Tensor::matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) w.at(i, j) = 1.0 / static_cast<double>(i + 1);
    }
    r.attention.layers = {{w}};
    for (const auto& row : seq) {
      r.attention.labels.push_back(row.label);
      r.rows.push_back({row.kind, row.turn, row.label});
    }
    return r;
  }
};

/// Draws a zigzag whose shape follows z. Can be told to throw on a given
/// decode call or to block until released.
class StubSketcher : public ObjectSketcher {
 public:
  std::set<int> classes = {kDuck, kSun, kTree};
  mutable std::atomic<int> decodes{0};
  int throw_on = -1;  // decode call index that throws

  bool block = false;
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  mutable bool entered = false;
  mutable bool released = false;

  bool supports(int c) const override { return classes.count(c) > 0; }

  generator::Latent sample_prior(int, std::mt19937_64& rng) const override {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng), n(rng)};
  }

  generator::DecodeResult decode(int, const generator::Latent& z, const generator::GeneratorCondition& cond,
                                 std::mt19937_64& rng) const override {
    const int call = decodes++;
    if (block) {
      std::unique_lock<std::mutex> lock(mu);
      entered = true;
      cv.notify_all();
      cv.wait(lock, [&] { return released; });
    }
    if (call == throw_on) throw std::runtime_error("generator failure");
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    std::vector<stroke::Polyline> lines = {
        {{0, 0}, {1 + z[0] * 0.1, 0.5 + u(rng)}, {2, z[1] * 0.1}, {3 + u(rng), 1}},
        {{0.5, 1.5}, {2.5, 1.5 + z[2] * 0.1}}};
    generator::DecodeResult r;
    r.drawing = stroke::from_raw(lines, "stub");
    r.ratio = cond.ratio;
    r.z = z;
    return r;
  }

  void wait_entered() const {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return entered; });
  }
  void release() const {
    std::lock_guard<std::mutex> lock(mu);
    released = true;
    cv.notify_all();
  }
};

inline Scene scene_of(std::vector<SceneObject> objs) {
  Scene s;
  s.objects = std::move(objs);
  return s;
}

inline SceneObject duck(double x = 0.5, double y = 0.5, int size = 1, bool flip = false) {
  return SceneObject::make(kDuck, 0, size, flip, x, y);
}
inline SceneObject sun(double x = 0.85, double y = 0.15) { return SceneObject::make(kSun, 0, 0, false, x, y); }

struct Fixture {
  std::shared_ptr<ScriptedProposer> proposer = std::make_shared<ScriptedProposer>();
  std::shared_ptr<StubSketcher> sketcher = std::make_shared<StubSketcher>();
  std::unique_ptr<SketchService> svc;

  explicit Fixture(ServiceOptions opt = {}) {
    auto& s = proposer->script;
    s["a duck in the middle"] = scene_of({duck()});
    s["a sun top right"] = scene_of({duck(0.51, 0.5), sun()});
    s["flip the duck"] = scene_of({duck(0.5, 0.5, 1, true)});
    s["make the duck big"] = scene_of({duck(0.5, 0.5, 2)});
    s["move the duck left"] = scene_of({duck(0.2, 0.5)});
    s["remove the duck"] = scene_of({});
    s["add a kite"] = scene_of({duck(), SceneObject::make(kKite, 0, 1, false, 0.3, 0.2)});
    s["add a zebra"] = scene_of({duck()});
    s["a tree and a sun"] = scene_of({SceneObject::make(kTree, 0, 2, false, 0.2, 0.6), sun()});
    svc = std::make_unique<SketchService>(proposer, sketcher, data::fixtures::make_clipart(), opt);
  }
};

}  // namespace scenesketch::service::stubs
