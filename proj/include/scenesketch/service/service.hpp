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

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <type_traits>
#include <string>
#include <vector>

#include "scenesketch/data/clipart.hpp"
#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/generator/registry.hpp"
#include "scenesketch/proposer/generate.hpp"
#include "scenesketch/service/canvas.hpp"
#include "scenesketch/service/state.hpp"

namespace scenesketch::service {

/// Instruction text to scene layout.
class LayoutProposer {
 public:
  virtual ~LayoutProposer() = default;
  virtual std::vector<scene::TextToken> embed(const std::string& text) const = 0;
  virtual proposer::GenerationResult propose(const scene::ContextWindow& ctx) const = 0;
  virtual std::size_t context_turns() const { return scene::kMaxContextTurns; }
};

/// Per-class stroke generation.
class ObjectSketcher {
 public:
  virtual ~ObjectSketcher() = default;
  virtual bool supports(int class_id) const = 0;
  virtual generator::Latent sample_prior(int class_id, std::mt19937_64& rng) const = 0;
  virtual generator::DecodeResult decode(int class_id, const generator::Latent& z,
                                         const generator::GeneratorCondition& cond, std::mt19937_64& rng) const = 0;
};

class ModelLayoutProposer : public LayoutProposer {
 public:
  explicit ModelLayoutProposer(std::shared_ptr<const proposer::ProposerBundle> bundle) : bundle_(std::move(bundle)) {}

  std::vector<scene::TextToken> embed(const std::string& text) const override { return bundle_->embeddings.embed(text); }
  proposer::GenerationResult propose(const scene::ContextWindow& ctx) const override {
    return proposer::generate_scene(bundle_->model, ctx);
  }
  std::size_t context_turns() const override { return bundle_->model.config().context_turns; }

 private:
  std::shared_ptr<const proposer::ProposerBundle> bundle_;
};

class PoolSketcher : public ObjectSketcher {
 public:
  PoolSketcher(std::shared_ptr<generator::GeneratorPool> pool, double temperature = -1.0)
      : pool_(std::move(pool)), temperature_(temperature) {}

  bool supports(int class_id) const override { return pool_->for_class(class_id) != nullptr; }

  generator::Latent sample_prior(int class_id, std::mt19937_64& rng) const override {
    return bundle(class_id)->model.sample_prior(rng);
  }

  generator::DecodeResult decode(int class_id, const generator::Latent& z, const generator::GeneratorCondition& cond,
                                 std::mt19937_64& rng) const override {
    const auto b = bundle(class_id);
    const double t = temperature_ >= 0.0 ? temperature_ : b->model.config().temperature;
    return b->model.regenerate_with_pose(z, cond, t, rng);
  }

 private:
  std::shared_ptr<const generator::GeneratorBundle> bundle(int class_id) const {
    auto b = pool_->for_class(class_id);
    if (!b) throw ServiceError(500, "no generator for class " + std::to_string(class_id));
    return b;
  }

  std::shared_ptr<generator::GeneratorPool> pool_;
  double temperature_;
};

struct ServiceOptions {
  std::size_t undo_limit = 20;
  std::size_t max_text = 500;
  double move_tolerance = 0.05;  // position change that still counts as unchanged
  std::uint64_t seed = 1;
};

struct TurnDiff {
  std::vector<std::uint64_t> kept;
  std::vector<std::uint64_t> moved;
  std::vector<std::uint64_t> regenerated;
  std::vector<std::uint64_t> added;
  std::vector<std::uint64_t> removed;

  bool unchanged() const { return moved.empty() && regenerated.empty() && added.empty() && removed.empty(); }

  nlohmann::json to_json() const {
    return {{"kept", kept}, {"moved", moved}, {"regenerated", regenerated}, {"added", added}, {"removed", removed}};
  }
};

struct InstructionResult {
  int turn = 0;
  scene::Scene scene;
  CanvasRendering canvas;
  std::vector<TrackedObject> objects;
  TurnDiff diff;
  std::optional<std::string> unknown_prompt;
  bool truncated = false;
};

inline nlohmann::json objects_to_json(const std::vector<TrackedObject>& objects) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& o : objects) {
    nlohmann::json j = scene::object_to_json(o.object);
    j["id"] = o.id;
    j["label"] = std::string(scene::class_name(static_cast<std::size_t>(o.object.class_id)));
    j["user_redrawn"] = o.user_redrawn;
    j["redraw_eligible"] = o.redraw_eligible();
    j["turns_survived"] = o.turns_survived;
    out.push_back(std::move(j));
  }
  return out;
}

/// Condition for an object's clip-art pose. Drawings are generated facing
/// the silhouette's own way; the canvas applies the flip.
inline generator::GeneratorCondition condition_for(const data::ClipArtMapping& clipart, const scene::SceneObject& o) {
  const data::ClipArtAsset* a = clipart.find(o.class_id, o.subtype_id);
  if (a && !a->silhouette.blank()) {
    try {
      return generator::condition_from_silhouette(a->silhouette);
    } catch (const stroke::DegenerateGeometry&) {
    }
  }
  generator::GeneratorCondition c;
  stroke::Bitmap box(stroke::kMaskSide, stroke::kMaskSide);
  for (int y = 1; y + 1 < stroke::kMaskSide; ++y) {
    for (int x = 1; x + 1 < stroke::kMaskSide; ++x) box.set(x, y);
  }
  c.mask = stroke::build_mask(box);
  c.ratio = 1.0;
  return c;
}

/// Multi-session orchestration: instruction, layout, strokes, canvas.
/// Every mutating call works on a copy and swaps it in only on success.
class SketchService {
 public:
  SketchService(std::shared_ptr<const LayoutProposer> proposer, std::shared_ptr<const ObjectSketcher> sketcher,
                data::ClipArtMapping clipart, ServiceOptions options = {})
      : proposer_(std::move(proposer)),
        sketcher_(std::move(sketcher)),
        clipart_(std::move(clipart)),
        options_(options),
        ids_(options.seed) {}

  const ServiceOptions& options() const { return options_; }

  std::string create_session() {
    std::lock_guard<std::mutex> lock(registry_mu_);
    std::string id;
    do {
      char buf[24];
      std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(ids_()));
      id = buf;
    } while (sessions_.count(id));
    auto slot = std::make_shared<Slot>();
    slot->state.id = id;
    slot->state.seed = ids_();
    sessions_[id] = slot;
    return id;
  }

  bool has_session(const std::string& id) const {
    std::lock_guard<std::mutex> lock(registry_mu_);
    return sessions_.count(id) > 0;
  }

  std::vector<std::string> session_ids() const {
    std::lock_guard<std::mutex> lock(registry_mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

  InstructionResult post_instruction(const std::string& id, const std::string& text) {
    if (text.size() > options_.max_text) {
      throw ServiceError(413, "instruction exceeds " + std::to_string(options_.max_text) + " characters");
    }
    return with_session(id, [&](SessionState& st) { return instruct(st, text); });
  }

  /// Replaces an object's strokes with the user's polylines (canvas units).
  nlohmann::json redraw_object(const std::string& id, std::uint64_t object_id,
                               const std::vector<stroke::Polyline>& polylines) {
    return with_session(id, [&](SessionState& st) {
      Snapshot next = st.current;
      TrackedObject* t = next.find(object_id);
      if (!t) throw ServiceError(404, "no object " + std::to_string(object_id) + " in session " + id);
      try {
        stroke::from_raw(polylines);
      } catch (const stroke::EmptySketch& e) {
        throw ServiceError(400, std::string("redraw: ") + e.what());
      }
      t->user_redrawn = true;
      t->user_polylines = polylines;
      t->anchor = t->object;
      commit(st, std::move(next));
      return state_json(st);
    });
  }

  nlohmann::json undo(const std::string& id) {
    return with_session(id, [&](SessionState& st) {
      if (st.undo.empty()) throw ServiceError(409, "nothing to undo");
      st.current = std::move(st.undo.back());
      st.undo.pop_back();
      return state_json(st);
    });
  }

  nlohmann::json state(const std::string& id) {
    return with_session(id, [&](SessionState& st) { return state_json(st); });
  }

  /// Attention view for a turn; a negative turn picks the latest.
  AttentionView attention(const std::string& id, int turn = -1) {
    return with_session(id, [&](SessionState& st) {
      const auto& views = st.current.attention;
      if (views.empty()) throw ServiceError(404, "session has no turns yet");
      if (turn < 0) return views.back();
      for (const auto& v : views) {
        if (v.turn == turn) return v;
      }
      throw ServiceError(404, "no attention for turn " + std::to_string(turn));
    });
  }

  nlohmann::json export_session(const std::string& id) {
    return with_session(id, [&](SessionState& st) { return export_state(st); });
  }

  /// Registers an exported session under its recorded id.
  std::string import_session(const nlohmann::json& doc) {
    SessionState st = import_state(doc);
    std::lock_guard<std::mutex> lock(registry_mu_);
    if (sessions_.count(st.id)) throw ServiceError(409, "session " + st.id + " already exists");
    auto slot = std::make_shared<Slot>();
    slot->state = std::move(st);
    const std::string id = slot->state.id;
    sessions_[id] = slot;
    return id;
  }

  CanvasRendering canvas(const std::string& id) {
    return with_session(id, [&](SessionState& st) { return compose_canvas(st.current.objects); });
  }

  static nlohmann::json result_json(const std::string& id, const InstructionResult& r) {
    nlohmann::json j{{"session", id},
                     {"turn", r.turn},
                     {"scene", scene::scene_to_json(r.scene)},
                     {"objects", objects_to_json(r.objects)},
                     {"canvas", canvas_to_json(r.canvas)},
                     {"diff", r.diff.to_json()},
                     {"truncated", r.truncated}};
    j["unknown_prompt"] = r.unknown_prompt ? nlohmann::json(*r.unknown_prompt) : nlohmann::json(nullptr);
    return j;
  }

 private:
  struct Slot {
    std::mutex busy;
    SessionState state;
  };

  std::shared_ptr<Slot> slot(const std::string& id) {
    std::lock_guard<std::mutex> lock(registry_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "no session " + id);
    return it->second;
  }

  /// Runs `fn` with the session held; an overlapping call gets 409.
  template <typename Fn>
  std::invoke_result_t<Fn&, SessionState&> with_session(const std::string& id, Fn&& fn) {
    auto s = slot(id);
    std::unique_lock<std::mutex> lock(s->busy, std::try_to_lock);
    if (!lock.owns_lock()) throw ServiceError(409, "session " + id + " is busy");
    return fn(s->state);
  }

  void commit(SessionState& st, Snapshot next) {
    st.undo.push_back(std::move(st.current));
    while (st.undo.size() > options_.undo_limit) st.undo.pop_front();
    st.current = std::move(next);
  }

  nlohmann::json state_json(const SessionState& st) const {
    return {{"session", st.id},
            {"turn", st.current.turn},
            {"scene", scene::scene_to_json(st.current.scene())},
            {"objects", objects_to_json(st.current.objects)},
            {"canvas", canvas_to_json(compose_canvas(st.current.objects))},
            {"undo_depth", st.undo.size()}};
  }

  std::mt19937_64 rng_for(const SessionState& st, int turn, std::uint64_t object_id) const {
    std::seed_seq seq{static_cast<std::uint32_t>(st.seed), static_cast<std::uint32_t>(st.seed >> 32),
                      static_cast<std::uint32_t>(turn), static_cast<std::uint32_t>(object_id),
                      static_cast<std::uint32_t>(object_id >> 32)};
    return std::mt19937_64(seq);
  }

  scene::ContextWindow context_for(const Snapshot& s, const std::string& text) const {
    scene::ContextWindow ctx;
    const std::size_t window = std::min(proposer_->context_turns(), scene::kMaxContextTurns);
    const std::size_t first = s.history.size() > window ? s.history.size() - window : 0;
    for (std::size_t i = first; i < s.history.size(); ++i) {
      ctx.turns.push_back({proposer_->embed(s.history[i].text), s.history[i].scene});
    }
    ctx.current_instruction = proposer_->embed(text);
    return ctx;
  }

  static AttentionView attention_view(int turn, const proposer::GenerationResult& r) {
    AttentionView v;
    v.turn = turn;
    v.labels = r.attention.labels;
    for (std::size_t k = 0; k <= r.scene.size(); ++k) {
      const std::size_t pos = k < r.scene.size() ? r.position_of(k) : r.end_position();
      if (pos >= r.attention.labels.size()) break;
      v.outputs.push_back(k < r.scene.size() ? std::string(scene::class_name(
                                                   static_cast<std::size_t>(r.scene.objects[k].class_id)))
                                             : std::string("<end>"));
      v.rows.push_back(proposer::attention_row(r.attention, pos, -1, true));
    }
    return v;
  }

  InstructionResult instruct(SessionState& st, const std::string& text) {
    const Snapshot& prev = st.current;
    Snapshot next = prev;
    next.turn = prev.turn + 1;
    const scene::Scene before = prev.scene();
    const scene::ContextWindow ctx = context_for(prev, text);
    const proposer::GenerationResult gen = proposer_->propose(ctx);

    InstructionResult res;
    res.turn = next.turn;
    res.truncated = gen.truncated;
    next.attention.push_back(attention_view(next.turn, gen));

    // Classes the sketcher cannot draw leave the canvas as it was.
    std::optional<int> unsupported;
    for (const auto& o : gen.scene.objects) {
      if (!sketcher_->supports(o.class_id)) {
        unsupported = o.class_id;
        break;
      }
    }
    if (unsupported) {
      const std::string name(scene::class_name(static_cast<std::size_t>(*unsupported)));
      res.unknown_prompt = "I don't know how to draw a " + name + " yet. Could you draw it for me?";
      for (auto& o : next.objects) {
        ++o.turns_survived;
        res.diff.kept.push_back(o.id);
      }
    } else {
      res.diff = apply_layout(st, next, gen.scene);
      if (res.diff.unchanged()) {
        if (auto word = proposer::detect_unknown_object(ctx, gen, before)) {
          res.unknown_prompt = "I don't know what \"" + *word + "\" is. Could you draw it for me?";
        }
      }
    }
    next.history.push_back({text, next.scene()});
    res.scene = next.scene();
    res.objects = next.objects;
    res.canvas = compose_canvas(next.objects);
    commit(st, std::move(next));
    return res;
  }

  /// Matches proposed objects to existing ones by class, nearest first.
  TurnDiff apply_layout(const SessionState& st, Snapshot& next, const scene::Scene& proposed) {
    TurnDiff diff;
    std::vector<TrackedObject> old = std::move(next.objects);
    std::vector<bool> used(old.size(), false);
    std::vector<TrackedObject> placed;
    for (const auto& o : proposed.objects) {
      std::size_t best = old.size();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < old.size(); ++i) {
        if (used[i] || old[i].object.class_id != o.class_id) continue;
        const double d = std::hypot(old[i].object.x - o.x, old[i].object.y - o.y);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      if (best == old.size()) {
        TrackedObject t;
        t.id = next.next_id++;
        t.object = o;
        auto rng = rng_for(st, next.turn, t.id);
        t.z = sketcher_->sample_prior(o.class_id, rng);
        generator::DecodeResult d = sketcher_->decode(o.class_id, t.z, condition_for(clipart_, o), rng);
        t.drawing = std::move(d.drawing);
        t.truncated = d.truncated;
        diff.added.push_back(t.id);
        placed.push_back(std::move(t));
        continue;
      }
      used[best] = true;
      TrackedObject t = old[best];
      const bool pose_changed = t.object.flip != o.flip || t.object.size_id != o.size_id;
      const bool moved = std::abs(t.object.x - o.x) > options_.move_tolerance ||
                         std::abs(t.object.y - o.y) > options_.move_tolerance;
      ++t.turns_survived;
      if (pose_changed && !t.user_redrawn) {
        auto rng = rng_for(st, next.turn, t.id);
        generator::DecodeResult d = sketcher_->decode(o.class_id, t.z, condition_for(clipart_, o), rng);
        t.drawing = std::move(d.drawing);
        t.truncated = d.truncated;
        diff.regenerated.push_back(t.id);
      } else if (pose_changed || moved) {
        diff.moved.push_back(t.id);
      } else {
        // Small drift in the proposed position keeps the canvas as drawn.
        diff.kept.push_back(t.id);
        placed.push_back(std::move(t));
        continue;
      }
      t.object = o;
      placed.push_back(std::move(t));
    }
    for (std::size_t i = 0; i < old.size(); ++i) {
      if (!used[i]) diff.removed.push_back(old[i].id);
    }
    next.objects = std::move(placed);
    return diff;
  }

  std::shared_ptr<const LayoutProposer> proposer_;
  std::shared_ptr<const ObjectSketcher> sketcher_;
  data::ClipArtMapping clipart_;
  ServiceOptions options_;
  mutable std::mutex registry_mu_;
  std::mt19937_64 ids_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace scenesketch::service
