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
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scenesketch/proposer/model.hpp"

namespace scenesketch::proposer {

struct RowInfo {
  scene::RowKind kind = scene::RowKind::Token;
  int turn = 0;
  std::string label;
};

struct GenerationResult {
  scene::Scene scene;
  AttentionMap attention;  // from the final pass, which saw every emitted object
  std::vector<RowInfo> rows;
  std::size_t prompt_position = 0;  // the trailing start token
  bool truncated = false;           // object cap hit before an end token

  /// Position whose output produced object k; prompt_position + size() is the end-token slot.
  std::size_t position_of(std::size_t k) const { return prompt_position + k; }
  std::size_t end_position() const { return prompt_position + scene.size(); }
};

/// Greedy autoregressive decoding: each emitted object is appended to the
/// input and the whole sequence is re-run. A start-kind prediction is treated
/// like an end token. The scene is regenerated from scratch every turn.
inline GenerationResult generate_scene(const ProposerModel& model, const scene::ContextWindow& ctx) {
  nn::NoGradGuard guard;
  std::vector<scene::SequenceRow> seq = scene::build_labeled_sequence(ctx);
  GenerationResult r;
  r.prompt_position = seq.size() - 1;
  const int turn = static_cast<int>(ctx.turns.size());
  const std::size_t cap = model.config().max_objects;
  while (true) {
    ForwardResult fr = model.forward(seq);
    const scene::SceneObject next = fr.predictions.back().decode();
    const bool stop = !next.is_object();
    if (stop || r.scene.size() == cap) {
      r.truncated = !stop;
      r.attention = std::move(fr.attention);
      break;
    }
    r.scene.objects.push_back(next);
    seq.push_back(scene::object_row(next, turn));
  }
  r.scene.turn_index = turn;
  for (const auto& row : seq) r.rows.push_back({row.kind, row.turn, row.label});
  return r;
}

struct AttentionEntry {
  std::size_t position = 0;
  std::string label;
  double weight = 0.0;
};

/// Row `position` of the attention map averaged over heads, for one layer
/// (negative counts from the last) or, with `all_layers`, over every layer.
inline std::vector<double> attention_row(const AttentionMap& map, std::size_t position, int layer = -1,
                                         bool all_layers = false) {
  if (map.layers.empty()) throw InputError("attention map is empty");
  if (position >= map.positions()) throw InputError("attention position out of range");
  std::vector<std::size_t> which;
  if (all_layers) {
    for (std::size_t i = 0; i < map.layers.size(); ++i) which.push_back(i);
  } else {
    const int n = static_cast<int>(map.layers.size());
    const int idx = layer < 0 ? n + layer : layer;
    if (idx < 0 || idx >= n) throw InputError("attention layer out of range");
    which.push_back(static_cast<std::size_t>(idx));
  }
  std::vector<double> row(map.positions(), 0.0);
  std::size_t count = 0;
  for (std::size_t l : which) {
    for (const auto& head : map.layers[l]) {
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += head.at(position, j);
      ++count;
    }
  }
  for (auto& v : row) v /= static_cast<double>(count);
  return row;
}

inline std::vector<AttentionEntry> ranked(const AttentionMap& map, const std::vector<double>& row) {
  std::vector<AttentionEntry> out;
  for (std::size_t j = 0; j < row.size(); ++j) out.push_back({j, map.labels[j], row[j]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  return out;
}

/// Inputs attended to by the position that generated object `k`, sorted by
/// head-averaged weight.
inline std::vector<AttentionEntry> attention_for_object(const GenerationResult& r, std::size_t k, int layer = -1) {
  if (k > r.scene.size()) throw InputError("no generated object " + std::to_string(k));
  return ranked(r.attention, attention_row(r.attention, r.position_of(k), layer));
}

inline const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",     "an",     "the",    "and",   "or",    "of",     "to",     "in",     "on",    "at",    "by",
      "for",   "with",   "from",   "into",  "onto",  "over",   "under",  "above",  "below", "near",  "next",
      "is",    "are",    "be",     "it",    "its",   "this",   "that",   "there",  "here",  "some",  "one",
      "two",   "three",  "please", "now",   "then",  "also",   "just",   "very",   "add",   "draw",  "put",
      "place", "make",   "sketch", "paint", "show",  "insert", "move",   "flip",   "turn",  "face",  "facing",
      "scene", "canvas", "picture", "image", "left", "right",  "middle", "center", "top",   "bottom", "side",
      "corner", "big",   "small",  "medium", "large", "little", "tiny",  "huge",   "i",     "you",   "we",
      "me",    "my",     "your",   "let",    "can",  "would",  "should", "want",   "like",  "need",  "new",
      "other", "another", "more"};
  return words;
}

inline bool is_word(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); });
}

/// When a turn emitted no new object, names the current-instruction word that
/// drew the most attention (averaged over layers and heads) at the end-token
/// slot, skipping stopwords. `previous` is the canvas before the turn; an
/// object counts as new when its class is absent from it.
inline std::optional<std::string> detect_unknown_object(const scene::ContextWindow& ctx, const GenerationResult& r,
                                                        const scene::Scene& previous,
                                                        const std::set<std::string>& stopwords = default_stopwords()) {
  if (r.truncated) return std::nullopt;
  std::multiset<int> before;
  for (const auto& o : previous.objects) before.insert(o.class_id);
  for (const auto& o : r.scene.objects) {
    auto it = before.find(o.class_id);
    if (it == before.end()) return std::nullopt;
    before.erase(it);
  }
  const int current = static_cast<int>(ctx.turns.size());
  const std::vector<double> row = attention_row(r.attention, r.end_position(), -1, true);
  std::optional<std::string> best;
  double best_w = -1.0;
  for (std::size_t j = 0; j < r.rows.size() && j < row.size(); ++j) {
    const RowInfo& info = r.rows[j];
    if (info.kind != scene::RowKind::Token || info.turn != current) continue;
    if (!is_word(info.label) || stopwords.count(data::fold_case(info.label))) continue;
    if (row[j] > best_w) {
      best_w = row[j];
      best = info.label;
    }
  }
  return best;
}

}  // namespace scenesketch::proposer
