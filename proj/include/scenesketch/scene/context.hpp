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

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scenesketch/scene/scene_object.hpp"

namespace scenesketch::scene {

class ContextError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxContextTurns = 10;

struct TextToken {
  std::string surface;
  std::vector<double> embedding;  // kTokenDims entries

  void validate() const {
    if (embedding.size() != kTokenDims) {
      throw DimensionError("token embedding must have 300 dims, got " + std::to_string(embedding.size()));
    }
  }
};

/// Lowercases and splits on whitespace and punctuation; every punctuation
/// character is kept as its own token.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

struct ContextTurn {
  std::vector<TextToken> instruction;
  Scene scene;
};

struct ContextWindow {
  std::vector<ContextTurn> turns;  // chronological, at most kMaxContextTurns
  std::vector<TextToken> current_instruction;

  void validate() const {
    if (turns.size() > kMaxContextTurns) {
      throw ContextError("context window holds " + std::to_string(turns.size()) + " turns; at most " +
                         std::to_string(kMaxContextTurns) + " allowed");
    }
    for (const auto& t : turns) {
      for (const auto& tok : t.instruction) tok.validate();
      t.scene.validate();
    }
    for (const auto& tok : current_instruction) tok.validate();
  }

  /// Appends a completed turn, dropping the oldest beyond the window size.
  void push_turn(ContextTurn turn) {
    turns.push_back(std::move(turn));
    if (turns.size() > kMaxContextTurns) turns.erase(turns.begin());
  }
};

/// Within each past turn, whether the instruction precedes its scene.
enum class TurnOrder { InstructionFirst, SceneFirst };

enum class RowKind { Token, Start, Object, End };

struct SequenceRow {
  UnifiedVector vector{};
  RowKind kind = RowKind::Token;
  std::string label;
  int turn = 0;  // index into ContextWindow::turns; turns.size() for the current turn
};

inline std::string object_label(const SceneObject& o) {
  switch (o.kind) {
    case ObjectKind::Start:
      return "<start>";
    case ObjectKind::End:
      return "<end>";
    case ObjectKind::Object:
      break;
  }
  return std::string(class_name(static_cast<std::size_t>(o.class_id)));
}

inline SequenceRow object_row(const SceneObject& o, int turn) {
  const RowKind kind = o.kind == ObjectKind::Start ? RowKind::Start
                       : o.kind == ObjectKind::End ? RowKind::End
                                                   : RowKind::Object;
  return {pad_object(encode_object(o)), kind, object_label(o), turn};
}

inline SequenceRow token_row(const TextToken& t, int turn) {
  t.validate();
  return {pad_token(t.embedding), RowKind::Token, t.surface, turn};
}

/// Interleaves past turns chronologically (instruction tokens, then the scene
/// bracketed by start/end sentinels) and ends with the current instruction
/// followed by a single start sentinel that prompts generation.
/// Length: sum over turns of (m_j + l_j + 2), plus m_i + 1.
inline std::vector<SequenceRow> build_labeled_sequence(const ContextWindow& ctx,
                                                       TurnOrder order = TurnOrder::InstructionFirst) {
  ctx.validate();
  std::vector<SequenceRow> rows;
  for (std::size_t i = 0; i < ctx.turns.size(); ++i) {
    const auto& turn = ctx.turns[i];
    const int t = static_cast<int>(i);
    auto emit_text = [&] {
      for (const auto& tok : turn.instruction) rows.push_back(token_row(tok, t));
    };
    auto emit_scene = [&] {
      rows.push_back(object_row(SceneObject::start(), t));
      for (const auto& o : turn.scene.objects) rows.push_back(object_row(o, t));
      rows.push_back(object_row(SceneObject::end(), t));
    };
    if (order == TurnOrder::InstructionFirst) {
      emit_text();
      emit_scene();
    } else {
      emit_scene();
      emit_text();
    }
  }
  const int current = static_cast<int>(ctx.turns.size());
  for (const auto& tok : ctx.current_instruction) rows.push_back(token_row(tok, current));
  rows.push_back(object_row(SceneObject::start(), current));
  return rows;
}

inline std::vector<UnifiedVector> build_context_sequence(const ContextWindow& ctx,
                                                         TurnOrder order = TurnOrder::InstructionFirst) {
  std::vector<UnifiedVector> out;
  for (auto& row : build_labeled_sequence(ctx, order)) out.push_back(row.vector);
  return out;
}

inline std::size_t expected_sequence_length(const ContextWindow& ctx) {
  std::size_t n = 0;
  for (const auto& t : ctx.turns) n += t.instruction.size() + t.scene.size() + 2;
  return n + ctx.current_instruction.size() + 1;
}

}  // namespace scenesketch::scene
