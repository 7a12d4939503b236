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

#include <gtest/gtest.h>

#include <random>

#include "scenesketch/scene/context.hpp"
#include "scenesketch/scene/scene_json.hpp"

namespace scenesketch::scene {
namespace {

SceneObject random_object(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> cls(0, kNumClasses - 1);
  std::uniform_int_distribution<int> sub(0, kNumSubtypes - 1);
  std::uniform_int_distribution<int> size(0, kNumSizes - 1);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  return SceneObject::make(cls(rng), sub(rng), size(rng), rng() & 1, pos(rng), pos(rng));
}

TextToken token(const std::string& word, double fill) {
  return {word, std::vector<double>(kTokenDims, fill)};
}

TEST(Layout, OffsetsMatchBlockSizes) {
  EXPECT_EQ(kClassOffset, 2u);
  EXPECT_EQ(kSubtypeOffset, 60u);
  EXPECT_EQ(kSizeOffset, 95u);
  EXPECT_EQ(kFlipOffset, 98u);
  EXPECT_EQ(kXOffset, 100u);
  EXPECT_EQ(kYOffset, 101u);
  EXPECT_EQ(kUnifiedDims, 402u);
}

TEST(Encode, RoundTripOnRandomObjects) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const SceneObject o = random_object(rng);
    const ObjectVector v = encode_object(o);
    double ones = 0;
    for (std::size_t k = 0; k < kXOffset; ++k) ones += v[k];
    EXPECT_EQ(ones, 4.0);
    EXPECT_EQ(decode_object(v), o);
  }
}

TEST(Encode, SentinelsUseTheirOwnSlots) {
  const ObjectVector s = encode_object(SceneObject::start());
  const ObjectVector e = encode_object(SceneObject::end());
  EXPECT_EQ(s[kStartOffset], 1.0);
  EXPECT_EQ(e[kEndOffset], 1.0);
  EXPECT_EQ(decode_object(s).kind, ObjectKind::Start);
  EXPECT_EQ(decode_object(e).kind, ObjectKind::End);
}

TEST(Encode, RejectsOutOfRangeFields) {
  EXPECT_THROW(encode_object(SceneObject::make(58, 0, 0, false, 0.5, 0.5)), InvalidObject);
  EXPECT_THROW(encode_object(SceneObject::make(0, 35, 0, false, 0.5, 0.5)), InvalidObject);
  EXPECT_THROW(encode_object(SceneObject::make(0, 0, 3, false, 0.5, 0.5)), InvalidObject);
  EXPECT_THROW(encode_object(SceneObject::make(0, 0, 0, false, 1.5, 0.5)), InvalidObject);
  EXPECT_THROW(encode_object(SceneObject::make(0, 0, 0, false, 0.5, -0.1)), InvalidObject);
}

TEST(Decode, SoftVectorTakesArgmaxAndClampsPosition) {
  ObjectVector v{};
  v[kClassOffset + 5] = 0.7;
  v[kClassOffset + 9] = 0.3;
  v[kSubtypeOffset + 2] = 0.5;
  v[kSizeOffset + 1] = 0.9;
  v[kFlipOffset + 1] = 0.6;
  v[kFlipOffset] = 0.4;
  v[kXOffset] = 1.3;
  v[kYOffset] = -0.2;
  const SceneObject o = decode_object(v);
  EXPECT_EQ(o.kind, ObjectKind::Object);
  EXPECT_EQ(o.class_id, 5);
  EXPECT_EQ(o.subtype_id, 2);
  EXPECT_EQ(o.size_id, 1);
  EXPECT_TRUE(o.flip);
  EXPECT_EQ(o.x, 1.0);
  EXPECT_EQ(o.y, 0.0);
}

TEST(Decode, TiesBreakTowardLowestIndex) {
  ObjectVector v{};
  v[kClassOffset + 3] = 0.5;
  v[kClassOffset + 7] = 0.5;
  EXPECT_EQ(decode_object(v).class_id, 3);
}

TEST(Decode, RejectsWrongLength) {
  std::vector<double> v(101, 0.0);
  EXPECT_THROW(decode_object(v), DimensionError);
}

TEST(Pad, ObjectAndTokenOccupyDisjointBlocks) {
  std::mt19937_64 rng(2);
  const ObjectVector o = encode_object(random_object(rng));
  const UnifiedVector po = pad_object(o);
  for (std::size_t i = 0; i < kObjectDims; ++i) EXPECT_EQ(po[i], o[i]);
  for (std::size_t i = kObjectDims; i < kUnifiedDims; ++i) EXPECT_EQ(po[i], 0.0);

  std::vector<double> t(kTokenDims);
  for (std::size_t i = 0; i < kTokenDims; ++i) t[i] = 0.01 * static_cast<double>(i) + 0.5;
  const UnifiedVector pt = pad_token(t);
  for (std::size_t i = 0; i < kObjectDims; ++i) EXPECT_EQ(pt[i], 0.0);
  for (std::size_t i = 0; i < kTokenDims; ++i) EXPECT_EQ(pt[kObjectDims + i], t[i]);

  EXPECT_THROW(pad_object(std::vector<double>(100)), DimensionError);
  EXPECT_THROW(pad_token(std::vector<double>(299)), DimensionError);
}

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  const std::vector<std::string> want{"draw", "a", "duck", ",", "big", "."};
  EXPECT_EQ(tokenize("Draw a  Duck, BIG."), want);
  EXPECT_TRUE(tokenize("   ").empty());
}

ContextWindow sample_window(std::mt19937_64& rng, std::size_t turns) {
  ContextWindow w;
  for (std::size_t t = 0; t < turns; ++t) {
    ContextTurn turn;
    for (std::size_t k = 0; k <= t % 3; ++k) turn.instruction.push_back(token("w", 0.1 * static_cast<double>(t + 1)));
    for (std::size_t k = 0; k < t % 4; ++k) turn.scene.objects.push_back(random_object(rng));
    w.turns.push_back(turn);
  }
  w.current_instruction = {token("now", 0.9), token("draw", 0.8)};
  return w;
}

TEST(Context, LengthFollowsTurnCounts) {
  std::mt19937_64 rng(3);
  for (std::size_t turns = 0; turns <= kMaxContextTurns; ++turns) {
    const ContextWindow w = sample_window(rng, turns);
    // independent count: each past turn adds its tokens, its objects and two sentinels
    std::size_t oracle = 0;
    for (std::size_t t = 0; t < turns; ++t) oracle += (t % 3 + 1) + (t % 4) + 2;
    oracle += 2 + 1;
    EXPECT_EQ(build_context_sequence(w).size(), oracle);
    EXPECT_EQ(expected_sequence_length(w), oracle);
  }
}

TEST(Context, OrderIsChronologicalAndEndsWithStart) {
  std::mt19937_64 rng(4);
  const ContextWindow w = sample_window(rng, 3);
  const auto rows = build_labeled_sequence(w);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.back().kind, RowKind::Start);
  EXPECT_EQ(rows.back().turn, 3);
  int last_turn = 0;
  for (const auto& r : rows) {
    EXPECT_GE(r.turn, last_turn);
    last_turn = r.turn;
  }
  // turn 0: one token, then <start>, <end>
  EXPECT_EQ(rows[0].kind, RowKind::Token);
  EXPECT_EQ(rows[1].kind, RowKind::Start);
  EXPECT_EQ(rows[2].kind, RowKind::End);
  // current instruction right before the trailing start
  EXPECT_EQ(rows[rows.size() - 3].label, "now");
  EXPECT_EQ(rows[rows.size() - 2].label, "draw");
}

TEST(Context, SceneFirstOrderSwapsWithinTurn) {
  std::mt19937_64 rng(5);
  const ContextWindow w = sample_window(rng, 1);
  const auto rows = build_labeled_sequence(w, TurnOrder::SceneFirst);
  EXPECT_EQ(rows[0].kind, RowKind::Start);
  EXPECT_EQ(rows[1].kind, RowKind::End);
  EXPECT_EQ(rows[2].kind, RowKind::Token);
}

TEST(Context, TooManyTurnsIsRejectedButPushTurnSlides) {
  std::mt19937_64 rng(6);
  ContextWindow w = sample_window(rng, kMaxContextTurns + 1);
  EXPECT_THROW(build_context_sequence(w), ContextError);

  ContextWindow sliding;
  for (int i = 0; i < 15; ++i) {
    ContextTurn t;
    t.scene.turn_index = i;
    sliding.push_turn(t);
  }
  EXPECT_EQ(sliding.turns.size(), kMaxContextTurns);
  EXPECT_EQ(sliding.turns.front().scene.turn_index, 5);
}

TEST(Context, TokenDimensionIsChecked) {
  ContextWindow w;
  w.current_instruction = {{"bad", std::vector<double>(10, 0.0)}};
  EXPECT_THROW(build_context_sequence(w), DimensionError);
}

TEST(Json, SceneRoundTrip) {
  std::mt19937_64 rng(7);
  Scene s;
  for (int i = 0; i < 5; ++i) s.objects.push_back(random_object(rng));
  const Scene back = scene_from_json(nlohmann::json::parse(scene_to_json(s).dump()));
  EXPECT_EQ(back, s);
  EXPECT_THROW(scene_from_json(nlohmann::json::parse(R"({"things": []})")), std::invalid_argument);
}

TEST(Classes, NamesResolveBothWays) {
  EXPECT_EQ(class_name(5), "duck");
  EXPECT_EQ(class_id("duck"), 5u);
  EXPECT_FALSE(class_id("unicorn").has_value());
  for (std::size_t i = 0; i < kNumClasses; ++i) EXPECT_EQ(class_id(class_name(i)), i);
}

}  // namespace
}  // namespace scenesketch::scene
