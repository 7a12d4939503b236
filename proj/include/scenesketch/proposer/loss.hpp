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

#include <stdexcept>
#include <vector>

#include "scenesketch/nn/ops.hpp"
#include "scenesketch/proposer/config.hpp"
#include "scenesketch/scene/context.hpp"

namespace scenesketch::proposer {

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LossTerms {
  nn::Var total;
  double l_c = 0.0;
  double l_sub = 0.0;
  double l_flip = 0.0;
  double l_size = 0.0;
  double l_xy = 0.0;
  double l_kind = 0.0;
  std::size_t objects = 0;
  std::size_t class_correct = 0;

  double total_value() const { return total.item(); }
};

/// Teacher-forced input: the context sequence followed by the ground-truth
/// objects. Position `first` (the trailing start token) predicts the first
/// object; position first + k predicts object k, and first + l the end token.
struct TeacherForced {
  std::vector<scene::SequenceRow> rows;
  std::size_t first = 0;
};

inline TeacherForced teacher_forced(const scene::ContextWindow& ctx, const scene::Scene& truth) {
  TeacherForced tf;
  tf.rows = scene::build_labeled_sequence(ctx);
  tf.first = tf.rows.size() - 1;
  const int turn = static_cast<int>(ctx.turns.size());
  for (const auto& o : truth.objects) tf.rows.push_back(scene::object_row(o, turn));
  return tf;
}

/// L_cm = L_c + λ_sub L_sub + λ_flip L_flip + λ_size L_size + λ_xy L_xy,
/// plus λ_kind times the cross-entropy of the start/end/object head over the
/// l object slots and the end slot. Object terms average over the l objects.
/// raw: [T, 102] head pre-activations.
inline LossTerms loss_cm(const nn::Var& raw, std::size_t first, const scene::Scene& truth,
                         const ProposerConfig& cfg) {
  using namespace scenesketch::scene;
  const std::size_t l = truth.objects.size();
  if (raw.cols() != kObjectDims) throw AlignmentError("loss_cm: predictions must have 102 columns");
  if (first + l + 1 > raw.rows()) {
    throw AlignmentError("loss_cm: " + std::to_string(raw.rows()) + " predictions cannot cover " +
                         std::to_string(l) + " objects plus end from position " + std::to_string(first));
  }
  LossTerms t;
  t.objects = l;
  const nn::Var slots = nn::slice_rows(raw, first, l + 1);

  std::vector<int> kind_targets(l + 1, 2);
  kind_targets[l] = 1;
  const nn::Var kind_logits =
      nn::concat_cols({nn::slice_cols(slots, kStartOffset, 2), nn::Var::constant(nn::Tensor::matrix(l + 1, 1))});
  const nn::Var l_kind = nn::cross_entropy(kind_logits, kind_targets);
  t.l_kind = l_kind.item();
  nn::Var total = nn::scale(l_kind, cfg.lambda_kind);

  if (l > 0) {
    const nn::Var objs = nn::slice_rows(slots, 0, l);
    std::vector<int> cls(l), sub(l), size(l), flip(l);
    nn::Tensor xy = nn::Tensor::matrix(l, 2);
    for (std::size_t i = 0; i < l; ++i) {
      const SceneObject& o = truth.objects[i];
      o.validate();
      cls[i] = o.class_id;
      sub[i] = o.subtype_id;
      size[i] = o.size_id;
      flip[i] = o.flip ? 1 : 0;
      xy.at(i, 0) = o.x;
      xy.at(i, 1) = o.y;
    }
    const nn::Var class_logits = nn::slice_cols(objs, kClassOffset, kNumClasses);
    const nn::Var l_c = nn::cross_entropy(class_logits, cls);
    const nn::Var l_sub = nn::cross_entropy(nn::slice_cols(objs, kSubtypeOffset, kNumSubtypes), sub);
    const nn::Var l_size = nn::cross_entropy(nn::slice_cols(objs, kSizeOffset, kNumSizes), size);
    const nn::Var l_flip = nn::cross_entropy(nn::slice_cols(objs, kFlipOffset, kNumFlips), flip);
    const nn::Var pos = nn::sigmoid(nn::slice_cols(objs, kXOffset, 2));
    const nn::Var l_xy = nn::mean(nn::row_norm(nn::sub(pos, nn::Var::constant(xy))));
    t.l_c = l_c.item();
    t.l_sub = l_sub.item();
    t.l_size = l_size.item();
    t.l_flip = l_flip.item();
    t.l_xy = l_xy.item();
    total = nn::add(total, l_c);
    total = nn::add(total, nn::scale(l_sub, cfg.lambda_sub));
    total = nn::add(total, nn::scale(l_flip, cfg.lambda_flip));
    total = nn::add(total, nn::scale(l_size, cfg.lambda_size));
    total = nn::add(total, nn::scale(l_xy, cfg.lambda_xy));
    for (std::size_t i = 0; i < l; ++i) {
      const double* row = class_logits.value().data() + i * kNumClasses;
      if (static_cast<int>(argmax({row, kNumClasses})) == cls[i]) ++t.class_correct;
    }
  }
  t.total = total;
  return t;
}

}  // namespace scenesketch::proposer
