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
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/nn/checkpoint.hpp"
#include "scenesketch/nn/layers.hpp"
#include "scenesketch/proposer/config.hpp"
#include "scenesketch/scene/context.hpp"

namespace scenesketch::proposer {

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Activated head outputs for one sequence position.
struct ObjectPrediction {
  std::array<double, 3> kind{};  // softmax over (start, end, object)
  std::vector<double> class_logits;
  std::vector<double> subtype_logits;
  std::vector<double> size_logits;
  std::vector<double> flip_logits;
  double x = 0.5;
  double y = 0.5;

  bool is_end() const { return scene::argmax(kind) == 1; }

  /// Greedy decode; ties go to the lowest index.
  scene::SceneObject decode() const {
    switch (scene::argmax(kind)) {
      case 0:
        return scene::SceneObject::start();
      case 1:
        return scene::SceneObject::end();
      default:
        break;
    }
    return scene::SceneObject::make(static_cast<int>(scene::argmax(class_logits)),
                                    static_cast<int>(scene::argmax(subtype_logits)),
                                    static_cast<int>(scene::argmax(size_logits)), scene::argmax(flip_logits) == 1,
                                    x, y);
  }
};

/// Attention weights of every layer and head, [T, T] each, and a label per
/// input position (token surface or class name).
struct AttentionMap {
  std::vector<std::vector<nn::Tensor>> layers;
  std::vector<std::string> labels;

  std::size_t positions() const { return labels.size(); }
};

struct ForwardResult {
  nn::Var raw;  // [T, 102] head pre-activations
  std::vector<ObjectPrediction> predictions;
  AttentionMap attention;
};

// Head column layout mirrors the object vector: start and end logits, then
// the class/subtype/size/flip blocks, then x and y before the sigmoid. The
// object kind has an implicit logit of 0.
inline ObjectPrediction activate(std::span<const double> r) {
  ObjectPrediction p;
  const double m = std::max({r[scene::kStartOffset], r[scene::kEndOffset], 0.0});
  std::array<double, 3> e{std::exp(r[scene::kStartOffset] - m), std::exp(r[scene::kEndOffset] - m), std::exp(-m)};
  const double z = e[0] + e[1] + e[2];
  for (std::size_t i = 0; i < 3; ++i) p.kind[i] = e[i] / z;
  auto block = [&](std::size_t off, std::size_t n) {
    return std::vector<double>(r.begin() + static_cast<std::ptrdiff_t>(off),
                               r.begin() + static_cast<std::ptrdiff_t>(off + n));
  };
  p.class_logits = block(scene::kClassOffset, scene::kNumClasses);
  p.subtype_logits = block(scene::kSubtypeOffset, scene::kNumSubtypes);
  p.size_logits = block(scene::kSizeOffset, scene::kNumSizes);
  p.flip_logits = block(scene::kFlipOffset, scene::kNumFlips);
  p.x = 1.0 / (1.0 + std::exp(-r[scene::kXOffset]));
  p.y = 1.0 / (1.0 + std::exp(-r[scene::kYOffset]));
  return p;
}

inline nn::Tensor sequence_tensor(const std::vector<scene::SequenceRow>& rows) {
  nn::Tensor t = nn::Tensor::matrix(rows.size(), scene::kUnifiedDims);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].vector.begin(), rows[i].vector.end(), t.data() + i * scene::kUnifiedDims);
  }
  return t;
}

/// Decoder-only transformer over the interleaved text/scene sequence.
class ProposerModel {
 public:
  explicit ProposerModel(ProposerConfig config = {}) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    input_ = nn::Linear(store_, "input", scene::kUnifiedDims, config_.model_dim, rng);
    positions_ = nn::Embedding(store_, "position", config_.max_positions, config_.model_dim, rng);
    for (std::size_t i = 0; i < config_.layers; ++i) {
      blocks_.emplace_back(store_, "block" + std::to_string(i), config_.model_dim, config_.heads, config_.ff_dim, rng);
    }
    final_ln_ = nn::LayerNorm(store_, "final_ln", config_.model_dim);
    head_ = nn::Linear(store_, "head", config_.model_dim, scene::kObjectDims, rng);
  }

  const ProposerConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

  /// seq: [T, 402]. One prediction per position.
  ForwardResult forward(const nn::Tensor& seq, std::vector<std::string> labels = {}) const {
    if (seq.rows() == 0) throw InputError("proposer: empty sequence");
    if (seq.cols() != scene::kUnifiedDims) throw InputError("proposer: rows must have 402 dims");
    const std::size_t t = seq.rows();
    if (t > config_.max_positions) {
      throw InputError("proposer: sequence of " + std::to_string(t) + " exceeds " +
                       std::to_string(config_.max_positions) + " positions");
    }
    std::vector<std::size_t> ids(t);
    for (std::size_t i = 0; i < t; ++i) ids[i] = i;
    nn::Var h = nn::add(input_(nn::Var::constant(seq)), positions_(ids));
    ForwardResult out;
    for (const auto& block : blocks_) {
      nn::BlockResult b = block(h);
      h = b.output;
      out.attention.layers.push_back(std::move(b.head_weights));
    }
    out.raw = head_(final_ln_(h));
    out.predictions.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
      out.predictions.push_back(activate({out.raw.value().data() + i * scene::kObjectDims, scene::kObjectDims}));
    }
    if (labels.empty()) labels.assign(t, "");
    if (labels.size() != t) throw InputError("proposer: label count differs from sequence length");
    out.attention.labels = std::move(labels);
    return out;
  }

  ForwardResult forward(const std::vector<scene::SequenceRow>& rows) const {
    std::vector<std::string> labels;
    for (const auto& r : rows) labels.push_back(r.label);
    return forward(sequence_tensor(rows), std::move(labels));
  }

 private:
  ProposerConfig config_;
  nn::ParameterStore store_;
  nn::Linear input_;
  nn::Embedding positions_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::LayerNorm final_ln_;
  nn::Linear head_;
};

/// A trained proposer together with the word vectors it was trained on.
struct ProposerBundle {
  ProposerModel model;
  data::EmbeddingTable embeddings;
};

inline nn::Checkpoint proposer_checkpoint(const ProposerModel& model, const data::EmbeddingTable& emb,
                                          const nn::Adam* optimizer = nullptr) {
  nn::Checkpoint ck;
  ck.meta["kind"] = "proposer";
  ck.meta["config"] = model.config();
  nlohmann::json vocab = nlohmann::json::array();
  nn::Tensor table = nn::Tensor::matrix(std::max<std::size_t>(emb.size(), 1), emb.dim());
  std::size_t i = 0;
  for (const auto& [word, v] : emb.rows()) {
    vocab.push_back(word);
    std::copy(v.begin(), v.end(), table.data() + i * emb.dim());
    ++i;
  }
  ck.meta["vocab"] = vocab;
  nn::add_parameters(ck, model.parameters(), optimizer);
  ck.tensors.emplace_back("vocab/vectors", std::move(table));
  return ck;
}

inline void save_proposer(const std::string& path, const ProposerModel& model, const data::EmbeddingTable& emb,
                          const nn::Adam* optimizer = nullptr) {
  nn::save_checkpoint(path, proposer_checkpoint(model, emb, optimizer));
}

inline ProposerBundle proposer_from_checkpoint(const nn::Checkpoint& ck) {
  if (ck.meta.value("kind", "") != "proposer") throw nn::CheckpointError("not a proposer checkpoint");
  ProposerBundle b{ProposerModel(ck.meta.at("config").get<ProposerConfig>()), data::EmbeddingTable()};
  nn::load_parameters(ck, b.model.parameters());
  const auto& vocab = ck.meta.at("vocab");
  const nn::Tensor& table = ck.tensor("vocab/vectors");
  if (table.cols() != b.embeddings.dim()) throw nn::CheckpointError("vocab vectors must have 300 dims");
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double* row = table.data() + i * table.cols();
    b.embeddings.insert(vocab[i].get<std::string>(), std::vector<double>(row, row + table.cols()));
  }
  return b;
}

inline ProposerBundle load_proposer(const std::string& path) {
  return proposer_from_checkpoint(nn::load_checkpoint(path));
}

}  // namespace scenesketch::proposer
