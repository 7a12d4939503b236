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
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scenesketch/nn/ops.hpp"

namespace scenesketch::nn {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rounds to the nearest 32-bit float. Parameters always hold
/// float-representable values so that checkpoints reload exactly.
inline double to_float_precision(double v) { return static_cast<double>(static_cast<float>(v)); }

/// Ordered, named collection of trainable tensors.
class ParameterStore {
 public:
  Var add(const std::string& name, Tensor value) {
    if (index_.count(name)) throw ConfigError("duplicate parameter " + name);
    for (auto& v : value.storage()) v = to_float_precision(v);
    index_[name] = params_.size();
    params_.emplace_back(name, Var::leaf(std::move(value)));
    return params_.back().second;
  }

  /// Scaled uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Var add_uniform(const std::string& name, Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(std::move(shape));
    for (auto& v : t.storage()) v = dist(rng);
    return add(name, std::move(t));
  }

  Var add_constant(const std::string& name, Shape shape, double fill) { return add(name, Tensor(std::move(shape), fill)); }

  const std::vector<std::pair<std::string, Var>>& items() const { return params_; }
  std::vector<std::pair<std::string, Var>>& items() { return params_; }

  const Var& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter " + name);
    return params_[it->second].second;
  }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [_, v] : params_) n += v.value().size();
    return n;
  }

  void zero_grad() {
    for (auto& [_, v] : params_) v.zero_grad();
  }

 private:
  std::vector<std::pair<std::string, Var>> params_;
  std::map<std::string, std::size_t> index_;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng)
      : weight_(store.add_uniform(name + ".weight", {in, out}, in, rng)),
        bias_(store.add_uniform(name + ".bias", {1, out}, in, rng)) {}

  Var operator()(const Var& x) const { return add(matmul(x, weight_), bias_); }

  const Var& weight() const { return weight_; }
  const Var& bias() const { return bias_; }
  std::size_t in_features() const { return weight_.rows(); }
  std::size_t out_features() const { return weight_.cols(); }

 private:
  Var weight_;
  Var bias_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, std::size_t width)
      : gain_(store.add_constant(name + ".gain", {1, width}, 1.0)),
        bias_(store.add_constant(name + ".bias", {1, width}, 0.0)) {}

  Var operator()(const Var& x) const { return layer_norm(x, gain_, bias_); }

 private:
  Var gain_;
  Var bias_;
};

/// Token-id embedding table.
class Embedding {
 public:
  Embedding() = default;
  Embedding(ParameterStore& store, const std::string& name, std::size_t count, std::size_t width,
            std::mt19937_64& rng)
      : table_(store.add_uniform(name + ".table", {count, width}, width, rng)) {}

  Var operator()(std::vector<std::size_t> ids) const { return gather_rows(table_, std::move(ids)); }
  const Var& table() const { return table_; }

 private:
  Var table_;
};

struct AttentionResult {
  Var output;
  std::vector<Tensor> head_weights;  // one [T, T] matrix per head
};

/// Multi-head causal self-attention over one sequence [T, d].
class MaskedSelfAttention {
 public:
  MaskedSelfAttention() = default;
  MaskedSelfAttention(ParameterStore& store, const std::string& name, std::size_t width, std::size_t heads,
                      std::mt19937_64& rng)
      : heads_(heads) {
    if (heads == 0 || width % heads != 0) {
      throw ConfigError("attention: " + std::to_string(heads) + " heads do not divide width " + std::to_string(width));
    }
    qkv_ = Linear(store, name + ".qkv", width, 3 * width, rng);
    proj_ = Linear(store, name + ".proj", width, width, rng);
  }

  AttentionResult operator()(const Var& x) const {
    if (x.rows() == 0) throw ShapeError("attention: empty sequence");
    const std::size_t width = x.cols();
    const std::size_t dh = width / heads_;
    const Var qkv = qkv_(x);
    const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Var> outs;
    AttentionResult result;
    for (std::size_t h = 0; h < heads_; ++h) {
      const Var q = slice_cols(qkv, h * dh, dh);
      const Var k = slice_cols(qkv, width + h * dh, dh);
      const Var v = slice_cols(qkv, 2 * width + h * dh, dh);
      const Var w = causal_softmax(scale(matmul(q, transpose(k)), inv));
      result.head_weights.push_back(w.value());
      outs.push_back(matmul(w, v));
    }
    result.output = proj_(outs.size() == 1 ? outs[0] : concat_cols(outs));
    return result;
  }

  std::size_t heads() const { return heads_; }

 private:
  std::size_t heads_ = 1;
  Linear qkv_;
  Linear proj_;
};

struct BlockResult {
  Var output;
  std::vector<Tensor> head_weights;
};

/// Pre-norm transformer decoder block: attention and a GELU feed-forward,
/// each wrapped in a residual connection.
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(ParameterStore& store, const std::string& name, std::size_t width, std::size_t heads,
                   std::size_t ff_width, std::mt19937_64& rng)
      : ln1_(store, name + ".ln1", width),
        attn_(store, name + ".attn", width, heads, rng),
        ln2_(store, name + ".ln2", width),
        ff1_(store, name + ".ff1", width, ff_width, rng),
        ff2_(store, name + ".ff2", ff_width, width, rng) {}

  BlockResult operator()(const Var& x) const {
    if (x.rows() == 0) throw ShapeError("transformer block: zero-length sequence");
    AttentionResult a = attn_(ln1_(x));
    const Var h = add(x, a.output);
    const Var out = add(h, ff2_(gelu(ff1_(ln2_(h)))));
    return {out, std::move(a.head_weights)};
  }

 private:
  LayerNorm ln1_;
  MaskedSelfAttention attn_;
  LayerNorm ln2_;
  Linear ff1_;
  Linear ff2_;
};

struct LstmState {
  Var h;
  Var c;
};

class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterStore& store, const std::string& name, std::size_t input, std::size_t hidden,
           std::mt19937_64& rng)
      : hidden_(hidden) {
    weight_ = store.add_uniform(name + ".weight", {input + hidden, 4 * hidden}, input + hidden, rng);
    Tensor b({1, 4 * hidden}, 0.0);
    for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;  // forget gate
    bias_ = store.add(name + ".bias", std::move(b));
  }

  std::size_t hidden() const { return hidden_; }
  std::size_t input() const { return weight_.rows() - hidden_; }

  LstmState zero_state(std::size_t batch) const {
    return {Var::constant(Tensor::matrix(batch, hidden_)), Var::constant(Tensor::matrix(batch, hidden_))};
  }

  /// One step; gate order is input, forget, candidate, output.
  LstmState step(const LstmState& state, const Var& x) const { return step(state, x, Var()); }

  /// As step(), with `extra` [B, 4H] added to the gate pre-activations; used
  /// for per-sequence inputs that stay fixed across steps.
  LstmState step(const LstmState& state, const Var& x, const Var& extra) const {
    Var gates = add(matmul(concat_cols({x, state.h}), weight_), bias_);
    if (extra.defined()) gates = add(gates, extra);
    const Var i = sigmoid(slice_cols(gates, 0, hidden_));
    const Var f = sigmoid(slice_cols(gates, hidden_, hidden_));
    const Var g = tanh(slice_cols(gates, 2 * hidden_, hidden_));
    const Var o = sigmoid(slice_cols(gates, 3 * hidden_, hidden_));
    const Var c = add(mul(f, state.c), mul(i, g));
    return {mul(o, tanh(c)), c};
  }

  /// Step that only advances rows whose entry in `active` is 1.
  LstmState masked_step(const LstmState& state, const Var& x, const Tensor& active) const {
    const LstmState next = step(state, x);
    Tensor keep(active.shape());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = 1.0 - active[i];
    const Var a = Var::constant(broadcast_cols(active));
    const Var k = Var::constant(broadcast_cols(keep));
    return {add(mul(a, next.h), mul(k, state.h)), add(mul(a, next.c), mul(k, state.c))};
  }

  /// Runs the whole sequence from a zero state and returns the final state.
  LstmState run(const std::vector<Var>& steps) const {
    if (steps.empty()) throw ShapeError("lstm: empty sequence");
    LstmState s = zero_state(steps.front().rows());
    for (const auto& x : steps) s = step(s, x);
    return s;
  }

  const Var& weight() const { return weight_; }

 private:
  Tensor broadcast_cols(const Tensor& column) const {
    Tensor out = Tensor::matrix(column.size(), hidden_);
    for (std::size_t r = 0; r < column.size(); ++r) {
      for (std::size_t c = 0; c < hidden_; ++c) out.at(r, c) = column[r];
    }
    return out;
  }

  std::size_t hidden_ = 0;
  Var weight_;
  Var bias_;
};

struct BiLstmResult {
  Var forward_final;   // [B, H], state after each row's last valid step
  Var backward_final;  // [B, H], state after reading each row back to step 0
};

/// Bidirectional LSTM over a padded batch. `lengths[b]` is the number of
/// valid steps in row b; padding steps leave that row's state untouched.
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterStore& store, const std::string& name, std::size_t input, std::size_t hidden,
         std::mt19937_64& rng)
      : fwd_(store, name + ".fwd", input, hidden, rng), bwd_(store, name + ".bwd", input, hidden, rng) {}

  BiLstmResult operator()(const std::vector<Var>& steps, const std::vector<std::size_t>& lengths) const {
    if (steps.empty()) throw ShapeError("bilstm: empty sequence");
    const std::size_t batch = steps.front().rows();
    if (lengths.size() != batch) throw ShapeError("bilstm: length count mismatch");
    LstmState f = fwd_.zero_state(batch);
    LstmState b = bwd_.zero_state(batch);
    const std::size_t total = steps.size();
    for (std::size_t t = 0; t < total; ++t) {
      f = fwd_.masked_step(f, steps[t], active_mask(lengths, t));
    }
    for (std::size_t t = total; t-- > 0;) {
      b = bwd_.masked_step(b, steps[t], active_mask(lengths, t));
    }
    return {f.h, b.h};
  }

  const LstmCell& forward_cell() const { return fwd_; }
  const LstmCell& backward_cell() const { return bwd_; }
  std::size_t hidden() const { return fwd_.hidden(); }

 private:
  static Tensor active_mask(const std::vector<std::size_t>& lengths, std::size_t t) {
    Tensor m = Tensor::matrix(lengths.size(), 1);
    for (std::size_t i = 0; i < lengths.size(); ++i) m[i] = t < lengths[i] ? 1.0 : 0.0;
    return m;
  }

  LstmCell fwd_;
  LstmCell bwd_;
};

/// Small strided CNN that flattens a square binary mask into an embedding.
/// Each stage halves the resolution; the flattened result is projected to
/// `embedding` features.
class ConvMaskEncoder {
 public:
  ConvMaskEncoder() = default;
  ConvMaskEncoder(ParameterStore& store, const std::string& name, std::size_t side,
                  std::vector<std::size_t> channels, std::size_t embedding, std::mt19937_64& rng)
      : side_(side) {
    std::size_t in_ch = 1;
    std::size_t s = side;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      Conv2dGeometry geo{in_ch, s, s, 3, 2, 1};
      const std::string stage = name + ".conv" + std::to_string(i);
      stages_.push_back({store.add_uniform(stage + ".weight", {channels[i], geo.patch()}, geo.patch(), rng),
                         store.add_uniform(stage + ".bias", {1, channels[i]}, geo.patch(), rng), geo});
      in_ch = channels[i];
      s = geo.out_height();
    }
    flat_ = in_ch * s * s;
    proj_ = Linear(store, name + ".proj", flat_, embedding, rng);
  }

  /// masks: [B, side*side] with values in {0, 1}.
  Var operator()(const Var& masks) const {
    if (masks.cols() != side_ * side_) throw ShapeError("mask encoder: expected side " + std::to_string(side_));
    Var x = masks;
    for (const auto& st : stages_) x = relu(conv2d(x, st.weight, st.bias, st.geo));
    return proj_(x);
  }

  std::size_t side() const { return side_; }
  std::size_t embedding() const { return proj_.out_features(); }

 private:
  struct Stage {
    Var weight;
    Var bias;
    Conv2dGeometry geo;
  };
  std::size_t side_ = 0;
  std::size_t flat_ = 0;
  std::vector<Stage> stages_;
  Linear proj_;
};

}  // namespace scenesketch::nn
