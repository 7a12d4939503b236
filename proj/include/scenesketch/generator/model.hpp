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
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/generator/config.hpp"
#include "scenesketch/nn/checkpoint.hpp"
#include "scenesketch/nn/gmm.hpp"
#include "scenesketch/nn/layers.hpp"
#include "scenesketch/nn/ops.hpp"
#include "scenesketch/stroke/bitmap.hpp"
#include "scenesketch/stroke/mask.hpp"
#include "scenesketch/stroke/stroke5.hpp"

namespace scenesketch::generator {

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Latent = std::vector<double>;

/// Mask and aspect ratio that steer decoding.
struct GeneratorCondition {
  stroke::Mask mask{stroke::Bitmap(stroke::kMaskSide, stroke::kMaskSide)};
  double ratio = 1.0;
};

/// Height over width of the ink's pixel-centre extent.
inline double bitmap_aspect_ratio(const stroke::Bitmap& b) {
  int min_x = b.width(), max_x = -1, min_y = b.height(), max_y = -1;
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      if (!b.get(x, y)) continue;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x <= min_x) throw stroke::DegenerateGeometry("silhouette has zero width");
  return static_cast<double>(max_y - min_y) / static_cast<double>(max_x - min_x);
}

/// Condition for a clip-art pose: the silhouette is fitted to the mask grid,
/// mirrored when `flip` is set.
inline GeneratorCondition condition_from_silhouette(const stroke::Bitmap& silhouette, bool flip = false,
                                                    int side = stroke::kMaskSide) {
  stroke::Bitmap fitted = stroke::fit_bitmap(silhouette, side, side);
  if (flip) fitted = stroke::flip_horizontal(fitted);
  return {stroke::build_mask(fitted), bitmap_aspect_ratio(fitted)};
}

/// Condition that a training drawing carries for itself.
inline GeneratorCondition condition_from_drawing(const stroke::SketchDrawing& d, int side = stroke::kMaskSide) {
  return {stroke::drawing_mask(d, side), stroke::aspect_ratio(d).r};
}

struct EncoderOutput {
  nn::Var mu;      // [B, latent]
  nn::Var logvar;  // [B, latent]
  nn::Var z;       // mu + exp(logvar / 2) * eps
};

struct DecodeResult {
  stroke::SketchDrawing drawing;
  bool truncated = false;  // max_steps hit; the end row was forced
  double ratio = 1.0;
  Latent z;
};

struct LossParts {
  nn::Var total;
  nn::Var reconstruction;  // L_R
  nn::Var kl;              // L_KL
  double kl_weight = 0.0;
};

/// Per-category conditional sequence VAE over Stroke-5 drawings.
class ObjectGenerator {
 public:
  explicit ObjectGenerator(GeneratorConfig config = {}) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    const std::size_t h = config_.decoder_hidden;
    encoder_ = nn::BiLstm(store_, "encoder", 5, config_.encoder_hidden, rng);
    mu_ = nn::Linear(store_, "mu", 2 * config_.encoder_hidden, config_.latent, rng);
    logvar_ = nn::Linear(store_, "logvar", 2 * config_.encoder_hidden, config_.latent, rng);
    mask_encoder_ = nn::ConvMaskEncoder(store_, "mask", config_.mask_side, config_.mask_channels,
                                        config_.mask_embedding, rng);
    init_ = nn::Linear(store_, "init", config_.latent, 2 * h, rng);
    cond_ = nn::Linear(store_, "cond", config_.latent + 1 + config_.mask_embedding, 4 * h, rng);
    decoder_ = nn::LstmCell(store_, "decoder", 5, h, rng);
    output_ = nn::Linear(store_, "output", h, config_.output_width(), rng);
  }

  const GeneratorConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

  /// Reads rows after the initial one. `eps` supplies the noise; when it is
  /// empty, z equals mu.
  EncoderOutput encode(const std::vector<stroke::SketchDrawing>& batch, const nn::Tensor& eps = {}) const {
    if (batch.empty()) throw InputError("generator: empty batch");
    std::vector<std::size_t> lengths;
    std::size_t longest = 0;
    for (const auto& d : batch) {
      if (d.strokes.size() < 2) throw InputError("generator: drawing has no strokes to encode");
      lengths.push_back(d.strokes.size() - 1);
      longest = std::max(longest, lengths.back());
    }
    std::vector<nn::Var> steps;
    for (std::size_t t = 0; t < longest; ++t) {
      nn::Tensor x = nn::Tensor::matrix(batch.size(), 5);
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto row = t + 1 < batch[b].strokes.size() ? batch[b].strokes[t + 1].to_array()
                                                         : stroke::Stroke5::end().to_array();
        for (std::size_t k = 0; k < 5; ++k) x.at(b, k) = row[k];
      }
      steps.push_back(nn::Var::constant(std::move(x)));
    }
    const nn::BiLstmResult enc = encoder_(steps, lengths);
    const nn::Var hidden = nn::concat_cols({enc.forward_final, enc.backward_final});
    EncoderOutput out{mu_(hidden), logvar_(hidden), {}};
    if (eps.size() == 0) {
      out.z = out.mu;
    } else {
      if (eps.rows() != batch.size() || eps.cols() != config_.latent) throw InputError("generator: eps shape");
      out.z = nn::add(out.mu, nn::mul(nn::exp(nn::scale(out.logvar, 0.5)), nn::Var::constant(eps)));
    }
    return out;
  }

  EncoderOutput encode(const stroke::SketchDrawing& d) const { return encode(std::vector<stroke::SketchDrawing>{d}); }

  template <typename Rng>
  EncoderOutput encode_sampled(const std::vector<stroke::SketchDrawing>& batch, Rng& rng) const {
    return encode(batch, standard_normal(batch.size(), rng));
  }

  template <typename Rng>
  Latent sample_prior(Rng& rng) const {
    const nn::Tensor t = standard_normal(1, rng);
    return {t.storage().begin(), t.storage().end()};
  }

  /// Per-sequence gate term and initial state for a batch of latents.
  struct DecoderSetup {
    nn::Var extra;
    nn::LstmState state;
  };

  DecoderSetup setup(const nn::Var& z, const std::vector<GeneratorCondition>& conds) const {
    if (z.rows() != conds.size()) throw InputError("generator: latent and condition counts differ");
    if (z.cols() != config_.latent) throw InputError("generator: latent width");
    const std::size_t side = config_.mask_side;
    nn::Tensor masks = nn::Tensor::matrix(conds.size(), side * side);
    nn::Tensor ratios = nn::Tensor::matrix(conds.size(), 1);
    for (std::size_t b = 0; b < conds.size(); ++b) {
      const auto& bm = conds[b].mask.bitmap;
      if (static_cast<std::size_t>(bm.width()) != side || static_cast<std::size_t>(bm.height()) != side) {
        throw InputError("generator: mask must be " + std::to_string(side) + "x" + std::to_string(side));
      }
      std::copy(bm.bits().begin(), bm.bits().end(), masks.data() + b * side * side);
      ratios[b] = conds[b].ratio;
    }
    const nn::Var emb = mask_encoder_(nn::Var::constant(std::move(masks)));
    DecoderSetup s;
    s.extra = cond_(nn::concat_cols({z, nn::Var::constant(std::move(ratios)), emb}));
    const nn::Var init = nn::tanh(init_(z));
    const std::size_t h = config_.decoder_hidden;
    s.state = {nn::slice_cols(init, 0, h), nn::slice_cols(init, h, h)};
    return s;
  }

  /// L_s = lambda_KL(step) * L_KL + L_R for a batch. Sequences are padded
  /// with end rows to the longest one; offset terms stop at each drawing's
  /// end row while pen terms run over the padding.
  LossParts loss_s(const std::vector<stroke::SketchDrawing>& batch, const std::vector<GeneratorCondition>& conds,
                   std::uint64_t step, const nn::Tensor& eps = {}) const {
    if (batch.size() != conds.size()) throw InputError("generator: drawing and condition counts differ");
    const EncoderOutput enc = encode(batch, eps);
    LossParts out;
    out.kl = kl_divergence(enc);
    out.reconstruction = reconstruction_loss(enc.z, batch, conds);
    out.kl_weight = config_.kl_schedule().value(step);
    out.total = nn::add(nn::scale(out.kl, out.kl_weight), out.reconstruction);
    return out;
  }

  /// -0.5 * mean(1 + logvar - mu^2 - exp(logvar)).
  static nn::Var kl_divergence(const EncoderOutput& enc) {
    const nn::Var inner = nn::sub(nn::add_scalar(enc.logvar, 1.0),
                                  nn::add(nn::square(enc.mu), nn::exp(enc.logvar)));
    return nn::scale(nn::mean(inner), -0.5);
  }

  nn::Var reconstruction_loss(const nn::Var& z, const std::vector<stroke::SketchDrawing>& batch,
                              const std::vector<GeneratorCondition>& conds) const {
    if (batch.empty()) throw InputError("generator: empty batch");
    if (batch.size() != conds.size()) throw InputError("generator: drawing and condition counts differ");
    std::size_t longest = 0;
    for (const auto& d : batch) {
      d.validate();
      if (!d.ended() || d.strokes.size() < 2) throw InputError("generator: training drawing must end with pen_end");
      longest = std::max(longest, d.strokes.size());
    }
    const std::size_t bsz = batch.size();
    const std::size_t steps = longest - 1;
    DecoderSetup s = setup(z, conds);
    std::vector<nn::Var> hidden;
    nn::Tensor targets = nn::Tensor::matrix(steps * bsz, 2);
    std::vector<double> offset_weight(steps * bsz, 0.0);
    std::vector<int> pen(steps * bsz, static_cast<int>(stroke::Pen::End));
    for (std::size_t t = 0; t < steps; ++t) {
      nn::Tensor x = nn::Tensor::matrix(bsz, 5);
      for (std::size_t b = 0; b < bsz; ++b) {
        const auto& st = batch[b].strokes;
        const auto in = t < st.size() ? st[t].to_array() : stroke::Stroke5::end().to_array();
        for (std::size_t k = 0; k < 5; ++k) x.at(b, k) = in[k];
        const std::size_t r = t * bsz + b;
        if (t + 1 < st.size()) {
          const auto& tgt = st[t + 1];
          pen[r] = static_cast<int>(tgt.pen);
          if (!tgt.pen_end()) {
            targets.at(r, 0) = tgt.dx;
            targets.at(r, 1) = tgt.dy;
            offset_weight[r] = 1.0;
          }
        }
      }
      s.state = decoder_.step(s.state, nn::Var::constant(std::move(x)), s.extra);
      hidden.push_back(s.state.h);
    }
    const nn::Var out = output_(nn::concat_rows(hidden));
    const std::size_t m = config_.mixtures;
    const double norm = static_cast<double>(bsz * steps);
    const nn::Var offsets =
        nn::gmm_nll(nn::slice_cols(out, 0, nn::kGmmRawPerComponent * m), targets, m, offset_weight, norm);
    const nn::Var pens = nn::cross_entropy(nn::slice_cols(out, nn::kGmmRawPerComponent * m, 3), pen, {}, norm);
    return nn::add(offsets, pens);
  }

  /// Samples strokes one at a time until pen_end or `max_steps` rows.
  template <typename Rng>
  DecodeResult decode(const Latent& z, const GeneratorCondition& cond, double temperature, Rng& rng,
                      std::size_t max_steps = 0) const {
    if (z.size() != config_.latent) throw InputError("generator: latent must have " +
                                                     std::to_string(config_.latent) + " dims");
    if (temperature < 0.0) throw InputError("generator: negative temperature");
    if (max_steps == 0) max_steps = config_.max_steps;
    nn::NoGradGuard guard;
    DecoderSetup s = setup(nn::Var::constant(nn::Tensor({1, z.size()}, z)), {cond});
    DecodeResult res;
    res.ratio = cond.ratio;
    res.z = z;
    res.drawing.strokes.push_back(stroke::Stroke5::initial());
    stroke::Stroke5 prev = stroke::Stroke5::initial();
    const std::size_t m = config_.mixtures;
    while (true) {
      if (res.drawing.strokes.size() >= max_steps) {
        res.drawing.strokes.push_back(stroke::Stroke5::end());
        res.truncated = true;
        break;
      }
      const auto in = prev.to_array();
      s.state = decoder_.step(s.state, nn::Var::constant(nn::Tensor({1, 5}, {in.begin(), in.end()})), s.extra);
      const nn::Tensor raw = output_(s.state.h).value();
      const std::span<const double> row(raw.data(), raw.size());
      const std::size_t p = nn::sample_categorical(row.subspan(nn::kGmmRawPerComponent * m, 3), temperature, rng);
      if (p == static_cast<std::size_t>(stroke::Pen::End)) {
        res.drawing.strokes.push_back(stroke::Stroke5::end());
        break;
      }
      const nn::GMMParams g = nn::gmm_from_raw(row.subspan(0, nn::kGmmRawPerComponent * m), m);
      const nn::Point2 d = nn::gmm_sample(g, temperature, rng);
      prev = {d.x, d.y, static_cast<stroke::Pen>(p)};
      res.drawing.strokes.push_back(prev);
    }
    return res;
  }

  /// Decodes a stored latent under a new pose condition.
  template <typename Rng>
  DecodeResult regenerate_with_pose(const Latent& z, const GeneratorCondition& cond, double temperature,
                                    Rng& rng) const {
    return decode(z, cond, temperature, rng);
  }

 private:
  template <typename Rng>
  nn::Tensor standard_normal(std::size_t rows, Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    nn::Tensor t = nn::Tensor::matrix(rows, config_.latent);
    for (auto& v : t.storage()) v = normal(rng);
    return t;
  }

  GeneratorConfig config_;
  nn::ParameterStore store_;
  nn::BiLstm encoder_;
  nn::Linear mu_;
  nn::Linear logvar_;
  nn::ConvMaskEncoder mask_encoder_;
  nn::Linear init_;
  nn::Linear cond_;
  nn::LstmCell decoder_;
  nn::Linear output_;
};

/// Checkpoint metadata records the category and the offset scale so that
/// decoded drawings can be mapped back to corpus units.
inline nn::Checkpoint generator_checkpoint(const ObjectGenerator& g, const std::string& category, double sigma,
                                           const nn::Adam* optimizer = nullptr) {
  nn::Checkpoint ck;
  ck.meta["kind"] = "generator";
  ck.meta["category"] = category;
  ck.meta["config"] = g.config();
  ck.meta["sigma"] = sigma;
  nn::add_parameters(ck, g.parameters(), optimizer);
  return ck;
}

inline void save_generator(const std::string& path, const ObjectGenerator& g, const std::string& category,
                           double sigma, const nn::Adam* optimizer = nullptr) {
  nn::save_checkpoint(path, generator_checkpoint(g, category, sigma, optimizer));
}

struct GeneratorBundle {
  ObjectGenerator model;
  std::string category;
  double sigma = 1.0;
};

inline GeneratorBundle generator_from_checkpoint(const nn::Checkpoint& ck) {
  if (ck.meta.value("kind", "") != "generator") throw nn::CheckpointError("not a generator checkpoint");
  GeneratorBundle b{ObjectGenerator(ck.meta.at("config").get<GeneratorConfig>()), ck.meta.value("category", ""),
                    ck.meta.value("sigma", 1.0)};
  nn::load_parameters(ck, b.model.parameters());
  return b;
}

inline GeneratorBundle load_generator(const std::string& path) {
  return generator_from_checkpoint(nn::load_checkpoint(path));
}

}  // namespace scenesketch::generator
