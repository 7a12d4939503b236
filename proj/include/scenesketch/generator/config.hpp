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

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "scenesketch/nn/gmm.hpp"
#include "scenesketch/nn/optim.hpp"
#include "scenesketch/stroke/mask.hpp"

namespace scenesketch::generator {

struct GeneratorConfig {
  std::size_t latent = 128;
  std::size_t encoder_hidden = 256;  // per direction
  std::size_t decoder_hidden = 512;
  std::size_t mixtures = 20;
  std::vector<std::size_t> mask_channels = {8, 16, 16, 16};
  std::size_t mask_embedding = 64;
  std::size_t mask_side = stroke::kMaskSide;

  std::size_t max_steps = 250;
  double temperature = 0.4;

  double kl_initial = 0.01;
  double kl_bound = 0.5;
  double kl_rate = 0.99995;
  double lr_initial = 1e-3;
  double lr_bound = 1e-5;
  double lr_rate = 0.9999;
  double clip_norm = 1.0;

  std::size_t batch_size = 32;
  std::size_t train_steps = 1000;
  std::uint64_t seed = 11;

  /// Narrow widths for CI and single-core runs.
  static GeneratorConfig small() {
    GeneratorConfig c;
    c.encoder_hidden = 64;
    c.decoder_hidden = 128;
    c.mask_embedding = 32;
    c.mask_channels = {4, 8, 8, 8};
    return c;
  }

  nn::ExpSchedule kl_schedule() const {
    return {kl_initial, kl_bound, kl_rate, nn::ExpSchedule::Direction::Grow};
  }
  nn::ExpSchedule lr_schedule() const {
    return {lr_initial, lr_bound, lr_rate, nn::ExpSchedule::Direction::Decay};
  }

  std::size_t output_width() const { return nn::kGmmRawPerComponent * mixtures + 3; }

  void validate() const {
    if (latent == 0 || encoder_hidden == 0 || decoder_hidden == 0 || mixtures == 0) {
      throw nn::ConfigError("generator: zero width");
    }
    if (mask_channels.empty()) throw nn::ConfigError("generator: mask encoder needs a stage");
    if (max_steps == 0) throw nn::ConfigError("generator: max_steps must be positive");
    if (temperature < 0.0) throw nn::ConfigError("generator: negative temperature");
    if (batch_size == 0) throw nn::ConfigError("generator: batch_size must be positive");
    kl_schedule().validate();
    lr_schedule().validate();
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GeneratorConfig, latent, encoder_hidden, decoder_hidden, mixtures,
                                                mask_channels, mask_embedding, mask_side, max_steps, temperature,
                                                kl_initial, kl_bound, kl_rate, lr_initial, lr_bound, lr_rate,
                                                clip_norm, batch_size, train_steps, seed)

}  // namespace scenesketch::generator
