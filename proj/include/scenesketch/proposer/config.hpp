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

#include "json.hpp"
#include "scenesketch/nn/layers.hpp"
#include "scenesketch/scene/context.hpp"

namespace scenesketch::proposer {

struct ProposerConfig {
  std::size_t layers = 6;
  std::size_t heads = 8;
  std::size_t model_dim = 128;
  std::size_t ff_dim = 512;
  std::size_t max_positions = 1024;
  std::size_t context_turns = scene::kMaxContextTurns;
  std::size_t max_objects = 20;

  double lambda_sub = 5e-2;
  double lambda_flip = 5e-2;
  double lambda_size = 5e-2;
  double lambda_xy = 1.0;
  double lambda_kind = 1.0;  // weight of the start/end/object head term

  double lr = 1e-4;
  std::size_t epochs = 200;
  std::size_t batch_size = 8;
  double clip_norm = 1.0;
  std::uint64_t seed = 7;

  void validate() const {
    if (layers == 0) throw nn::ConfigError("proposer: need at least one layer");
    if (heads == 0 || model_dim % heads != 0) throw nn::ConfigError("proposer: heads must divide model_dim");
    if (ff_dim == 0 || max_positions == 0) throw nn::ConfigError("proposer: zero width");
    if (context_turns == 0 || context_turns > scene::kMaxContextTurns) {
      throw nn::ConfigError("proposer: context_turns must be in 1.." + std::to_string(scene::kMaxContextTurns));
    }
    if (max_objects == 0) throw nn::ConfigError("proposer: max_objects must be positive");
    if (lambda_sub < 0 || lambda_flip < 0 || lambda_size < 0 || lambda_xy < 0 || lambda_kind < 0) {
      throw nn::ConfigError("proposer: loss weights must be non-negative");
    }
    if (!(lr > 0.0)) throw nn::ConfigError("proposer: lr must be positive");
    if (batch_size == 0) throw nn::ConfigError("proposer: batch_size must be positive");
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ProposerConfig, layers, heads, model_dim, ff_dim, max_positions,
                                                context_turns, max_objects, lambda_sub, lambda_flip, lambda_size,
                                                lambda_xy, lambda_kind, lr, epochs, batch_size, clip_norm, seed)

}  // namespace scenesketch::proposer
