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
#include <cstdint>
#include <vector>

#include "scenesketch/nn/layers.hpp"

namespace scenesketch::nn {

/// Exponential approach from `initial` toward `bound`:
///   value(step) = bound + (initial - bound) * rate^step
/// `Decay` schedules fall toward a floor, `Grow` schedules rise toward a ceiling.
struct ExpSchedule {
  enum class Direction { Decay, Grow };

  double initial = 1.0;
  double bound = 1.0;
  double rate = 1.0;
  Direction direction = Direction::Decay;

  void validate() const {
    if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("schedule: rate must lie in (0, 1]");
    if (direction == Direction::Decay && initial < bound) throw ConfigError("schedule: decay starts below floor");
    if (direction == Direction::Grow && initial > bound) throw ConfigError("schedule: growth starts above ceiling");
  }

  double value(std::uint64_t step) const {
    const double f = std::pow(rate, static_cast<double>(step));
    return initial * f + bound * (1.0 - f);
  }
};

inline double schedule_value(const ExpSchedule& s, std::uint64_t step) { return s.value(step); }

/// Global L2 norm over every gradient in the store.
inline double global_grad_norm(const ParameterStore& store) {
  double sq = 0.0;
  for (const auto& [_, p] : store.items()) {
    if (!p.node()->has_grad()) continue;
    sq += p.node()->grad.mat().squaredNorm();
  }
  return std::sqrt(sq);
}

/// Rescales all gradients so that their global norm is at most `max_norm`.
/// Returns the norm measured before clipping.
inline double clip_grad_norm(ParameterStore& store, double max_norm) {
  const double norm = global_grad_norm(store);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& [_, p] : store.items()) {
      if (p.node()->has_grad()) p.node()->grad.mat() *= s;
    }
  }
  return norm;
}

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;  // <= 0 disables clipping
};

/// Adam with bias correction and global-norm gradient clipping.
class Adam {
 public:
  explicit Adam(ParameterStore& store, AdamOptions options = {}) : store_(&store), options_(options) {
    for (const auto& [_, p] : store.items()) {
      first_.emplace_back(p.shape());
      second_.emplace_back(p.shape());
    }
  }

  AdamOptions& options() { return options_; }
  const AdamOptions& options() const { return options_; }
  std::uint64_t steps() const { return step_; }
  const std::vector<Tensor>& first_moments() const { return first_; }
  const std::vector<Tensor>& second_moments() const { return second_; }

  void restore(std::uint64_t step, std::vector<Tensor> first, std::vector<Tensor> second) {
    if (first.size() != first_.size() || second.size() != second_.size()) {
      throw ShapeError("adam: moment count mismatch on restore");
    }
    step_ = step;
    first_ = std::move(first);
    second_ = std::move(second);
  }

  /// Clips, applies one update, and clears gradients. Returns the pre-clip norm.
  double step() {
    const double norm = clip_grad_norm(*store_, options_.clip_norm);
    ++step_;
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
    auto& items = store_->items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      Var& p = items[i].second;
      if (!p.node()->has_grad()) continue;
      const Tensor& g = p.node()->grad;
      Tensor& m = first_[i];
      Tensor& v = second_[i];
      Tensor& w = p.mutable_value();
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = options_.beta1 * m[j] + (1.0 - options_.beta1) * g[j];
        v[j] = options_.beta2 * v[j] + (1.0 - options_.beta2) * g[j] * g[j];
        const double update = options_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + options_.eps);
        w[j] = to_float_precision(w[j] - update);
      }
    }
    store_->zero_grad();
    return norm;
  }

 private:
  ParameterStore* store_;
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
};

}  // namespace scenesketch::nn
