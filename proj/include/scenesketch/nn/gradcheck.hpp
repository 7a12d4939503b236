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
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "scenesketch/nn/layers.hpp"

namespace scenesketch::nn {

struct GradCheckOptions {
  double step = 1e-4;
  /// Entries where both gradients are below this magnitude are compared
  /// against it instead, so round-off on near-zero entries is not amplified.
  double floor = 1e-5;
  /// Upper bound on probed entries per tensor; 0 probes all of them.
  std::size_t max_entries = 0;
  std::uint64_t seed = 7;
  /// For piecewise-linear functions (ReLU stacks). A probe that straddles a
  /// kink spoils the central difference, but the side away from the kink
  /// stays on one linear piece, so the best of central, forward and backward
  /// differences is compared.
  bool piecewise_linear = false;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t entries = 0;
  std::string worst;  // "<tensor>[index]" of the worst entry

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace detail {

inline std::vector<std::size_t> probe_indices(std::size_t n, std::size_t max_entries, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (max_entries > 0 && n > max_entries) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_entries);
  }
  return idx;
}

inline void record(GradCheckResult& r, double analytic, double numeric, double floor, const std::string& where) {
  const double rel = relative_error(analytic, numeric, floor);
  r.max_absolute_error = std::max(r.max_absolute_error, std::abs(analytic - numeric));
  if (r.entries == 0 || rel > r.max_relative_error) {
    r.max_relative_error = rel;
    r.worst = where;
  }
  ++r.entries;
}

inline double best_difference(double analytic, double up, double mid, double down, const GradCheckOptions& opt) {
  const double central = (up - down) / (2.0 * opt.step);
  if (!opt.piecewise_linear) return central;
  double best = central;
  for (double d : {(up - mid) / opt.step, (mid - down) / opt.step}) {
    if (relative_error(analytic, d, opt.floor) < relative_error(analytic, best, opt.floor)) best = d;
  }
  return best;
}

}  // namespace detail

/// Central-difference check of d fn(inputs) / d inputs for a scalar-valued fn.
inline GradCheckResult check_input_gradients(const std::function<Var(const std::vector<Var>&)>& fn,
                                             const std::vector<Tensor>& inputs, GradCheckOptions opt = {}) {
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(Var::leaf(t));
  const Var loss = fn(leaves);
  if (loss.value().size() != 1) throw ShapeError("gradcheck: function must return a scalar");
  backward(loss);

  std::mt19937_64 rng(opt.seed);
  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor analytic = leaves[i].node()->has_grad() ? leaves[i].grad() : Tensor(inputs[i].shape());
    for (std::size_t j : detail::probe_indices(inputs[i].size(), opt.max_entries, rng)) {
      auto eval = [&](double delta) {
        std::vector<Var> probe;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          Tensor t = inputs[k];
          if (k == i) t[j] += delta;
          probe.push_back(Var::constant(std::move(t)));
        }
        return fn(probe).item();
      };
      const double mid = opt.piecewise_linear ? eval(0.0) : 0.0;
      const double numeric = detail::best_difference(analytic[j], eval(opt.step), mid, eval(-opt.step), opt);
      detail::record(result, analytic[j], numeric, opt.floor,
                     "input" + std::to_string(i) + "[" + std::to_string(j) + "]");
    }
  }
  return result;
}

/// Central-difference check of a scalar loss against every parameter in a
/// store. `loss_fn` must rebuild the graph from the store's current values.
inline GradCheckResult check_parameter_gradients(ParameterStore& store, const std::function<Var()>& loss_fn,
                                                 GradCheckOptions opt = {}) {
  store.zero_grad();
  const Var loss = loss_fn();
  if (loss.value().size() != 1) throw ShapeError("gradcheck: function must return a scalar");
  backward(loss);
  std::vector<Tensor> analytic;
  for (auto& [_, p] : store.items()) analytic.push_back(p.node()->has_grad() ? p.grad() : Tensor(p.shape()));
  store.zero_grad();

  std::mt19937_64 rng(opt.seed);
  GradCheckResult result;
  NoGradGuard no_grad;
  auto& items = store.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor& value = items[i].second.mutable_value();
    for (std::size_t j : detail::probe_indices(value.size(), opt.max_entries, rng)) {
      const double saved = value[j];
      value[j] = saved + opt.step;
      const double up = loss_fn().item();
      value[j] = saved - opt.step;
      const double down = loss_fn().item();
      value[j] = saved;
      const double mid = opt.piecewise_linear ? loss_fn().item() : 0.0;
      detail::record(result, analytic[i][j], detail::best_difference(analytic[i][j], up, mid, down, opt), opt.floor,
                     items[i].first + "[" + std::to_string(j) + "]");
    }
  }
  return result;
}

/// Fixed random projection that turns any tensor-valued output into a scalar,
/// so that every output entry contributes to the checked gradient.
inline Var random_projection(const Var& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor w(out.shape());
  for (auto& v : w.storage()) v = dist(rng);
  return sum(mul(out, Var::constant(std::move(w))));
}

}  // namespace scenesketch::nn
