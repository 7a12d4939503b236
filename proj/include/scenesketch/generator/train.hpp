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

#include <chrono>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/generator/model.hpp"

namespace scenesketch::generator {

struct StepMetrics {
  std::uint64_t step = 0;
  double l_r = 0.0;
  double l_kl = 0.0;
  double kl_weight = 0.0;
  double lr = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const {
    return {{"step", step}, {"L_R", l_r},   {"L_KL", l_kl},         {"lambda_KL", kl_weight},
            {"lr", lr},     {"total", total}, {"grad_norm", grad_norm}, {"seconds", seconds}};
  }
};

struct GeneratorTrainOptions {
  std::string category;
  double sigma = 1.0;
  std::string metrics_path;
  std::string checkpoint_path;
  std::size_t steps = 0;  // 0 takes config().train_steps
  double time_budget_seconds = 0.0;
  std::size_t log_every = 10;
  std::function<void(const StepMetrics&)> on_step;
};

struct GeneratorTrainReport {
  std::vector<StepMetrics> history;
  double initial_reconstruction = 0.0;  // L_R over the training set at step 0, z = mu
  double final_reconstruction = 0.0;
  std::size_t steps = 0;
  double seconds = 0.0;
};

/// Mean L_R over `drawings` with z = mu and gradients off.
inline double evaluate_reconstruction(const ObjectGenerator& g, const std::vector<stroke::SketchDrawing>& drawings,
                                      const std::vector<GeneratorCondition>& conds) {
  if (drawings.empty()) throw InputError("generator: nothing to evaluate");
  nn::NoGradGuard guard;
  const std::size_t bs = g.config().batch_size;
  double total = 0.0;
  for (std::size_t i = 0; i < drawings.size(); i += bs) {
    const std::size_t n = std::min(bs, drawings.size() - i);
    const std::vector<stroke::SketchDrawing> batch(drawings.begin() + static_cast<std::ptrdiff_t>(i),
                                                   drawings.begin() + static_cast<std::ptrdiff_t>(i + n));
    const std::vector<GeneratorCondition> cb(conds.begin() + static_cast<std::ptrdiff_t>(i),
                                             conds.begin() + static_cast<std::ptrdiff_t>(i + n));
    total += g.reconstruction_loss(g.encode(batch).z, batch, cb).item() * static_cast<double>(n);
  }
  return total / static_cast<double>(drawings.size());
}

inline std::vector<GeneratorCondition> conditions_for(const std::vector<stroke::SketchDrawing>& drawings,
                                                      int side = stroke::kMaskSide) {
  std::vector<GeneratorCondition> out;
  out.reserve(drawings.size());
  for (const auto& d : drawings) out.push_back(condition_from_drawing(d, side));
  return out;
}

/// Adam with clipping; the learning rate and lambda_KL follow their
/// schedules by step. Each drawing is conditioned on its own mask and ratio.
inline GeneratorTrainReport train_generator(ObjectGenerator& g, const std::vector<stroke::SketchDrawing>& drawings,
                                            const GeneratorTrainOptions& opt = {}) {
  if (drawings.empty()) throw InputError("generator: empty training corpus");
  const GeneratorConfig& cfg = g.config();
  const auto conds = conditions_for(drawings, static_cast<int>(cfg.mask_side));
  const std::size_t steps = opt.steps ? opt.steps : cfg.train_steps;
  std::ofstream metrics;
  if (!opt.metrics_path.empty()) {
    metrics.open(opt.metrics_path);
    if (!metrics) throw std::runtime_error("cannot write " + opt.metrics_path);
  }

  nn::Adam adam(g.parameters(), {cfg.lr_initial, 0.9, 0.999, 1e-8, cfg.clip_norm});
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> order(drawings.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  GeneratorTrainReport report;
  report.initial_reconstruction = evaluate_reconstruction(g, drawings, conds);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  for (std::uint64_t step = 0; step < steps; ++step) {
    if (opt.time_budget_seconds > 0.0 && elapsed() > opt.time_budget_seconds) break;
    std::vector<stroke::SketchDrawing> batch;
    std::vector<GeneratorCondition> cb;
    for (std::size_t i = 0; i < std::min(cfg.batch_size, drawings.size()); ++i) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(drawings[order[cursor]]);
      cb.push_back(conds[order[cursor]]);
      ++cursor;
    }
    nn::Tensor eps = nn::Tensor::matrix(batch.size(), cfg.latent);
    for (auto& v : eps.storage()) v = normal(rng);

    const LossParts loss = g.loss_s(batch, cb, step, eps);
    nn::backward(loss.total);
    adam.options().lr = cfg.lr_schedule().value(step);
    StepMetrics m;
    m.step = step;
    m.l_r = loss.reconstruction.item();
    m.l_kl = loss.kl.item();
    m.kl_weight = loss.kl_weight;
    m.lr = adam.options().lr;
    m.total = loss.total.item();
    m.grad_norm = adam.step();
    m.seconds = elapsed();
    report.history.push_back(m);
    if (metrics && (step % std::max<std::size_t>(opt.log_every, 1) == 0 || step + 1 == steps)) {
      metrics << m.to_json().dump() << '\n';
    }
    if (opt.on_step) opt.on_step(m);
    report.steps = step + 1;
  }
  report.seconds = elapsed();
  report.final_reconstruction = evaluate_reconstruction(g, drawings, conds);
  if (!opt.checkpoint_path.empty()) save_generator(opt.checkpoint_path, g, opt.category, opt.sigma, &adam);
  return report;
}

}  // namespace scenesketch::generator
