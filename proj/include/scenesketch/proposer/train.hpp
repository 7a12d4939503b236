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
#include <chrono>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scenesketch/data/codraw.hpp"
#include "scenesketch/nn/optim.hpp"
#include "scenesketch/proposer/loss.hpp"
#include "scenesketch/proposer/model.hpp"

namespace scenesketch::proposer {

class DatasetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One (context, target scene) pair per dialogue turn.
struct TrainingExample {
  scene::ContextWindow context;
  scene::Scene target;
  std::string session;
  std::size_t turn = 0;
};

inline std::vector<TrainingExample> make_examples(const std::vector<data::DialogueSession>& sessions,
                                                  const data::EmbeddingTable& emb,
                                                  std::size_t context_turns = scene::kMaxContextTurns) {
  std::vector<TrainingExample> out;
  for (const auto& s : sessions) {
    scene::ContextWindow ctx;
    for (std::size_t t = 0; t < s.turns.size(); ++t) {
      TrainingExample ex;
      ex.context = ctx;
      ex.context.current_instruction = emb.embed(s.turns[t].teller);
      ex.target = s.turns[t].scene;
      ex.session = s.id;
      ex.turn = t;
      out.push_back(std::move(ex));
      ctx.push_turn({emb.embed(s.turns[t].teller), s.turns[t].scene});
      while (ctx.turns.size() > context_turns) ctx.turns.erase(ctx.turns.begin());
    }
  }
  return out;
}

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double l_c = 0.0;
  double l_sub = 0.0;
  double l_flip = 0.0;
  double l_size = 0.0;
  double l_xy = 0.0;
  double l_kind = 0.0;
  double total = 0.0;
  double class_accuracy = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const {
    return {{"epoch", epoch},   {"split", split}, {"L_c", l_c},     {"L_sub", l_sub},
            {"L_flip", l_flip}, {"L_size", l_size}, {"L_xy", l_xy}, {"L_kind", l_kind},
            {"total", total},   {"class_accuracy", class_accuracy}, {"seconds", seconds}};
  }
};

struct TrainOptions {
  std::string metrics_path;     // line-delimited JSON, appended per epoch and split
  std::string checkpoint_path;  // best-val checkpoint
  std::optional<std::size_t> epochs;
  double time_budget_seconds = 0.0;  // 0: unlimited
  bool restore_best = true;
  // Stops early once the training class accuracy reaches this value.
  std::optional<double> stop_at_class_accuracy;
  // Checked after each epoch with the training metrics; true stops training.
  std::function<bool(const EpochMetrics&)> stop_when;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainReport {
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
  double seconds = 0.0;
};

/// Precomputed teacher-forced inputs.
struct PreparedExample {
  nn::Tensor sequence;
  std::size_t first = 0;
  scene::Scene target;
};

inline std::vector<PreparedExample> prepare(const std::vector<TrainingExample>& examples) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    TeacherForced tf = teacher_forced(ex.context, ex.target);
    out.push_back({sequence_tensor(tf.rows), tf.first, ex.target});
  }
  return out;
}

inline LossTerms example_loss(const ProposerModel& model, const PreparedExample& ex) {
  const ForwardResult fr = model.forward(ex.sequence);
  return loss_cm(fr.raw, ex.first, ex.target, model.config());
}

struct Accumulator {
  double l_c = 0, l_sub = 0, l_flip = 0, l_size = 0, l_xy = 0, l_kind = 0, total = 0;
  std::size_t n = 0, objects = 0, correct = 0;

  void add(const LossTerms& t) {
    l_c += t.l_c;
    l_sub += t.l_sub;
    l_flip += t.l_flip;
    l_size += t.l_size;
    l_xy += t.l_xy;
    l_kind += t.l_kind;
    total += t.total_value();
    objects += t.objects;
    correct += t.class_correct;
    ++n;
  }

  EpochMetrics metrics(std::size_t epoch, std::string split) const {
    const double d = n ? static_cast<double>(n) : 1.0;
    EpochMetrics m;
    m.epoch = epoch;
    m.split = std::move(split);
    m.l_c = l_c / d;
    m.l_sub = l_sub / d;
    m.l_flip = l_flip / d;
    m.l_size = l_size / d;
    m.l_xy = l_xy / d;
    m.l_kind = l_kind / d;
    m.total = total / d;
    m.class_accuracy = objects ? static_cast<double>(correct) / static_cast<double>(objects) : 1.0;
    return m;
  }
};

/// Mean loss over a dataset without building a graph.
inline EpochMetrics evaluate_loss(const ProposerModel& model, const std::vector<PreparedExample>& data,
                                  std::size_t epoch = 0, const std::string& split = "val") {
  nn::NoGradGuard guard;
  Accumulator acc;
  for (const auto& ex : data) acc.add(example_loss(model, ex));
  return acc.metrics(epoch, split);
}

/// Adam on mini-batches of teacher-forced examples (gradients averaged over
/// the batch), one metrics line per epoch and split, best checkpoint by
/// validation loss (training loss when there is no validation set).
inline TrainReport train(ProposerModel& model, const std::vector<TrainingExample>& train_set,
                         const std::vector<TrainingExample>& val_set, const data::EmbeddingTable& emb,
                         const TrainOptions& opt = {}) {
  if (train_set.empty()) throw DatasetError("proposer: empty training set");
  const ProposerConfig& cfg = model.config();
  const auto train_data = prepare(train_set);
  const auto val_data = prepare(val_set);
  nn::Adam adam(model.parameters(), {.lr = cfg.lr, .clip_norm = cfg.clip_norm});
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);

  std::ofstream metrics;
  if (!opt.metrics_path.empty()) {
    metrics.open(opt.metrics_path, std::ios::app);
    if (!metrics) throw DatasetError("cannot open metrics log " + opt.metrics_path);
  }
  auto log = [&](const EpochMetrics& m) {
    if (metrics) metrics << m.to_json().dump() << '\n' << std::flush;
    if (opt.on_epoch) opt.on_epoch(m);
  };

  TrainReport report;
  std::optional<nn::Checkpoint> best;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const std::size_t epochs = opt.epochs.value_or(cfg.epochs);

  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    Accumulator acc;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - b);
      for (std::size_t i = b; i < end; ++i) {
        LossTerms t = example_loss(model, train_data[order[i]]);
        acc.add(t);
        nn::backward(nn::scale(t.total, inv));
      }
      adam.step();
      ++report.steps;
    }
    EpochMetrics tm = acc.metrics(epoch, "train");
    tm.seconds = elapsed();
    report.history.push_back(tm);
    log(tm);

    double selection = tm.total;
    if (!val_data.empty()) {
      EpochMetrics vm = evaluate_loss(model, val_data, epoch, "val");
      vm.seconds = elapsed();
      report.history.push_back(vm);
      log(vm);
      selection = vm.total;
    }
    if (selection < report.best_loss) {
      report.best_loss = selection;
      report.best_epoch = epoch;
      best = proposer_checkpoint(model, emb, &adam);
      if (!opt.checkpoint_path.empty()) nn::save_checkpoint(opt.checkpoint_path, *best);
    }
    if (opt.stop_at_class_accuracy && tm.class_accuracy >= *opt.stop_at_class_accuracy) break;
    if (opt.stop_when && opt.stop_when(tm)) break;
    if (opt.time_budget_seconds > 0.0 && elapsed() > opt.time_budget_seconds) break;
  }
  if (opt.restore_best && best) nn::load_parameters(*best, model.parameters());
  report.seconds = elapsed();
  return report;
}

}  // namespace scenesketch::proposer
