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

// Release acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. The two overfit runs dominate the wall time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "scenesketch/data/fixtures.hpp"
#include "scenesketch/data/quickdraw.hpp"
#include "scenesketch/data/replay.hpp"
#include "scenesketch/data/similarity.hpp"
#include "scenesketch/generator/train.hpp"
#include "scenesketch/nn/gmm.hpp"
#include "scenesketch/nn/layers.hpp"
#include "scenesketch/nn/optim.hpp"
#include "scenesketch/proposer/generate.hpp"
#include "scenesketch/proposer/train.hpp"
#include "scenesketch/stroke/mask.hpp"
#include "support/gradient_suite.hpp"
#include "support/service_stubs.hpp"
#include "support/stroke_oracles.hpp"

namespace {

using namespace scenesketch;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Stroke-5 shape rules every generated drawing must satisfy.
std::string stroke5_violation(const generator::DecodeResult& r, std::size_t max_steps) {
  try {
    r.drawing.validate();
  } catch (const std::exception& e) {
    return e.what();
  }
  if (!r.drawing.ended()) return "missing end row";
  if (r.drawing.length() > max_steps + 1) return "longer than max_steps + 1";
  return {};
}

// --- 1 ------------------------------------------------------------------------

Outcome mask_oracle() {
  std::mt19937_64 rng(4);
  const auto start = Clock::now();
  int mismatched = 0;
  for (int i = 0; i < 200; ++i) {
    const stroke::SketchDrawing d = stroke::from_raw(testing::random_polylines(rng));
    const stroke::Bitmap ink = stroke::render(d, stroke::kMaskSide, stroke::kMaskSide);
    if (!(stroke::build_mask(ink).bitmap == testing::brute_force_mask(ink))) ++mismatched;
  }
  const double t = seconds_since(start);
  return {mismatched == 0 && t < 10.0, fmt("%d/200 mismatched, %.2f s", mismatched, t)};
}

// --- 2 ------------------------------------------------------------------------

Outcome codec_round_trip() {
  std::mt19937_64 rng(1);
  // integer pixel coordinates as in the raw drawing format: sums of differences are exact
  std::uniform_int_distribution<int> nlines(1, 6), npoints(1, 12), coord(0, 255);
  int inexact = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<stroke::Polyline> lines(static_cast<std::size_t>(nlines(rng)));
    for (auto& l : lines) {
      const int n = npoints(rng);
      for (int p = 0; p < n; ++p) l.push_back({double(coord(rng)), double(coord(rng))});
    }
    if (stroke::to_absolute(stroke::from_raw(lines)) != lines) ++inexact;
  }
  // continuous coordinates recover to rounding
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto lines = testing::random_polylines(rng);
    const auto back = stroke::to_absolute(stroke::from_raw(lines));
    if (back.size() != lines.size()) {
      worst = INFINITY;
      continue;
    }
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (back[l].size() != lines[l].size()) {
        worst = INFINITY;
        continue;
      }
      for (std::size_t p = 0; p < lines[l].size(); ++p) {
        worst = std::max({worst, std::abs(back[l][p].x - lines[l][p].x), std::abs(back[l][p].y - lines[l][p].y)});
      }
    }
  }

  // generator outputs: untrained weights give the widest variety of lengths
  generator::GeneratorConfig cfg;
  cfg.latent = 6;
  cfg.encoder_hidden = 8;
  cfg.decoder_hidden = 10;
  cfg.mixtures = 2;
  cfg.mask_channels = {2, 2};
  cfg.mask_embedding = 4;
  cfg.mask_side = 16;
  cfg.max_steps = 40;
  generator::ObjectGenerator g(cfg);
  std::mt19937_64 gen_rng(9);
  const auto cond = generator::condition_from_drawing(stroke::from_raw({{{0, 0}, {10, 5}, {3, 9}}}), 16);
  int outputs = 0, bad = 0;
  std::string first_bad;
  for (double temperature : {0.0, 0.1, 0.4, 1.0}) {
    for (std::size_t cap : {std::size_t{0}, std::size_t{5}}) {
      for (int k = 0; k < 25; ++k) {
        const auto r = g.decode(g.sample_prior(gen_rng), cond, temperature, gen_rng, cap);
        ++outputs;
        const std::string v = stroke5_violation(r, cap == 0 ? cfg.max_steps : cap);
        if (!v.empty()) {
          ++bad;
          if (first_bad.empty()) first_bad = v;
        }
      }
    }
  }
  return {inexact == 0 && worst < 1e-9 && bad == 0,
          fmt("integer grid %d/1000 inexact, continuous max error %.2g, stroke-5 violations %d/%d%s%s", inexact,
              worst, bad, outputs, first_bad.empty() ? "" : " first: ", first_bad.c_str())};
}

// --- 3 ------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto start = Clock::now();
  const auto cases = testing::run_gradient_suite();
  const double t = seconds_since(start);
  std::map<std::string, int> shapes;
  double worst = 0.0;
  std::string worst_case;
  for (const auto& c : cases) {
    ++shapes[c.op];
    if (c.result.max_relative_error >= worst) {
      worst = c.result.max_relative_error;
      worst_case = c.op + " " + c.shape;
    }
  }
  const int fewest = cases.empty() ? 0 : std::min_element(shapes.begin(), shapes.end(), [](auto& a, auto& b) {
                                           return a.second < b.second;
                                         })->second;
  return {!cases.empty() && worst < 1e-3 && fewest >= 3 && t < 60.0,
          fmt("%zu ops, >= %d shapes each, worst relative error %.2e (%s), %.1f s", shapes.size(), fewest, worst,
              worst_case.c_str(), t)};
}

// --- 4 ------------------------------------------------------------------------

double direct_density(const nn::GMMParams& p, double x, double y) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.components(); ++k) {
    const double dx = x - p.mean_x[k], dy = y - p.mean_y[k];
    const double sx = p.std_x[k], sy = p.std_y[k], r = p.rho[k];
    const double det = sx * sx * sy * sy * (1 - r * r);
    const double q = (sy * sy * dx * dx - 2 * r * sx * sy * dx * dy + sx * sx * dy * dy) / det;
    total += p.weights[k] * std::exp(-0.5 * q) / (2 * std::numbers::pi * std::sqrt(det));
  }
  return total;
}

Outcome gmm() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + trial % 20;
    std::vector<double> raw(nn::kGmmRawPerComponent * m);
    for (auto& v : raw) v = u(rng);
    const nn::GMMParams p = nn::gmm_from_raw(raw, m);
    const double x = 2 * u(rng), y = 2 * u(rng);
    worst = std::max(worst, std::abs(nn::gmm_log_likelihood(p, {x, y}) - std::log(direct_density(p, x, y))));
  }

  const nn::GMMParams p{{0.3, 0.7}, {-1.0, 2.0}, {0.5, -0.5}, {0.4, 0.8}, {1.2, 0.3}, {0.5, -0.3}};
  const int n = 100000;
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    const nn::Point2 s = nn::gmm_sample(p, 1.0, rng);
    sx += s.x;
    sy += s.y;
  }
  const nn::Point2 mean = p.mixture_mean();
  double vx = -mean.x * mean.x, vy = -mean.y * mean.y;
  for (std::size_t k = 0; k < 2; ++k) {
    vx += p.weights[k] * (p.std_x[k] * p.std_x[k] + p.mean_x[k] * p.mean_x[k]);
    vy += p.weights[k] * (p.std_y[k] * p.std_y[k] + p.mean_y[k] * p.mean_y[k]);
  }
  const double zx = std::abs(sx / n - mean.x) / std::sqrt(vx / n);
  const double zy = std::abs(sy / n - mean.y) / std::sqrt(vy / n);
  return {worst < 1e-9 && zx < 3.0 && zy < 3.0,
          fmt("log-likelihood max deviation %.2e over 500 mixtures, sample mean at %.2f and %.2f standard errors",
              worst, zx, zy)};
}

// --- 5 ------------------------------------------------------------------------

Outcome attention() {
  std::mt19937_64 rng(4);
  double worst_sum = 0.0;
  double leaked = 0.0;
  auto check_rows = [&](const nn::Tensor& w) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) {
        total += w.at(i, j);
        if (j > i) leaked = std::max(leaked, std::abs(w.at(i, j)));
      }
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
  };

  nn::ParameterStore store;
  nn::TransformerBlock block(store, "b", 16, 4, 32, rng);
  const std::size_t len = 9;
  double probe = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    nn::Var x = nn::Var::leaf(testing::random_tensor({len, 16}, rng, -2, 2));
    const auto r = block(x);
    for (const auto& w : r.head_weights) check_rows(w);
    nn::backward(nn::sum(nn::slice_rows(r.output, i, 1)));
    for (std::size_t j = i + 1; j < len; ++j) {
      for (std::size_t c = 0; c < 16; ++c) probe = std::max(probe, std::abs(x.grad().at(j, c)));
    }
    store.zero_grad();
  }

  // the full proposer at its default depth and width
  const auto clip = data::fixtures::make_clipart();
  const auto sessions = data::fixtures::make_sessions(clip);
  const auto emb = data::fixtures::make_embeddings(sessions);
  const auto examples = proposer::make_examples(sessions, emb);
  proposer::ProposerModel model(proposer::ProposerConfig{});
  const auto gen = proposer::generate_scene(model, examples.back().context);
  std::size_t maps = 0;
  for (const auto& layer : gen.attention.layers) {
    for (const auto& w : layer) {
      check_rows(w);
      ++maps;
    }
  }
  return {worst_sum < 1e-5 && leaked == 0.0 && probe == 0.0 && maps > 0,
          fmt("max |row sum - 1| %.2e over %zu proposer maps and block heads, future weight %.1g, "
              "future gradient %.1g",
              worst_sum, maps, leaked, probe)};
}

// --- 6 ------------------------------------------------------------------------

Outcome proposer_overfit() {
  const auto clip = data::fixtures::make_clipart();
  const auto sessions = data::fixtures::make_sessions(clip);
  const auto emb = data::fixtures::make_embeddings(sessions);
  const auto examples = proposer::make_examples(sessions, emb);

  proposer::ProposerConfig cfg;  // 6 layers, width 128
  cfg.batch_size = 4;
  proposer::ProposerModel model(cfg);

  double replay = 0.0;
  proposer::TrainOptions opt;
  opt.epochs = 100000;
  opt.time_budget_seconds = 840.0;  // leaves room for the final evaluation
  opt.restore_best = false;
  opt.stop_when = [&](const proposer::EpochMetrics& m) {
    if (m.epoch % 10 != 0 || m.class_accuracy < 0.9) return false;
    replay = data::replay_evaluate(model, emb, sessions).mean;
    return replay >= 4.0;
  };
  const auto start = Clock::now();
  const auto report = proposer::train(model, examples, {}, emb, opt);
  const auto eval = proposer::evaluate_loss(model, proposer::prepare(examples), report.history.back().epoch, "train");
  replay = data::replay_evaluate(model, emb, sessions).mean;
  const double t = seconds_since(start);
  return {sessions.size() == 16 && eval.class_accuracy >= 0.9 && replay >= 4.0 && t <= 900.0,
          fmt("%zu sessions, %zu epochs, class accuracy %.3f, replay similarity %.3f, %.0f s", sessions.size(),
              report.history.back().epoch, eval.class_accuracy, replay, t)};
}

// --- 7 ------------------------------------------------------------------------

Outcome generator_overfit() {
  const auto start = Clock::now();
  const data::fixtures::SketchCategory* cat = nullptr;
  for (const auto& c : data::fixtures::sketch_categories()) {
    if (std::string(c.name) == "tree") cat = &c;
  }
  std::string nd;
  for (const auto& s : data::fixtures::make_sketches(*cat, 64, 2024)) {
    nd += data::quickdraw_record(cat->name, s).dump() + "\n";
  }
  std::istringstream in(nd);
  const auto corpus = data::read_quickdraw(in, cat->name, {64, 0, 0});

  auto cfg = generator::GeneratorConfig::small();
  cfg.batch_size = 16;
  generator::ObjectGenerator g(cfg);
  generator::GeneratorTrainOptions opt;
  opt.category = cat->name;
  opt.sigma = corpus.sigma;
  opt.steps = 1500;
  opt.time_budget_seconds = 840.0;
  const auto report = generator::train_generator(g, corpus.train, opt);
  const double drop = (report.initial_reconstruction - report.final_reconstruction) /
                      std::abs(report.initial_reconstruction);

  std::mt19937_64 rng(5);
  int good = 0, bad_rows = 0;
  std::string ious;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& d = corpus.train[i];
    const auto enc = g.encode(d);
    const generator::Latent z(enc.mu.value().storage().begin(), enc.mu.value().storage().end());
    const auto cond = generator::condition_from_drawing(d);
    const auto r = g.decode(z, cond, 0.1, rng);
    if (!stroke5_violation(r, cfg.max_steps).empty()) ++bad_rows;
    double iou = 0.0;
    try {
      iou = stroke::iou(stroke::drawing_mask(r.drawing).bitmap, cond.mask.bitmap);
    } catch (const std::exception&) {
      // a drawing with no extent has an empty mask
    }
    good += iou >= 0.5;
    ious += fmt("%s%.2f", ious.empty() ? "" : " ", iou);
  }
  const double t = seconds_since(start);
  return {drop >= 0.5 && good >= 7 && bad_rows == 0 && t <= 900.0,
          fmt("L_R %.3f -> %.3f (drop %.0f%% of |L_R(0)|) in %zu steps, mask IoU >= 0.5 on %d/10 [%s], "
              "stroke-5 violations %d/10, %.0f s",
              report.initial_reconstruction, report.final_reconstruction, 100 * drop, report.steps, good,
              ious.c_str(), bad_rows, t)};
}

// --- 8 ------------------------------------------------------------------------

Outcome schedules_and_constants() {
  const generator::GeneratorConfig gc;
  const proposer::ProposerConfig pc;
  const auto kl = gc.kl_schedule();
  const auto lr = gc.lr_schedule();
  bool monotone = true;
  double prev_kl = 0.0, prev_lr = INFINITY;
  for (std::uint64_t s = 0; s <= 400000; s += 1000) {
    const double k = kl.value(s), l = lr.value(s);
    // strictly monotone while the gap to the bound is resolvable in double precision
    const bool kl_step = 0.5 - k > 1e-12 ? k > prev_kl : k >= prev_kl;
    const bool lr_step = l - 1e-5 > 1e-15 ? l < prev_lr : l <= prev_lr;
    monotone = monotone && kl_step && lr_step && k <= 0.5 && l >= 1e-5;
    prev_kl = k;
    prev_lr = l;
  }
  const double kl_far = kl.value(5'000'000), lr_far = lr.value(5'000'000);

  // global-norm clipping at the configured threshold
  nn::ParameterStore store;
  nn::Var a = store.add("a", nn::Tensor({1, 1}, {0.0}));
  nn::Var b = store.add("b", nn::Tensor({1, 1}, {0.0}));
  nn::backward(nn::add(nn::scale(a, 6.0), nn::scale(b, 8.0)));
  nn::clip_grad_norm(store, gc.clip_norm);
  const double clipped = nn::global_grad_norm(store);

  const bool ok = kl.value(0) == 0.01 && std::abs(kl_far - 0.5) < 1e-9 && lr.value(0) == 1e-3 &&
                  std::abs(lr_far - 1e-5) < 1e-12 && monotone && gc.clip_norm == 1.0 && pc.clip_norm == 1.0 &&
                  std::abs(clipped - 1.0) < 1e-12 && pc.lambda_sub == 5e-2 && pc.lambda_flip == 5e-2 &&
                  pc.lambda_size == 5e-2 && pc.lambda_xy == 1.0;
  return {ok, fmt("lambda_KL %.4g -> %.6g, lr %.4g -> %.6g, monotone %s, clip %.1f/%.1f (norm 10 -> %.3g), "
                  "lambda sub/flip/size %.2g/%.2g/%.2g, xy %.1f",
                  kl.value(0), kl_far, lr.value(0), lr_far, monotone ? "yes" : "no", gc.clip_norm, pc.clip_norm,
                  clipped, pc.lambda_sub, pc.lambda_flip, pc.lambda_size, pc.lambda_xy)};
}

// --- 9 ------------------------------------------------------------------------

scene::Scene random_scene(std::mt19937_64& rng, std::size_t n, const std::vector<int>& classes) {
  std::uniform_int_distribution<std::size_t> cls(0, classes.size() - 1);
  std::uniform_int_distribution<int> size(0, 2);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  scene::Scene s;
  for (std::size_t i = 0; i < n; ++i) {
    s.objects.push_back(scene::SceneObject::make(classes[cls(rng)], 0, size(rng), pos(rng) < 0.5, pos(rng), pos(rng)));
  }
  return s;
}

Outcome similarity() {
  std::mt19937_64 rng(17);
  std::vector<int> all(scene::kNumClasses);
  std::iota(all.begin(), all.end(), 0);

  double identity_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto s = random_scene(rng, 1 + i % 8, all);
    identity_worst = std::max(identity_worst, std::abs(data::scene_similarity(s, s) - 5.0));
  }

  double disjoint_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<int> shuffled = all;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::vector<int> left(shuffled.begin(), shuffled.begin() + 29);
    const std::vector<int> right(shuffled.begin() + 29, shuffled.end());
    const auto a = random_scene(rng, 1 + i % 6, left);
    const auto b = random_scene(rng, 1 + (i + 3) % 6, right);
    disjoint_worst = std::max({disjoint_worst, std::abs(data::scene_similarity(a, b)),
                               std::abs(data::scene_similarity(b, a))});
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const auto truth = random_scene(rng, 2 + i % 4, all);
    const double a = angle(rng);
    double t1 = 0.3 * unit(rng), t2 = 0.3 * unit(rng);
    if (t1 > t2) std::swap(t1, t2);
    auto moved = [&](double t) {
      scene::Scene p = truth;
      auto& o = p.objects[0];
      o.x = std::clamp(o.x + t * std::cos(a), 0.0, 1.0);
      o.y = std::clamp(o.y + t * std::sin(a), 0.0, 1.0);
      return p;
    };
    if (data::scene_similarity(moved(t1), truth) < data::scene_similarity(moved(t2), truth)) ++violations;
  }
  return {identity_worst == 0.0 && disjoint_worst == 0.0 && violations == 0,
          fmt("identity deviation %.1g, disjoint max %.1g, monotonicity violations %d/100", identity_worst,
              disjoint_worst, violations)};
}

// --- 10 -----------------------------------------------------------------------

Outcome service_atomicity() {
  using service::stubs::Fixture;
  Fixture f;
  const auto id = f.svc->create_session();
  f.svc->post_instruction(id, "a duck in the middle");
  const std::string before = f.svc->export_session(id).dump();
  f.sketcher->throw_on = f.sketcher->decodes + 1;  // second object of the turn
  bool threw = false;
  try {
    f.svc->post_instruction(id, "a tree and a sun");
  } catch (const std::exception&) {
    threw = true;
  }
  const bool unchanged = f.svc->export_session(id).dump() == before;
  f.sketcher->throw_on = -1;
  const auto r = f.svc->post_instruction(id, "a tree and a sun");
  f.svc->redraw_object(id, r.objects[0].id, {{{0.4, 0.3}, {0.6, 0.4}, {0.5, 0.45}}});
  const nlohmann::json doc = f.svc->export_session(id);

  Fixture g;
  const auto imported = g.svc->import_session(nlohmann::json::parse(doc.dump()));
  const bool exact = imported == id && g.svc->export_session(id).dump() == doc.dump();
  f.svc->post_instruction(id, "a sun top right");
  g.svc->post_instruction(id, "a sun top right");
  const bool continues = f.svc->export_session(id).dump() == g.svc->export_session(id).dump();
  return {threw && unchanged && exact && continues,
          fmt("failing turn %s, state %s, export/import %s, continuation %s", threw ? "raised" : "did not raise",
              unchanged ? "unchanged" : "CHANGED", exact ? "bit-exact" : "differs",
              continues ? "identical" : "diverges")};
}

}  // namespace

int main() {
  int failed = 0;
  auto run = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  run("mask-oracle", mask_oracle);
  run("codec-round-trip", codec_round_trip);
  run("gradient-suite", gradient_suite);
  run("gmm", gmm);
  run("attention", attention);
  run("schedules-and-constants", schedules_and_constants);
  run("similarity-metric", similarity);
  run("service-atomicity", service_atomicity);
  run("generator-overfit", generator_overfit);
  run("proposer-overfit", proposer_overfit);

  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
