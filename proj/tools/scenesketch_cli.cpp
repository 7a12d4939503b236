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

// Operator CLI: fixtures, training, evaluation, rendering and the HTTP service.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenesketch/data/fixtures.hpp"
#include "scenesketch/data/manifest.hpp"
#include "scenesketch/data/replay.hpp"
#include "scenesketch/generator/registry.hpp"
#include "scenesketch/generator/train.hpp"
#include "scenesketch/proposer/train.hpp"
#include "scenesketch/service/http.hpp"

namespace fs = std::filesystem;
using namespace scenesketch;

namespace {

struct Inputs {
  data::Manifest manifest;
  data::ClipArtMapping clipart;
};

Inputs load_inputs(const std::string& manifest_path) {
  Inputs in;
  in.manifest = data::load_manifest(manifest_path);
  in.clipart = data::load_clipart(in.manifest.resolve(in.manifest.clipart));
  return in;
}

std::vector<data::DialogueSession> load_split(const Inputs& in, const std::string& split) {
  return data::load_codraw(in.manifest.codraw_split(split), in.clipart);
}

int cmd_fixtures(const std::string& out, std::size_t sketches, std::uint64_t seed) {
  data::fixtures::FixtureOptions opt;
  opt.sketches_per_category = sketches;
  opt.seed = seed;
  const auto files = data::fixtures::write_fixtures(out, opt);
  std::cout << "wrote " << files.size() << " files under " << out << "\n";
  return 0;
}

struct ProposerArgs {
  std::string manifest;
  std::string out;
  std::string metrics;
  std::size_t epochs = 0;
  std::size_t batch = 0;
  double lr = 0.0;
  double budget = 0.0;
  double stop_accuracy = 0.0;
};

int cmd_train_proposer(const ProposerArgs& a) {
  const Inputs in = load_inputs(a.manifest);
  const auto train_sessions = load_split(in, "train");
  std::vector<data::DialogueSession> val_sessions;
  if (in.manifest.codraw.count("val") && in.manifest.codraw_split("val") != in.manifest.codraw_split("train")) {
    val_sessions = load_split(in, "val");
  }
  std::set<std::string> vocab = data::session_vocabulary(train_sessions);
  for (const auto& w : data::session_vocabulary(val_sessions)) vocab.insert(w);
  const auto emb = data::load_embeddings(in.manifest.resolve(in.manifest.embeddings), vocab);

  proposer::ProposerConfig cfg;
  if (a.batch) cfg.batch_size = a.batch;
  if (a.lr > 0.0) cfg.lr = a.lr;
  if (a.epochs) cfg.epochs = a.epochs;
  proposer::ProposerModel model(cfg);
  proposer::TrainOptions opt;
  opt.metrics_path = a.metrics;
  opt.checkpoint_path = a.out;
  opt.time_budget_seconds = a.budget;
  if (a.stop_accuracy > 0.0) opt.stop_at_class_accuracy = a.stop_accuracy;
  opt.on_epoch = [](const proposer::EpochMetrics& m) {
    std::printf("epoch %zu %-5s total %.4f L_c %.4f acc %.3f (%.0fs)\n", m.epoch, m.split.c_str(), m.total, m.l_c,
                m.class_accuracy, m.seconds);
    std::fflush(stdout);
  };
  const auto report = proposer::train(model, proposer::make_examples(train_sessions, emb, cfg.context_turns),
                                      proposer::make_examples(val_sessions, emb, cfg.context_turns), emb, opt);
  proposer::save_proposer(a.out, model, emb);
  std::printf("best epoch %zu, %zu steps in %.0fs; saved %s\n", report.best_epoch, report.steps, report.seconds,
              a.out.c_str());
  return 0;
}

struct GeneratorArgs {
  std::string manifest;
  std::vector<std::string> categories;
  std::size_t steps = 0;
  bool small = false;
  std::string metrics_dir;
};

int cmd_train_generators(const GeneratorArgs& a) {
  const Inputs in = load_inputs(a.manifest);
  const auto registry = generator::load_registry(in.manifest.resolve(in.manifest.categories));
  int trained = 0;
  for (const auto& e : registry.entries()) {
    if (e.checkpoint.empty()) continue;
    if (!a.categories.empty() && std::find(a.categories.begin(), a.categories.end(), e.name) == a.categories.end()) {
      continue;
    }
    const std::string file = in.manifest.quickdraw_file(e.name);
    if (!fs::exists(file)) {
      std::cerr << "skipping " << e.name << ": no stroke file " << file << "\n";
      continue;
    }
    const auto corpus = data::load_quickdraw(file, e.name, in.manifest.quickdraw_sizes);
    generator::GeneratorConfig cfg = a.small ? generator::GeneratorConfig::small() : generator::GeneratorConfig{};
    if (a.steps) cfg.train_steps = a.steps;
    generator::ObjectGenerator g(cfg);
    generator::GeneratorTrainOptions opt;
    opt.category = e.name;
    opt.sigma = corpus.sigma;
    opt.checkpoint_path = e.checkpoint;
    if (!a.metrics_dir.empty()) opt.metrics_path = (fs::path(a.metrics_dir) / (e.name + ".jsonl")).string();
    fs::create_directories(fs::path(e.checkpoint).parent_path());
    const auto report = generator::train_generator(g, corpus.train, opt);
    std::printf("%-12s %4zu sketches  L_R %.4f -> %.4f  %zu steps %.0fs  %s\n", e.name.c_str(), corpus.train.size(),
                report.initial_reconstruction, report.final_reconstruction, report.steps, report.seconds,
                e.checkpoint.c_str());
    std::fflush(stdout);
    ++trained;
  }
  if (trained == 0) {
    std::cerr << "no categories trained\n";
    return 1;
  }
  return 0;
}

int cmd_evaluate(const std::string& manifest, const std::string& checkpoint, const std::string& split,
                 const std::string& report_path) {
  const Inputs in = load_inputs(manifest);
  const auto sessions = load_split(in, split);
  const auto bundle = proposer::load_proposer(checkpoint);
  data::SimilarityWeights w;
  if (!in.manifest.similarity.empty()) w = data::load_similarity_weights(in.manifest.resolve(in.manifest.similarity));
  const auto report = data::replay_evaluate(bundle.model, bundle.embeddings, sessions, w);
  data::write_summary_table(std::cout, report);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    data::write_report_jsonl(out, report);
  }
  return 0;
}

std::shared_ptr<generator::GeneratorPool> pool_from(const Inputs& in) {
  generator::CategoryRegistry reg;
  if (!in.manifest.categories.empty()) reg = generator::load_registry(in.manifest.resolve(in.manifest.categories));
  return std::make_shared<generator::GeneratorPool>(std::move(reg));
}

int cmd_render(const std::string& scene_path, const std::string& out_path, const std::string& manifest,
               std::uint64_t seed) {
  std::ifstream sf(scene_path);
  if (!sf) throw std::runtime_error("cannot open " + scene_path);
  const scene::Scene s = scene::scene_from_json(nlohmann::json::parse(sf));
  s.validate();
  std::vector<service::TrackedObject> objects;
  if (!s.empty()) {
    if (manifest.empty()) throw std::runtime_error("rendering objects needs --manifest for clip-art and generators");
    const Inputs in = load_inputs(manifest);
    service::PoolSketcher sketcher(pool_from(in));
    std::mt19937_64 rng(seed);
    std::uint64_t id = 1;
    for (const auto& o : s.objects) {
      service::TrackedObject t;
      t.id = id++;
      t.object = o;
      if (sketcher.supports(o.class_id)) {
        t.z = sketcher.sample_prior(o.class_id, rng);
        t.drawing = sketcher.decode(o.class_id, t.z, service::condition_for(in.clipart, o), rng).drawing;
      } else {
        std::cerr << "no generator for " << scene::class_name(static_cast<std::size_t>(o.class_id)) << "; left blank\n";
      }
      objects.push_back(std::move(t));
    }
  }
  const auto canvas = service::compose_canvas(objects);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  if (fs::path(out_path).extension() == ".pbm") {
    stroke::write_pbm(out, service::canvas_to_bitmap(canvas));
  } else {
    out << service::canvas_to_svg(canvas);
  }
  std::cout << "rendered " << s.size() << " objects to " << out_path << "\n";
  return 0;
}

int cmd_serve(const std::string& manifest, const std::string& checkpoint, const std::string& host, int port,
              double temperature) {
  const Inputs in = load_inputs(manifest);
  auto bundle = std::make_shared<const proposer::ProposerBundle>(proposer::load_proposer(checkpoint));
  auto layout = std::make_shared<service::ModelLayoutProposer>(bundle);
  auto sketcher = std::make_shared<service::PoolSketcher>(pool_from(in), temperature);
  service::SketchService svc(layout, sketcher, in.clipart);
  httplib::Server server;
  service::install_routes(server, svc);
  std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenesketch: text-driven sketched scenes"};
  app.require_subcommand(1);

  std::string out_dir = "data";
  std::size_t sketches = 64;
  std::uint64_t seed = 2024;
  auto* fixtures = app.add_subcommand("fixtures", "write the desk-scale corpora");
  fixtures->add_option("--out", out_dir, "output directory")->capture_default_str();
  fixtures->add_option("--sketches", sketches, "stroke sketches per category")->capture_default_str();
  fixtures->add_option("--seed", seed, "sketch jitter seed")->capture_default_str();

  ProposerArgs pa;
  auto* tp = app.add_subcommand("train-proposer", "train the composition proposer");
  tp->add_option("--manifest", pa.manifest, "dataset manifest")->required();
  tp->add_option("--out", pa.out, "checkpoint path")->required();
  tp->add_option("--metrics", pa.metrics, "line-delimited JSON metrics log");
  tp->add_option("--epochs", pa.epochs, "epochs (default from config)");
  tp->add_option("--batch", pa.batch, "examples per update");
  tp->add_option("--lr", pa.lr, "learning rate");
  tp->add_option("--time-budget", pa.budget, "stop after this many seconds");
  tp->add_option("--stop-accuracy", pa.stop_accuracy, "stop once training class accuracy reaches this");

  GeneratorArgs ga;
  auto* tg = app.add_subcommand("train-generators", "train per-category object generators");
  tg->add_option("--manifest", ga.manifest, "dataset manifest")->required();
  tg->add_option("--category", ga.categories, "categories to train (default: all with a checkpoint path)");
  tg->add_option("--steps", ga.steps, "optimizer steps per category");
  tg->add_flag("--small", ga.small, "narrow widths for quick runs");
  tg->add_option("--metrics-dir", ga.metrics_dir, "directory for per-category metrics logs");

  std::string manifest, checkpoint, split = "test", report;
  auto* ev = app.add_subcommand("evaluate", "replay sessions and score the final scenes");
  ev->add_option("--manifest", manifest, "dataset manifest")->required();
  ev->add_option("--proposer", checkpoint, "proposer checkpoint")->required();
  ev->add_option("--split", split, "dialogue split")->capture_default_str();
  ev->add_option("--report", report, "per-session JSONL report");

  std::string scene_path, render_out;
  std::uint64_t render_seed = 1;
  auto* rd = app.add_subcommand("render", "draw a scene JSON file as SVG or PBM");
  rd->add_option("--scene", scene_path, "scene JSON")->required();
  rd->add_option("--out", render_out, "output .svg or .pbm")->required();
  rd->add_option("--manifest", manifest, "dataset manifest (clip-art and generators)");
  rd->add_option("--seed", render_seed, "sampling seed")->capture_default_str();

  std::string host = "127.0.0.1";
  int port = 8080;
  double temperature = -1.0;
  auto* sv = app.add_subcommand("serve", "run the HTTP service");
  sv->add_option("--manifest", manifest, "dataset manifest")->required();
  sv->add_option("--proposer", checkpoint, "proposer checkpoint")->required();
  sv->add_option("--host", host, "bind address")->capture_default_str();
  sv->add_option("--port", port, "port")->capture_default_str();
  sv->add_option("--temperature", temperature, "sampling temperature (default from each generator)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fixtures) return cmd_fixtures(out_dir, sketches, seed);
    if (*tp) return cmd_train_proposer(pa);
    if (*tg) return cmd_train_generators(ga);
    if (*ev) return cmd_evaluate(manifest, checkpoint, split, report);
    if (*rd) return cmd_render(scene_path, render_out, manifest, render_seed);
    if (*sv) return cmd_serve(manifest, checkpoint, host, port, temperature);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
