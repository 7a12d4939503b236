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

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "scenesketch/data/fixtures.hpp"
#include "scenesketch/proposer/model.hpp"
#include "scenesketch/stroke/bitmap.hpp"
// clang-format off
#include "httplib.h"
// clang-format on

namespace {

namespace fs = std::filesystem;
using namespace scenesketch;

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("scenesketch_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

class RemoveWorkdir : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(workdir()); }
};
[[maybe_unused]] const auto* const kCleanup = ::testing::AddGlobalTestEnvironment(new RemoveWorkdir);

struct CliRun {
  int code = -1;
  std::string output;
};

CliRun run(const std::string& args) {
  const fs::path log = workdir() / "last.log";
  const std::string cmd = std::string(SCENESKETCH_CLI) + " " + args + " > " + log.string() + " 2>&1";
  CliRun r;
  const int status = std::system(cmd.c_str());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  r.output = buf.str();
  return r;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const fs::path& corpus() {
  static const fs::path dir = [] {
    const fs::path d = workdir() / "data";
    const CliRun r = run("fixtures --out " + d.string() + " --sketches 4");
    EXPECT_EQ(r.code, 0) << r.output;
    return d;
  }();
  return dir;
}

const fs::path& tiny_proposer() {
  static const fs::path p = [] {
    proposer::ProposerConfig cfg;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.model_dim = 16;
    cfg.ff_dim = 32;
    const auto path = workdir() / "proposer.ckpt";
    proposer::save_proposer(path.string(), proposer::ProposerModel(cfg), data::fixtures::make_embeddings({}));
    return path;
  }();
  return p;
}

TEST(Cli, FixturesWriteALoadableManifest) {
  EXPECT_TRUE(fs::exists(corpus() / "manifest.json"));
  EXPECT_TRUE(fs::exists(corpus() / "quickdraw" / "duck.ndjson"));
  EXPECT_TRUE(fs::exists(corpus() / "codraw_fixture.json"));
}

TEST(Cli, EmptySceneRendersABlankCanvas) {
  const fs::path scene = workdir() / "empty.json";
  std::ofstream(scene) << R"({"objects": [], "turn_index": 0})";
  const fs::path svg = workdir() / "empty.svg";
  CliRun r = run("render --scene " + scene.string() + " --out " + svg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string text = read(svg);
  EXPECT_NE(text.find("<svg"), std::string::npos);
  EXPECT_EQ(text.find("<polyline"), std::string::npos);

  const fs::path pbm = workdir() / "empty.pbm";
  r = run("render --scene " + scene.string() + " --out " + pbm.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const stroke::Bitmap b = stroke::load_pbm(pbm.string());
  EXPECT_EQ(b.width(), 400);
  EXPECT_TRUE(b.blank());
}

TEST(Cli, RenderWithoutGeneratorsLeavesObjectsBlankAndSaysSo) {
  const fs::path scene = workdir() / "duck.json";
  std::ofstream(scene) << R"({"objects": [{"class": 5, "subtype": 0, "size": 1, "flip": false, "x": 0.5, "y": 0.5}],
                             "turn_index": 0})";
  const fs::path svg = workdir() / "duck.svg";
  const CliRun r = run("render --scene " + scene.string() + " --out " + svg.string() + " --manifest " +
                    (corpus() / "manifest.json").string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("no generator for duck"), std::string::npos) << r.output;
}

TEST(Cli, EvaluatePrintsAPerSessionTable) {
  const fs::path report = workdir() / "report.jsonl";
  const CliRun r = run("evaluate --manifest " + (corpus() / "manifest.json").string() + " --proposer " +
                    tiny_proposer().string() + " --report " + report.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("mean"), std::string::npos);
  EXPECT_NE(read(report).find("\"mean\""), std::string::npos);
}

TEST(Cli, BadInputsFailWithAMessage) {
  CliRun r = run("evaluate --manifest /nonexistent/manifest.json --proposer " + tiny_proposer().string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("error"), std::string::npos) << r.output;
  r = run("render --scene /nonexistent.json --out x.svg");
  EXPECT_NE(r.code, 0);
  r = run("no-such-verb");
  EXPECT_NE(r.code, 0);
}

TEST(Cli, ServeAnswersHttp) {
  const int port = 20000 + static_cast<int>(::getpid() % 20000);
  const std::string manifest = (corpus() / "manifest.json").string();
  const std::string proposer = tiny_proposer().string();
  const std::string port_s = std::to_string(port);
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    const std::string log = (workdir() / "serve.log").string();
    std::freopen(log.c_str(), "w", stdout);
    ::execl(SCENESKETCH_CLI, SCENESKETCH_CLI, "serve", "--manifest", manifest.c_str(), "--proposer", proposer.c_str(),
            "--host", "127.0.0.1", "--port", port_s.c_str(), static_cast<char*>(nullptr));
    std::_Exit(127);
  }
  httplib::Client c("127.0.0.1", port);
  bool up = false;
  for (int i = 0; i < 100 && !up; ++i) {
    if (auto h = c.Get("/health"); h && h->status == 200) up = true;
    if (!up) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  EXPECT_TRUE(up);
  if (up) {
    auto s = c.Post("/session", "", "application/json");
    ASSERT_TRUE(s);
    const std::string id = nlohmann::json::parse(s->body)["session"];
    auto t = c.Post("/session/" + id + "/instruction", R"({"text": "a duck in the middle"})", "application/json");
    ASSERT_TRUE(t);
    // The fixture corpus ships no generator checkpoints, so a proposed object may fail to draw.
    const auto body = nlohmann::json::parse(t->body);
    if (t->status == 200) {
      EXPECT_EQ(body["turn"], 1);
    } else {
      EXPECT_EQ(t->status, 500);
      EXPECT_TRUE(body.contains("error"));
    }
    auto g = c.Get("/session/" + id);
    ASSERT_TRUE(g);
    EXPECT_EQ(g->status, 200);
  }
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
}

}  // namespace
