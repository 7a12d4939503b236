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

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "scenesketch/data/codraw.hpp"
#include "scenesketch/data/similarity.hpp"
#include "scenesketch/proposer/generate.hpp"

namespace scenesketch::data {

struct SessionScore {
  std::string session;
  double score = 0.0;
  SimilarityBreakdown breakdown;
  scene::Scene generated;
};

struct SimilarityReport {
  std::vector<SessionScore> sessions;
  double mean = 0.0;
};

/// Replays each session's teller messages in order. The proposer sees its
/// own earlier scenes as context; its final scene is scored against the
/// session's ground truth. Words without a vector enter as zeros.
inline SimilarityReport replay_evaluate(const proposer::ProposerModel& model, const EmbeddingTable& emb,
                                        const std::vector<DialogueSession>& sessions,
                                        const SimilarityWeights& w = {}) {
  SimilarityReport report;
  const std::size_t window = model.config().context_turns;
  double total = 0.0;
  for (const auto& s : sessions) {
    scene::ContextWindow ctx;
    scene::Scene last;
    for (const auto& turn : s.turns) {
      ctx.current_instruction = emb.embed(turn.teller);
      last = proposer::generate_scene(model, ctx).scene;
      ctx.push_turn({ctx.current_instruction, last});
      while (ctx.turns.size() > window) ctx.turns.erase(ctx.turns.begin());
      ctx.current_instruction.clear();
    }
    SessionScore sc;
    sc.session = s.id;
    sc.breakdown = scene_similarity_breakdown(last, s.final_scene, w);
    sc.score = sc.breakdown.score;
    sc.generated = last;
    total += sc.score;
    report.sessions.push_back(std::move(sc));
  }
  if (!sessions.empty()) report.mean = total / static_cast<double>(sessions.size());
  return report;
}

inline void write_report_jsonl(std::ostream& out, const SimilarityReport& r) {
  for (const auto& s : r.sessions) {
    nlohmann::json j = s.breakdown.to_json();
    j["session"] = s.session;
    out << j.dump() << '\n';
  }
  out << nlohmann::json{{"mean", r.mean}, {"sessions", r.sessions.size()}}.dump() << '\n';
}

inline void write_summary_table(std::ostream& out, const SimilarityReport& r) {
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %6s %7s %7s %7s\n", "session", "score", "matched", "missed", "extra");
  out << line;
  for (const auto& s : r.sessions) {
    std::snprintf(line, sizeof line, "%-24s %6.3f %7zu %7zu %7zu\n", s.session.c_str(), s.score, s.breakdown.matched,
                  s.breakdown.unmatched_truth, s.breakdown.unmatched_pred);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-24s %6.3f\n", "mean", r.mean);
  out << line;
}

}  // namespace scenesketch::data
