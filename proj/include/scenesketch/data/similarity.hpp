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
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/scene/scene_object.hpp"

namespace scenesketch::data {

struct SimilarityWeights {
  double w_miss = 1.0;
  double w_flip = 0.1;
  double w_size = 0.1;
  double w_sub = 0.05;
  double w_pos = 0.5;
  double d0 = 0.2;
  double w_rel = 0.25;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SimilarityWeights, w_miss, w_flip, w_size, w_sub, w_pos, d0, w_rel)

inline SimilarityWeights load_similarity_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open similarity config " + path);
  try {
    return nlohmann::json::parse(in).get<SimilarityWeights>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

struct SimilarityBreakdown {
  std::size_t matched = 0;
  std::size_t unmatched_truth = 0;
  std::size_t unmatched_pred = 0;
  double miss = 0.0;  // weighted miss term
  double flip = 0.0;  // the rest are weighted means over matched pairs
  double size = 0.0;
  double subtype = 0.0;
  double position = 0.0;
  double relation = 0.0;
  double cost = 0.0;
  double score = 5.0;

  nlohmann::json to_json() const {
    return {{"matched", matched}, {"unmatched_truth", unmatched_truth}, {"unmatched_pred", unmatched_pred},
            {"miss", miss},       {"flip", flip},                       {"size", size},
            {"subtype", subtype}, {"position", position},               {"relation", relation},
            {"cost", cost},       {"score", score}};
  }
};

/// Pairs each truth object, in order, with the nearest still-unmatched
/// prediction of the same class (lowest index on equal distance).
inline std::vector<std::pair<std::size_t, std::size_t>> match_by_class(const scene::Scene& pred,
                                                                       const scene::Scene& truth) {
  std::vector<bool> used(pred.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t g = 0; g < truth.size(); ++g) {
    const auto& t = truth.objects[g];
    std::size_t best = pred.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (used[p] || pred.objects[p].class_id != t.class_id) continue;
      const double d = std::hypot(pred.objects[p].x - t.x, pred.objects[p].y - t.y);
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    if (best < pred.size()) {
      used[best] = true;
      pairs.emplace_back(g, best);
    }
  }
  return pairs;
}

inline int sign(double v) { return (v > 0) - (v < 0); }

/// Score in [0, 5]: 5 * (1 - cost), cost clamped to [0, 1].
inline SimilarityBreakdown scene_similarity_breakdown(const scene::Scene& pred, const scene::Scene& truth,
                                                      const SimilarityWeights& w = {}) {
  SimilarityBreakdown b;
  if (pred.empty() && truth.empty()) return b;
  const auto pairs = match_by_class(pred, truth);
  b.matched = pairs.size();
  b.unmatched_truth = truth.size() - pairs.size();
  b.unmatched_pred = pred.size() - pairs.size();
  b.miss = w.w_miss * static_cast<double>(b.unmatched_truth + b.unmatched_pred) /
           static_cast<double>(std::max<std::size_t>(truth.size(), 1));
  const std::size_t k = pairs.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& g = truth.objects[pairs[i].first];
    const auto& p = pred.objects[pairs[i].second];
    b.flip += w.w_flip * (g.flip != p.flip);
    b.size += w.w_size * (g.size_id != p.size_id);
    b.subtype += w.w_sub * (g.subtype_id != p.subtype_id);
    b.position += w.w_pos * std::min(1.0, std::hypot(g.x - p.x, g.y - p.y) / w.d0);
    if (k > 1) {
      std::size_t wrong = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        const auto& gj = truth.objects[pairs[j].first];
        const auto& pj = pred.objects[pairs[j].second];
        wrong += sign(g.x - gj.x) != sign(p.x - pj.x);
        wrong += sign(g.y - gj.y) != sign(p.y - pj.y);
      }
      b.relation += w.w_rel * static_cast<double>(wrong) / static_cast<double>(2 * (k - 1));
    }
  }
  if (k > 0) {
    const double n = static_cast<double>(k);
    b.flip /= n;
    b.size /= n;
    b.subtype /= n;
    b.position /= n;
    b.relation /= n;
  }
  b.cost = std::clamp(b.miss + b.flip + b.size + b.subtype + b.position + b.relation, 0.0, 1.0);
  b.score = 5.0 * (1.0 - b.cost);
  return b;
}

inline double scene_similarity(const scene::Scene& pred, const scene::Scene& truth,
                               const SimilarityWeights& w = {}) {
  return scene_similarity_breakdown(pred, truth, w).score;
}

}  // namespace scenesketch::data
