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

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesketch/data/embeddings.hpp"
#include "scenesketch/stroke/stroke5.hpp"

namespace scenesketch::data {

struct SplitSizes {
  std::size_t train = 75000;
  std::size_t val = 2500;
  std::size_t test = 2500;
};

struct QuickDrawCorpus {
  std::string category;
  std::vector<stroke::SketchDrawing> train;
  std::vector<stroke::SketchDrawing> val;
  std::vector<stroke::SketchDrawing> test;
  double sigma = 1.0;  // offset scale divided out of every split
};

/// One simplified-format record: {"word": ..., "drawing": [[[x...], [y...]], ...]}.
inline std::vector<stroke::Polyline> parse_quickdraw_record(const nlohmann::json& rec) {
  std::vector<stroke::Polyline> lines;
  for (const auto& s : rec.at("drawing")) {
    const auto& xs = s.at(0);
    const auto& ys = s.at(1);
    if (xs.size() != ys.size()) throw FormatError("stroke x and y lengths differ");
    stroke::Polyline line;
    for (std::size_t i = 0; i < xs.size(); ++i) line.push_back({xs[i].get<double>(), ys[i].get<double>()});
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

inline nlohmann::json quickdraw_record(const std::string& category, const std::vector<stroke::Polyline>& lines) {
  nlohmann::json drawing = nlohmann::json::array();
  for (const auto& l : lines) {
    nlohmann::json xs = nlohmann::json::array(), ys = nlohmann::json::array();
    for (const auto& p : l) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    drawing.push_back({xs, ys});
  }
  return {{"word", category}, {"recognized", true}, {"drawing", drawing}};
}

/// Reads an ndjson stroke file in order and fills train, then val, then test
/// up to the requested sizes. Offsets are normalized by the training split's
/// standard deviation.
inline QuickDrawCorpus read_quickdraw(std::istream& in, const std::string& category, SplitSizes sizes) {
  QuickDrawCorpus c;
  c.category = category;
  std::string line;
  std::size_t lineno = 0;
  const std::size_t wanted = sizes.train + sizes.val + sizes.test;
  std::vector<stroke::SketchDrawing> all;
  while (all.size() < wanted && std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + ": " + e.what());
    }
    const std::string word = rec.value("word", "");
    if (word != category) throw FormatError(where + ": category '" + word + "' where '" + category + "' expected");
    try {
      const auto lines = parse_quickdraw_record(rec);
      if (lines.empty()) continue;
      all.push_back(stroke::from_raw(lines, category));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  const std::size_t n_train = std::min(sizes.train, all.size());
  const std::size_t n_val = std::min(sizes.val, all.size() - n_train);
  const std::size_t n_test = std::min(sizes.test, all.size() - n_train - n_val);
  auto it = all.begin();
  c.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  c.val.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  c.test.assign(it, it + static_cast<std::ptrdiff_t>(n_test));
  if (c.train.empty()) throw FormatError("no " + category + " drawings for the training split");
  stroke::NormalizedCorpus norm = stroke::normalize_offsets(c.train);
  c.sigma = norm.sigma;
  c.train = std::move(norm.drawings);
  for (auto& d : c.val) d = stroke::scaled(d, 1.0 / c.sigma);
  for (auto& d : c.test) d = stroke::scaled(d, 1.0 / c.sigma);
  return c;
}

inline QuickDrawCorpus load_quickdraw(const std::string& path, const std::string& category, SplitSizes sizes = {}) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return read_quickdraw(in, category, sizes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace scenesketch::data
