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
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scenesketch/scene/context.hpp"

namespace scenesketch::data {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Word vectors keyed by lowercase surface form. Lookups fold case; unknown
/// words map to the zero vector. Values are held at single precision, the
/// precision they are checkpointed at.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = scene::kTokenDims) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(std::string_view word) const { return rows_.count(fold_case(word)) > 0; }
  const std::map<std::string, std::vector<double>>& rows() const { return rows_; }

  void insert(std::string_view word, std::vector<double> v) {
    if (v.size() != dim_) {
      throw FormatError("embedding for '" + std::string(word) + "' has " + std::to_string(v.size()) +
                        " dims, expected " + std::to_string(dim_));
    }
    for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
    rows_.insert_or_assign(fold_case(word), std::move(v));
  }

  std::vector<double> lookup(std::string_view word) const {
    auto it = rows_.find(fold_case(word));
    return it == rows_.end() ? std::vector<double>(dim_, 0.0) : it->second;
  }

  scene::TextToken token(std::string_view word) const { return {std::string(word), lookup(word)}; }

  std::vector<scene::TextToken> embed(std::string_view text) const {
    std::vector<scene::TextToken> out;
    for (const auto& w : scene::tokenize(text)) out.push_back(token(w));
    return out;
  }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>> rows_;
};

/// Reads a GloVe-style text file ("word v1 ... vD" per line). When `vocab`
/// is non-empty only those words (case-folded) are kept.
inline EmbeddingTable read_embeddings(std::istream& in, const std::set<std::string>& vocab = {},
                                      std::size_t dim = scene::kTokenDims) {
  std::set<std::string> wanted;
  for (const auto& w : vocab) wanted.insert(fold_case(w));
  EmbeddingTable table(dim);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    const std::string key = fold_case(word);
    if (!wanted.empty() && !wanted.count(key)) continue;
    std::vector<double> v;
    v.reserve(dim);
    double x = 0.0;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw FormatError("embeddings line " + std::to_string(lineno) + ": non-numeric value");
    if (v.size() != dim) {
      throw FormatError("embeddings line " + std::to_string(lineno) + ": " + std::to_string(v.size()) +
                        " values, expected " + std::to_string(dim));
    }
    // the first occurrence wins, as in frequency-sorted GloVe files
    if (!table.contains(key)) table.insert(key, std::move(v));
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path, const std::set<std::string>& vocab = {},
                                      std::size_t dim = scene::kTokenDims) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embeddings file " + path);
  return read_embeddings(in, vocab, dim);
}

inline void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out.precision(9);
  for (const auto& [word, v] : table.rows()) {
    out << word;
    for (double x : v) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace scenesketch::data
