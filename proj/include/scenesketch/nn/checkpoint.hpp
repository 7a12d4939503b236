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

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scenesketch/nn/optim.hpp"

namespace scenesketch::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// On-disk layout (all integers little-endian):
///
///   "SKCK"            magic
///   u32               format version
///   u32 + bytes       metadata JSON
///   u32               tensor count
///   per tensor:       u32 name length, name, u32 rank, u32 dims..., f32 values
///   u8                optimizer present
///   [u64 step, per parameter: f32 first moments, f32 second moments]
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;

  struct OptimizerState {
    std::uint64_t step = 0;
    std::vector<Tensor> first;
    std::vector<Tensor> second;
  };
  std::optional<OptimizerState> optimizer;

  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return t;
    }
    throw CheckpointError("checkpoint has no tensor " + name);
  }
  bool has_tensor(const std::string& name) const {
    for (const auto& [n, _] : tensors) {
      if (n == name) return true;
    }
    return false;
  }
};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b.data(), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw CheckpointError("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

inline double get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float f = 0.0f;
  std::memcpy(&f, &bits, 4);
  return static_cast<double>(f);
}

inline std::string get_string(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw CheckpointError("checkpoint truncated");
  return s;
}

inline void put_tensor_values(std::ostream& out, const Tensor& t) {
  for (double v : t.storage()) put_f32(out, v);
}

inline Tensor get_tensor_values(std::istream& in, Shape shape) {
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = get_f32(in);
  return t;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  out.write("SKCK", 4);
  detail::put_u32(out, Checkpoint::kVersion);
  const std::string meta = ck.meta.dump();
  detail::put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put_u32(out, static_cast<std::uint32_t>(t.shape().size()));
    for (auto d : t.shape()) detail::put_u32(out, static_cast<std::uint32_t>(d));
    detail::put_tensor_values(out, t);
  }
  out.put(ck.optimizer ? 1 : 0);
  if (ck.optimizer) {
    detail::put_u64(out, ck.optimizer->step);
    for (std::size_t i = 0; i < ck.optimizer->first.size(); ++i) {
      detail::put_tensor_values(out, ck.optimizer->first[i]);
      detail::put_tensor_values(out, ck.optimizer->second[i]);
    }
  }
  if (!out) throw CheckpointError("failed writing checkpoint");
}

inline Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || std::string(magic.data(), 4) != "SKCK") throw CheckpointError("not a checkpoint (bad magic)");
  const std::uint32_t version = detail::get_u32(in);
  if (version != Checkpoint::kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  try {
    ck.meta = nlohmann::json::parse(detail::get_string(in));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata: ") + e.what());
  }
  const std::uint32_t count = detail::get_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = detail::get_string(in);
    const std::uint32_t rank = detail::get_u32(in);
    Shape shape(rank);
    for (auto& d : shape) d = detail::get_u32(in);
    ck.tensors.emplace_back(std::move(name), detail::get_tensor_values(in, std::move(shape)));
  }
  const int has_opt = in.get();
  if (has_opt == 1) {
    Checkpoint::OptimizerState st;
    st.step = detail::get_u64(in);
    for (const auto& [name, t] : ck.tensors) {
      if (name.rfind("param/", 0) != 0) continue;
      st.first.push_back(detail::get_tensor_values(in, t.shape()));
      st.second.push_back(detail::get_tensor_values(in, t.shape()));
    }
    ck.optimizer = std::move(st);
  }
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  write_checkpoint(out, ck);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  return read_checkpoint(in);
}

/// Parameters are stored as "param/<name>"; other tensors are auxiliary.
inline void add_parameters(Checkpoint& ck, const ParameterStore& store, const Adam* optimizer = nullptr) {
  for (const auto& [name, v] : store.items()) ck.tensors.emplace_back("param/" + name, v.value());
  if (optimizer) {
    Checkpoint::OptimizerState st;
    st.step = optimizer->steps();
    st.first = optimizer->first_moments();
    st.second = optimizer->second_moments();
    ck.optimizer = std::move(st);
  }
}

/// Copies checkpoint values into an already-built store; names and shapes
/// must match exactly.
inline void load_parameters(const Checkpoint& ck, ParameterStore& store) {
  std::size_t seen = 0;
  for (const auto& [name, t] : ck.tensors) {
    if (name.rfind("param/", 0) != 0) continue;
    const std::string pname = name.substr(6);
    if (!store.contains(pname)) throw CheckpointError("checkpoint parameter not in model: " + pname);
    Var p = store.get(pname);
    if (p.shape() != t.shape()) {
      throw CheckpointError("shape mismatch for " + pname + ": " + shape_string(t.shape()) + " vs " +
                            shape_string(p.shape()));
    }
    p.mutable_value() = t;
    ++seen;
  }
  if (seen != store.items().size()) throw CheckpointError("checkpoint is missing model parameters");
}

}  // namespace scenesketch::nn
