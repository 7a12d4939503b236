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
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "scenesketch/nn/tensor.hpp"

namespace scenesketch::nn {

/// One value in the computation graph. Children own their parents, so a
/// graph is released as soon as the last handle to its output goes away.
struct Node {
  Tensor value;
  Tensor grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;

  Tensor& grad_buffer() {
    if (grad.shape() != value.shape()) grad = Tensor(value.shape());
    return grad;
  }
  bool has_grad() const { return grad.shape() == value.shape() && !grad.shape().empty(); }
};

namespace detail {
inline thread_local int no_grad_depth = 0;
}  // namespace detail

inline bool grad_enabled() { return detail::no_grad_depth == 0; }

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() { ++detail::no_grad_depth; }
  ~NoGradGuard() { --detail::no_grad_depth; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  explicit Var(Tensor value, bool requires_grad = false) : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  static Var constant(Tensor value) { return Var(std::move(value), false); }
  static Var leaf(Tensor value) { return Var(std::move(value), true); }

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad_buffer(); }
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  double item() const { return node_->value.item(); }

  void zero_grad() {
    if (node_->has_grad()) node_->grad.fill(0.0);
  }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Builds an op result. The backward closure is kept only if some input
/// needs a gradient and recording is enabled.
inline Var make_result(Tensor value, std::initializer_list<Var> inputs, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (grad_enabled()) {
    const bool need = std::any_of(inputs.begin(), inputs.end(),
                                  [](const Var& v) { return v.defined() && v.requires_grad(); });
    if (need) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (const auto& v : inputs) node->parents.push_back(v.node());
      node->backward_fn = std::move(fn);
    }
  }
  return Var(std::move(node));
}

inline Var make_result(Tensor value, const std::vector<Var>& inputs, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (grad_enabled()) {
    const bool need = std::any_of(inputs.begin(), inputs.end(),
                                  [](const Var& v) { return v.defined() && v.requires_grad(); });
    if (need) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (const auto& v : inputs) node->parents.push_back(v.node());
      node->backward_fn = std::move(fn);
    }
  }
  return Var(std::move(node));
}

/// Calls fn(grad_buffer) on parent `i` if that parent takes a gradient.
template <typename Fn>
inline void accumulate(Node& self, std::size_t i, Fn&& fn) {
  Node& p = *self.parents[i];
  if (p.requires_grad) fn(p.grad_buffer());
}

/// Reverse-mode sweep from `root`, seeding its gradient with ones.
/// Gradients accumulate into leaves; call zero_grad between steps.
inline void backward(const Var& root) {
  if (!root.defined() || !root.requires_grad()) return;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->grad_buffer().fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && node->has_grad()) node->backward_fn(*node);
  }
  // Interior gradients are no longer needed; leaves keep theirs.
  for (Node* node : order) {
    if (node->backward_fn) node->grad = Tensor();
  }
}

}  // namespace scenesketch::nn
