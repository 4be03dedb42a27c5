// Copyright 2026 The leafkit Authors. All Rights Reserved.
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

// Reverse-mode automatic differentiation over dense row-major tensors.
//
// A Tensor is a cheap handle onto a shared node. Operations whose inputs
// require gradients record a backward closure on their output node; calling
// backward() on a scalar walks the recorded graph in reverse topological
// order, each closure visited once, and accumulates into the `grad` of every
// reachable node that requires it. The graph is released after the pass.
//
// Two precisions are used: double for gradient checking, float for training.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "leafkit/core/error.hpp"

namespace leafkit {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

namespace detail {

inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }
};

}  // namespace detail

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : prev_(detail::grad_enabled_flag()) { detail::grad_enabled_flag() = false; }
  ~NoGradGuard() { detail::grad_enabled_flag() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() : node_(std::make_shared<detail::Node<T>>()) {}

  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false)
      : node_(std::make_shared<detail::Node<T>>()) {
    if (shape_numel(shape) != values.size()) {
      throw ShapeError("tensor: shape " + shape_str(shape) + " does not hold " +
                       std::to_string(values.size()) + " values");
    }
    node_->shape = std::move(shape);
    node_->values = std::move(values);
    node_->requires_grad = requires_grad;
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), T(0), requires_grad);
  }
  static Tensor full(Shape shape, T v, bool requires_grad = false) {
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, v), requires_grad);
  }
  static Tensor scalar(T v, bool requires_grad = false) { return Tensor({}, {v}, requires_grad); }

  const Shape& shape() const { return node_->shape; }
  std::size_t dim() const { return node_->shape.size(); }
  std::size_t size(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->values.size(); }

  std::span<const T> values() const { return node_->values; }
  /// Direct write access, for optimizer updates and in-place clamping.
  /// Must not be used on a node that is part of a live graph.
  std::span<T> mutable_values() { return node_->values; }
  const std::vector<T>& vec() const { return node_->values; }

  T item() const {
    if (numel() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
    return node_->values[0];
  }
  T operator[](std::size_t i) const { return node_->values[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool r) { node_->requires_grad = r; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() { node_->grad.clear(); }

  /// Same values, no history.
  Tensor detach() const { return Tensor(shape(), node_->values, false); }

  /// Deep copy that keeps requires_grad but not history or grad.
  Tensor clone() const { return Tensor(shape(), node_->values, requires_grad()); }

  bool same_node(const Tensor& o) const { return node_ == o.node_; }

  /// Reverse pass from a scalar. Seeds d(self)/d(self) = 1.
  void backward() const {
    if (numel() != 1) throw ShapeError("backward: requires a scalar, got " + shape_str(shape()));
    if (!node_->requires_grad) throw std::logic_error("backward: tensor does not require grad");

    std::vector<detail::Node<T>*> order;
    topo_sort(node_.get(), order);

    node_->ensure_grad();
    node_->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      detail::Node<T>* n = *it;
      if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
    for (detail::Node<T>* n : order) {
      if (n->backward_fn) {
        n->backward_fn = nullptr;
        n->parents.clear();
      } else if (n->requires_grad) {
        for (T g : n->grad) {
          if (!std::isfinite(static_cast<double>(g))) {
            throw NumericError("backward: non-finite gradient on a leaf tensor");
          }
        }
      }
    }
  }

  const NodePtr& node() const { return node_; }

  /// Builds an operation result. Records history only when some parent
  /// requires grad and recording is enabled.
  static Tensor make_result(Shape shape, std::vector<T> values, std::vector<Tensor> parents,
                            std::function<void(detail::Node<T>&)> backward_fn) {
    Tensor out(std::move(shape), std::move(values), false);
    if (!grad_enabled()) return out;
    bool any = false;
    for (const Tensor& p : parents) any = any || p.requires_grad();
    if (!any) return out;
    out.node_->requires_grad = true;
    for (const Tensor& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward_fn = std::move(backward_fn);
    return out;
  }

 private:
  static void topo_sort(detail::Node<T>* root, std::vector<detail::Node<T>*>& order) {
    std::unordered_set<detail::Node<T>*> seen;
    std::vector<std::pair<detail::Node<T>*, std::size_t>> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        detail::Node<T>* p = n->parents[next++].get();
        if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }
  }

  NodePtr node_;
};

/// Adds `g` into the gradient of `node` if it participates in autodiff.
template <typename T>
inline void accumulate(detail::Node<T>& node, std::span<const T> g) {
  if (!node.requires_grad) return;
  node.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

}  // namespace leafkit
