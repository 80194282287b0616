// Copyright 2026 The swinseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense row-major tensors with tape-free reverse-mode autodiff.
//
// A Tensor is a cheap, shared handle onto a TensorNode. Every differentiable
// op records its parents and a backward closure on the output node; calling
// backward() on a scalar walks the graph in reverse topological order.
//
// Gradient semantics:
//   * leaf gradients accumulate across separate graphs until zero_grad();
//   * once backward() has run, the graph's interior nodes are released and a
//     second backward() through them raises UsageError.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace swinseg {

using Index = std::int64_t;
using Shape = std::vector<Index>;

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until the first accumulation
  bool requires_grad = false;
  bool released = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  // Lazily allocates and returns the gradient buffer.
  std::vector<T>& grad_buffer();
  bool is_leaf() const { return !backward_fn; }
};

template <typename T>
class Tensor {
 public:
  using Node = TensorNode<T>;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> data,
                          bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index dim(int axis) const;
  int rank() const { return static_cast<int>(node_->shape.size()); }
  Index numel() const { return static_cast<Index>(node_->data.size()); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  const std::vector<T>& vec() const { return node_->data; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on);
  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient view; empty span when nothing has been accumulated yet.
  std::span<const T> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  // Reverse sweep from this scalar. Throws UsageError on non-scalars, on
  // tensors that do not require grad, and on already-released graphs.
  void backward();

  // New leaf holding a copy of the values, detached from any graph.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Thread-local switch that stops ops from recording graph edges.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds an op result. The backward closure is attached only when grad mode
// is on and at least one input requires grad.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data,
                      std::vector<Tensor<T>> inputs,
                      std::function<void(TensorNode<T>&)> backward_fn);

// Throws ValidationError if any value is NaN or infinite.
template <typename T>
void check_finite(std::span<const T> values, const char* where);

}  // namespace swinseg
