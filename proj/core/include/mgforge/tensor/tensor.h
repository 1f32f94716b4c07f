// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mgforge/common/error.h"

namespace mgforge::tensor {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// kind "ShapeMismatch"; the message names both shapes.
Error shape_error(const std::string& op, const Shape& a, const Shape& b);

// Leaves elements uninitialized on resize, so a gradient buffer whose first
// writer overwrites every element skips the zero fill.
template <typename T>
struct UninitAllocator : std::allocator<T> {
  template <typename U>
  struct rebind {
    using other = UninitAllocator<U>;
  };
  UninitAllocator() = default;
  template <typename U>
  UninitAllocator(const UninitAllocator<U>&) noexcept {}
  template <typename U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <typename U, typename... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  // Allocated on first use; empty means "all zero".
  std::vector<T, UninitAllocator<T>> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;

  T* grad_buffer();
  // Like grad_buffer(), but a newly allocated buffer is left uninitialized
  // and `fresh` is set: the caller must then write every element.
  T* grad_target(bool& fresh);
};

// Dense row-major array with a reverse-mode autodiff backlink. Copies are
// shallow: two Tensor handles may share one node.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor filled(const Shape& shape, T value);
  // Throws ShapeMismatch when values.size() != numel(shape).
  static Tensor from(const Shape& shape, std::vector<T> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }
  // Negative axes count from the end.
  int dim(int axis) const;
  std::size_t numel() const { return node_->value.size(); }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient buffer, allocated (zero) on demand.
  std::span<T> grad();
  void zero_grad() { node_->grad.clear(); }

  // Back-propagates from a scalar. Every node reachable from this one that
  // requires grad accumulates d(this)/d(node). Throws kind "NonScalarLoss".
  void backward();

  // Fresh leaf holding a copy of the values, detached from the graph.
  Tensor detach() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// While alive, ops on this thread record no graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

extern template struct Node<float>;
extern template struct Node<double>;
extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace mgforge::tensor
