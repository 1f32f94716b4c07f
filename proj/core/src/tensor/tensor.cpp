// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/tensor/tensor.h"

#include <algorithm>
#include <unordered_set>

namespace mgforge::tensor {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += (i ? "," : "") + std::to_string(shape[i]);
  }
  return s + "]";
}

Error shape_error(const std::string& op, const Shape& a, const Shape& b) {
  return Error(ErrorCategory::kModel, "ShapeMismatch", op + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
T* Node<T>::grad_buffer() {
  if (grad.empty()) {
    grad.assign(value.size(), T(0));
  }
  return grad.data();
}

template <typename T>
T* Node<T>::grad_target(bool& fresh) {
  fresh = grad.empty();
  if (fresh) {
    grad.resize(value.size());
  }
  return grad.data();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(const Shape& shape, bool requires_grad) {
  auto n = std::make_shared<Node<T>>();
  n->shape = shape;
  n->value.assign(tensor::numel(shape), T(0));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::filled(const Shape& shape, T value) {
  Tensor t = zeros(shape);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::from(const Shape& shape, std::vector<T> values, bool requires_grad) {
  if (values.size() != tensor::numel(shape)) {
    throw shape_error("from", shape, {static_cast<int>(values.size())});
  }
  auto n = std::make_shared<Node<T>>();
  n->shape = shape;
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

template <typename T>
int Tensor<T>::dim(int axis) const {
  const int nd = ndim();
  return node_->shape[static_cast<std::size_t>(axis < 0 ? axis + nd : axis)];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw shape_error("item", shape(), {1});
  }
  return node_->value[0];
}

template <typename T>
std::span<T> Tensor<T>::grad() {
  return {node_->grad_buffer(), node_->value.size()};
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return from(shape(), node_->value);
}

template <typename T>
void Tensor<T>::backward() {
  if (numel() != 1) {
    throw Error(ErrorCategory::kModel, "NonScalarLoss",
                "backward() needs a scalar, got shape " + to_string(shape()));
  }
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && !n->grad.empty()) {
      n->backward(*n);
    }
  }
}

template struct Node<float>;
template struct Node<double>;
template class Tensor<float>;
template class Tensor<double>;

}  // namespace mgforge::tensor
