// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/tensor/adam.h"

#include <cmath>

namespace mgforge::tensor {

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), T(0));
    v_.emplace_back(p.numel(), T(0));
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const T eps = static_cast<T>(config_.eps);
  // Fold both corrections into one step size and the epsilon.
  const T step_size = static_cast<T>(lr / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor<T>& p = params_[k];
    if (!p.has_grad()) {
      // Zero gradient still decays the moments.
      for (std::size_t i = 0; i < p.numel(); ++i) {
        m_[k][i] *= static_cast<T>(b1);
        v_[k][i] *= static_cast<T>(b2);
        p.data()[i] -= step_size * m_[k][i] / (std::sqrt(v_[k][i]) * inv_sqrt_c2 + eps);
      }
      continue;
    }
    const std::span<T> g = p.grad();
    if (g.size() != p.numel()) {
      throw shape_error("adam", p.shape(), {static_cast<int>(g.size())});
    }
    T* m = m_[k].data();
    T* v = v_[k].data();
    T* w = p.data().data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = static_cast<T>(b1) * m[i] + static_cast<T>(1.0 - b1) * g[i];
      v[i] = static_cast<T>(b2) * v[i] + static_cast<T>(1.0 - b2) * g[i] * g[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
}

template <typename T>
double grad_norm(std::vector<Tensor<T>>& params) {
  double total = 0.0;
  for (auto& p : params) {
    if (!p.has_grad()) {
      continue;
    }
    for (T g : p.grad()) {
      total += static_cast<double>(g) * static_cast<double>(g);
    }
  }
  return std::sqrt(total);
}

template <typename T>
double clip_grad_norm(std::vector<Tensor<T>>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto& p : params) {
      if (p.has_grad()) {
        for (T& g : p.grad()) {
          g *= factor;
        }
      }
    }
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double grad_norm<float>(std::vector<Tensor<float>>&);
template double grad_norm<double>(std::vector<Tensor<double>>&);
template double clip_grad_norm<float>(std::vector<Tensor<float>>&, double);
template double clip_grad_norm<double>(std::vector<Tensor<double>>&, double);

}  // namespace mgforge::tensor
