// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "mgforge/tensor/tensor.h"

namespace mgforge::tensor {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction:
//   m = b1 m + (1 - b1) g;  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// Moments are kept per parameter in the parameter's precision.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamConfig config);

  // One update using the current grads (missing grads count as zero) and
  // the given learning rate. Throws ShapeMismatch if a grad buffer has the
  // wrong size.
  void step(double lr);
  void step() { step(config_.lr); }

  std::int64_t steps() const { return step_; }
  void set_steps(std::int64_t s) { step_ = s; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  std::vector<std::vector<T>>& first_moments() { return m_; }
  std::vector<std::vector<T>>& second_moments() { return v_; }
  const std::vector<std::vector<T>>& first_moments() const { return m_; }
  const std::vector<std::vector<T>>& second_moments() const { return v_; }

 private:
  std::vector<Tensor<T>> params_;
  AdamConfig config_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  std::int64_t step_ = 0;
};

// Global L2 norm of all grads.
template <typename T>
double grad_norm(std::vector<Tensor<T>>& params);

// Scales every grad by max_norm / norm when the global norm exceeds
// max_norm. Returns the norm before clipping.
template <typename T>
double clip_grad_norm(std::vector<Tensor<T>>& params, double max_norm);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace mgforge::tensor
