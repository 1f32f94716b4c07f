// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mgforge/common/rng.h"
#include "mgforge/model/config.h"
#include "mgforge/tensor/tensor.h"

namespace mgforge::model {

using tensor::Tensor;

template <typename T>
struct AttentionParams {
  Tensor<T> wq;  // [d_model, h * d_k]
  Tensor<T> wk;  // [d_model, h * d_k]
  Tensor<T> wv;  // [d_model, h * d_v]
  Tensor<T> wo;  // [h * d_v, d_model]
};

template <typename T>
struct LayerParams {
  AttentionParams<T> self_attn;
  AttentionParams<T> cross_attn;
  Tensor<T> ln1_gamma, ln1_beta;
  Tensor<T> ln2_gamma, ln2_beta;
  Tensor<T> ln3_gamma, ln3_beta;
  Tensor<T> ffn_w1;  // [d_model, d_ffn]
  Tensor<T> ffn_b1;
  Tensor<T> ffn_w2;  // [d_ffn, d_model]
  Tensor<T> ffn_b2;
};

enum class ParamRole { kWeight, kCondition };

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T>* tensor;
  ParamRole role;
};

struct ForwardOptions {
  // When every condition in the batch is 0 and row 0 of the condition table
  // is zero, the cross-attention output is exactly zero and the sublayer is
  // LN(x); skipping it gives identical results.
  bool skip_null_cross = true;
  // Called with every FFN pre-activation (before ReLU), layer by layer.
  // Lets gradient checks detect finite-difference steps that cross a kink.
  std::function<void(std::span<const double>)> preactivation_observer;
};

// Post-LN decoder with a cross-attention sublayer over condition memories:
//
//   z0 = E_tok[t] + E_pos
//   a  = LN1(z + SelfMHA(z, z, z))           causal
//   b  = LN2(a + CrossMHA(a, e_c, e_c))       e_c = condition_table[c]
//   z' = LN3(b + FFN(b))                      FFN = ReLU(b W1 + b1) W2 + b2
//   logits = z_L W_head + b_head
//
// Attention projections carry no bias.
template <typename T>
class Transformer {
 public:
  // Parameters drawn from Normal(0, 0.02), layer norms at identity, biases
  // and condition row 0 at zero.
  Transformer(const ModelConfig& config, Rng& rng);
  // All parameters zero (filled in by a checkpoint loader).
  explicit Transformer(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // tokens: batch x length ids (row-major), conditions: one per row.
  // Returns logits [batch, length, vocab]. Throws kind "LengthOverflow",
  // "UnknownCondition" or "IndexOutOfRange".
  Tensor<T> forward(std::span<const int> tokens, int batch, int length, std::span<const int> conditions,
                    const ForwardOptions& options = {}) const;

  // Every parameter in a fixed order (the checkpoint order).
  std::vector<NamedParam<T>> parameters();
  std::vector<Tensor<T>> parameter_tensors();
  void zero_grad();

  Tensor<T>& token_embedding() { return tok_emb_; }
  Tensor<T>& position_embedding() { return pos_emb_; }
  // [n_conditions, n_condition_slots, d_model]
  Tensor<T>& condition_table() { return cond_table_; }
  const Tensor<T>& condition_table() const { return cond_table_; }
  Tensor<T>& head_weight() { return head_w_; }
  Tensor<T>& head_bias() { return head_b_; }
  const Tensor<T>& token_embedding() const { return tok_emb_; }
  const Tensor<T>& position_embedding() const { return pos_emb_; }
  const Tensor<T>& head_weight() const { return head_w_; }
  const Tensor<T>& head_bias() const { return head_b_; }
  const std::vector<LayerParams<T>>& layers() const { return layers_; }
  std::vector<LayerParams<T>>& layers() { return layers_; }

  // Zeroes the gradient of condition row 0 so it stays frozen.
  void freeze_null_condition_grad();
  bool null_condition_is_zero() const;

  // Grows the condition table to n rows; new rows ~ Normal(0, 0.02).
  void expand_conditions(int n_conditions, Rng& rng);

  // Copies parameters into another precision.
  template <typename U>
  Transformer<U> cast() const;

 private:
  void allocate();

  ModelConfig config_;
  Tensor<T> tok_emb_;
  Tensor<T> pos_emb_;
  Tensor<T> cond_table_;
  std::vector<LayerParams<T>> layers_;
  Tensor<T> head_w_;
  Tensor<T> head_b_;
};

// Multi-head attention on [B, Lq, D] queries and [B, Lk, D] keys/values.
template <typename T>
Tensor<T> multi_head_attention(const AttentionParams<T>& p, const Tensor<T>& query, const Tensor<T>& memory,
                               int n_heads, int d_k, int d_v, bool causal);

// Per-position NLL of targets under logits [B, L, V] with no graph recorded.
template <typename T>
std::vector<double> token_nll(const Tensor<T>& logits, std::span<const int> targets);

extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace mgforge::model
