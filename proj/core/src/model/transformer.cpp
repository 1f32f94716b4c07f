// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/model/transformer.h"

#include <algorithm>
#include <cmath>

#include "mgforge/tensor/ops.h"

namespace mgforge::model {

using tensor::Shape;

namespace {

constexpr double kInitStd = 0.02;

template <typename T>
Tensor<T> param(const Shape& shape) {
  return Tensor<T>::zeros(shape, true);
}

template <typename T>
void fill_normal(Tensor<T>& t, Rng& rng) {
  for (T& v : t.data()) {
    v = static_cast<T>(rng.normal(0.0, kInitStd));
  }
}

template <typename T>
void fill_ones(Tensor<T>& t) {
  std::fill(t.data().begin(), t.data().end(), T(1));
}

Error model_err(const std::string& kind, const std::string& msg) { return Error(ErrorCategory::kModel, kind, msg); }

}  // namespace

template <typename T>
void Transformer<T>::allocate() {
  config_.validate();
  const int d = config_.d_model;
  const int qk = config_.n_heads * config_.head_dim_k();
  const int vv = config_.n_heads * config_.head_dim_v();
  tok_emb_ = param<T>({config_.vocab_size, d});
  pos_emb_ = param<T>({config_.max_len, d});
  cond_table_ = param<T>({config_.n_conditions, config_.n_condition_slots, d});
  layers_.clear();
  for (int l = 0; l < config_.n_layers; ++l) {
    LayerParams<T> lp;
    for (AttentionParams<T>* a : {&lp.self_attn, &lp.cross_attn}) {
      a->wq = param<T>({d, qk});
      a->wk = param<T>({d, qk});
      a->wv = param<T>({d, vv});
      a->wo = param<T>({vv, d});
    }
    lp.ln1_gamma = param<T>({d});
    lp.ln1_beta = param<T>({d});
    lp.ln2_gamma = param<T>({d});
    lp.ln2_beta = param<T>({d});
    lp.ln3_gamma = param<T>({d});
    lp.ln3_beta = param<T>({d});
    lp.ffn_w1 = param<T>({d, config_.d_ffn});
    lp.ffn_b1 = param<T>({config_.d_ffn});
    lp.ffn_w2 = param<T>({config_.d_ffn, d});
    lp.ffn_b2 = param<T>({d});
    layers_.push_back(std::move(lp));
  }
  head_w_ = param<T>({d, config_.vocab_size});
  head_b_ = param<T>({config_.vocab_size});
}

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config) : config_(config) {
  allocate();
}

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config, Rng& rng) : config_(config) {
  allocate();
  // Fixed draw order: token, position, condition rows 1.., then per layer
  // self q/k/v/o, cross q/k/v/o, ffn w1, w2, then the head.
  fill_normal(tok_emb_, rng);
  fill_normal(pos_emb_, rng);
  const std::size_t row = static_cast<std::size_t>(config_.n_condition_slots) * config_.d_model;
  for (std::size_t i = row; i < cond_table_.numel(); ++i) {
    cond_table_.data()[i] = static_cast<T>(rng.normal(0.0, kInitStd));
  }
  for (auto& lp : layers_) {
    for (AttentionParams<T>* a : {&lp.self_attn, &lp.cross_attn}) {
      fill_normal(a->wq, rng);
      fill_normal(a->wk, rng);
      fill_normal(a->wv, rng);
      fill_normal(a->wo, rng);
    }
    fill_ones(lp.ln1_gamma);
    fill_ones(lp.ln2_gamma);
    fill_ones(lp.ln3_gamma);
    fill_normal(lp.ffn_w1, rng);
    fill_normal(lp.ffn_w2, rng);
  }
  fill_normal(head_w_, rng);
}

template <typename T>
std::vector<NamedParam<T>> Transformer<T>::parameters() {
  std::vector<NamedParam<T>> out;
  out.push_back({"token_embedding", &tok_emb_, ParamRole::kWeight});
  out.push_back({"position_embedding", &pos_emb_, ParamRole::kWeight});
  out.push_back({"condition_table", &cond_table_, ParamRole::kCondition});
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& lp = layers_[l];
    const std::string p = "layers." + std::to_string(l) + ".";
    auto add = [&](const std::string& name, Tensor<T>& t) { out.push_back({p + name, &t, ParamRole::kWeight}); };
    add("self_attn.wq", lp.self_attn.wq);
    add("self_attn.wk", lp.self_attn.wk);
    add("self_attn.wv", lp.self_attn.wv);
    add("self_attn.wo", lp.self_attn.wo);
    add("ln1.gamma", lp.ln1_gamma);
    add("ln1.beta", lp.ln1_beta);
    add("cross_attn.wq", lp.cross_attn.wq);
    add("cross_attn.wk", lp.cross_attn.wk);
    add("cross_attn.wv", lp.cross_attn.wv);
    add("cross_attn.wo", lp.cross_attn.wo);
    add("ln2.gamma", lp.ln2_gamma);
    add("ln2.beta", lp.ln2_beta);
    add("ffn.w1", lp.ffn_w1);
    add("ffn.b1", lp.ffn_b1);
    add("ffn.w2", lp.ffn_w2);
    add("ffn.b2", lp.ffn_b2);
    add("ln3.gamma", lp.ln3_gamma);
    add("ln3.beta", lp.ln3_beta);
  }
  out.push_back({"head.weight", &head_w_, ParamRole::kWeight});
  out.push_back({"head.bias", &head_b_, ParamRole::kWeight});
  return out;
}

template <typename T>
std::vector<Tensor<T>> Transformer<T>::parameter_tensors() {
  std::vector<Tensor<T>> out;
  for (auto& p : parameters()) {
    out.push_back(*p.tensor);
  }
  return out;
}

template <typename T>
void Transformer<T>::zero_grad() {
  for (auto& p : parameters()) {
    p.tensor->zero_grad();
  }
}

template <typename T>
void Transformer<T>::freeze_null_condition_grad() {
  if (!cond_table_.has_grad()) {
    return;
  }
  const std::size_t row = static_cast<std::size_t>(config_.n_condition_slots) * config_.d_model;
  std::fill_n(cond_table_.grad().begin(), row, T(0));
}

template <typename T>
bool Transformer<T>::null_condition_is_zero() const {
  const std::size_t row = static_cast<std::size_t>(config_.n_condition_slots) * config_.d_model;
  const auto d = cond_table_.data();
  return std::all_of(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(row), [](T v) { return v == T(0); });
}

template <typename T>
void Transformer<T>::expand_conditions(int n_conditions, Rng& rng) {
  if (n_conditions < config_.n_conditions) {
    throw model_err("ConfigMismatch", "cannot shrink the condition table from " + std::to_string(config_.n_conditions) +
                                          " to " + std::to_string(n_conditions) + " rows");
  }
  std::vector<T> values(cond_table_.data().begin(), cond_table_.data().end());
  const std::size_t row = static_cast<std::size_t>(config_.n_condition_slots) * config_.d_model;
  values.reserve(row * static_cast<std::size_t>(n_conditions));
  while (values.size() < row * static_cast<std::size_t>(n_conditions)) {
    values.push_back(static_cast<T>(rng.normal(0.0, kInitStd)));
  }
  config_.n_conditions = n_conditions;
  cond_table_ = Tensor<T>::from({n_conditions, config_.n_condition_slots, config_.d_model}, std::move(values), true);
}

template <typename T>
template <typename U>
Transformer<U> Transformer<T>::cast() const {
  ModelConfig c = config_;
  c.precision = std::is_same_v<U, double> ? Precision::kFloat64 : Precision::kFloat32;
  Transformer<U> out(c);
  auto src = const_cast<Transformer<T>*>(this)->parameters();
  auto dst = out.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::transform(src[i].tensor->data().begin(), src[i].tensor->data().end(), dst[i].tensor->data().begin(),
                   [](T v) { return static_cast<U>(v); });
  }
  return out;
}

template <typename T>
Tensor<T> multi_head_attention(const AttentionParams<T>& p, const Tensor<T>& query, const Tensor<T>& memory,
                               int n_heads, int d_k, int d_v, bool causal) {
  if (query.dim(-1) != p.wq.dim(0) || p.wq.dim(1) != n_heads * d_k || p.wv.dim(1) != n_heads * d_v) {
    throw tensor::shape_error("multi_head_attention", query.shape(), p.wq.shape());
  }
  const Tensor<T> heads = tensor::attention(tensor::matmul(query, p.wq), tensor::matmul(memory, p.wk),
                                            tensor::matmul(memory, p.wv), n_heads, causal);
  return tensor::matmul(heads, p.wo);
}

template <typename T>
Tensor<T> Transformer<T>::forward(std::span<const int> tokens, int batch, int length,
                                  std::span<const int> conditions, const ForwardOptions& options) const {
  const ModelConfig& c = config_;
  if (length > c.max_len) {
    throw model_err("LengthOverflow",
                    "sequence length " + std::to_string(length) + " exceeds max_len " + std::to_string(c.max_len));
  }
  if (tokens.size() != static_cast<std::size_t>(batch) * length || conditions.size() != static_cast<std::size_t>(batch)) {
    throw tensor::shape_error("forward", {batch, length}, {static_cast<int>(tokens.size()), static_cast<int>(conditions.size())});
  }
  bool all_null = true;
  for (int cond : conditions) {
    if (cond < 0 || cond >= c.n_conditions) {
      throw model_err("UnknownCondition", "condition id " + std::to_string(cond) + " outside [0, " +
                                              std::to_string(c.n_conditions) + ")");
    }
    all_null = all_null && cond == 0;
  }
  const bool skip_cross = options.skip_null_cross && all_null && null_condition_is_zero();

  std::vector<int> positions(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    positions[static_cast<std::size_t>(i)] = i;
  }
  Tensor<T> z = tensor::add(tensor::embedding(tok_emb_, tokens, {batch, length}),
                            tensor::embedding(pos_emb_, positions, {length}));

  Tensor<T> memory;
  if (!skip_cross) {
    const int m = c.n_condition_slots;
    std::vector<int> rows;
    rows.reserve(static_cast<std::size_t>(batch) * m);
    for (int cond : conditions) {
      for (int s = 0; s < m; ++s) {
        rows.push_back(cond * m + s);
      }
    }
    const Tensor<T> table = tensor::reshape(cond_table_, {c.n_conditions * m, c.d_model});
    memory = tensor::embedding(table, rows, {batch, m});
  }

  const int dk = c.head_dim_k();
  const int dv = c.head_dim_v();
  for (const auto& lp : layers_) {
    z = tensor::layernorm_last(tensor::add(z, multi_head_attention(lp.self_attn, z, z, c.n_heads, dk, dv, true)),
                               lp.ln1_gamma, lp.ln1_beta);
    if (skip_cross) {
      z = tensor::layernorm_last(z, lp.ln2_gamma, lp.ln2_beta);
    } else {
      z = tensor::layernorm_last(
          tensor::add(z, multi_head_attention(lp.cross_attn, z, memory, c.n_heads, dk, dv, false)), lp.ln2_gamma,
          lp.ln2_beta);
    }
    const Tensor<T> pre = tensor::linear(z, lp.ffn_w1, lp.ffn_b1);
    if (options.preactivation_observer) {
      const std::vector<double> values(pre.data().begin(), pre.data().end());
      options.preactivation_observer(values);
    }
    const Tensor<T> hidden = tensor::relu(pre);
    z = tensor::layernorm_last(tensor::add(z, tensor::linear(hidden, lp.ffn_w2, lp.ffn_b2)),
                               lp.ln3_gamma, lp.ln3_beta);
  }
  return tensor::linear(z, head_w_, head_b_);
}

template <typename T>
std::vector<double> token_nll(const Tensor<T>& logits, std::span<const int> targets) {
  const int v = logits.dim(-1);
  const std::size_t rows = logits.numel() / static_cast<std::size_t>(v);
  if (targets.size() != rows) {
    throw tensor::shape_error("token_nll", logits.shape(), {static_cast<int>(targets.size())});
  }
  std::vector<double> out(rows);
  std::vector<T> lp(static_cast<std::size_t>(v));
  for (std::size_t r = 0; r < rows; ++r) {
    tensor::log_softmax_row<T>(logits.data().subspan(r * v, static_cast<std::size_t>(v)), lp);
    out[r] = -static_cast<double>(lp[static_cast<std::size_t>(targets[r])]);
  }
  return out;
}

template class Transformer<float>;
template class Transformer<double>;
template Transformer<double> Transformer<float>::cast<double>() const;
template Transformer<float> Transformer<double>::cast<float>() const;
template Transformer<float> Transformer<float>::cast<float>() const;
template Transformer<double> Transformer<double>::cast<double>() const;
template Tensor<float> multi_head_attention<float>(const AttentionParams<float>&, const Tensor<float>&,
                                                   const Tensor<float>&, int, int, int, bool);
template Tensor<double> multi_head_attention<double>(const AttentionParams<double>&, const Tensor<double>&,
                                                     const Tensor<double>&, int, int, int, bool);
template std::vector<double> token_nll<float>(const Tensor<float>&, std::span<const int>);
template std::vector<double> token_nll<double>(const Tensor<double>&, std::span<const int>);

}  // namespace mgforge::model
