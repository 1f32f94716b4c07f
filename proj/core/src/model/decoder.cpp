// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/model/decoder.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace mgforge::model {

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<Mat<T>>;
template <typename T>
using CMapM = Eigen::Map<const Mat<T>>;

template <typename T>
CMapM<T> as_matrix(const Tensor<T>& t) {
  return CMapM<T>(t.data().data(), t.dim(0), static_cast<Eigen::Index>(t.numel() / static_cast<std::size_t>(t.dim(0))));
}

template <typename T>
void layernorm_rows(Mat<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta) {
  const auto w = x.cols();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    T mean = 0;
    for (Eigen::Index j = 0; j < w; ++j) {
      mean += x(r, j);
    }
    mean /= static_cast<T>(w);
    T var = 0;
    for (Eigen::Index j = 0; j < w; ++j) {
      const T d = x(r, j) - mean;
      var += d * d;
    }
    var /= static_cast<T>(w);
    const T is = T(1) / std::sqrt(var + T(1e-5));
    for (Eigen::Index j = 0; j < w; ++j) {
      x(r, j) = (x(r, j) - mean) * is * gamma.data()[static_cast<std::size_t>(j)] + beta.data()[static_cast<std::size_t>(j)];
    }
  }
}

// Attention of one query row per sequence over `len` cached rows.
template <typename T>
void attend(const Mat<T>& q, const T* keys, const T* values, int batch, int stride_rows, int len, int heads, int dk,
            int dv, Mat<T>& out) {
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk)));
  std::vector<T> w(static_cast<std::size_t>(len));
  const std::size_t krow = static_cast<std::size_t>(heads) * dk;
  const std::size_t vrow = static_cast<std::size_t>(heads) * dv;
  out.setZero(batch, heads * dv);
  for (int s = 0; s < batch; ++s) {
    const T* kb = keys + static_cast<std::size_t>(s) * stride_rows * krow;
    const T* vb = values + static_cast<std::size_t>(s) * stride_rows * vrow;
    for (int h = 0; h < heads; ++h) {
      T mx = -std::numeric_limits<T>::infinity();
      for (int j = 0; j < len; ++j) {
        T dot = 0;
        const T* kj = kb + j * krow + static_cast<std::size_t>(h) * dk;
        for (int e = 0; e < dk; ++e) {
          dot += q(s, h * dk + e) * kj[e];
        }
        w[static_cast<std::size_t>(j)] = dot * scale;
        mx = std::max(mx, w[static_cast<std::size_t>(j)]);
      }
      T total = 0;
      for (int j = 0; j < len; ++j) {
        w[static_cast<std::size_t>(j)] = std::exp(w[static_cast<std::size_t>(j)] - mx);
        total += w[static_cast<std::size_t>(j)];
      }
      for (int j = 0; j < len; ++j) {
        const T p = w[static_cast<std::size_t>(j)] / total;
        const T* vj = vb + j * vrow + static_cast<std::size_t>(h) * dv;
        for (int e = 0; e < dv; ++e) {
          out(s, h * dv + e) += p * vj[e];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
IncrementalDecoder<T>::IncrementalDecoder(const Transformer<T>& model, std::span<const int> conditions)
    : model_(model), batch_(static_cast<int>(conditions.size())) {
  const ModelConfig& c = model.config();
  bool all_null = true;
  for (int cond : conditions) {
    if (cond < 0 || cond >= c.n_conditions) {
      throw Error(ErrorCategory::kModel, "UnknownCondition",
                  "condition id " + std::to_string(cond) + " outside [0, " + std::to_string(c.n_conditions) + ")");
    }
    all_null = all_null && cond == 0;
  }
  skip_cross_ = all_null && model.null_condition_is_zero();
  const int qk = c.n_heads * c.head_dim_k();
  const int vv = c.n_heads * c.head_dim_v();
  const int m = c.n_condition_slots;
  // Condition memories for every sequence, [batch * slots, d_model].
  Mat<T> memory(static_cast<Eigen::Index>(batch_) * m, c.d_model);
  const T* table = model.condition_table().data().data();
  for (int s = 0; s < batch_; ++s) {
    for (int k = 0; k < m; ++k) {
      const T* row = table + (static_cast<std::size_t>(conditions[static_cast<std::size_t>(s)]) * m + k) * c.d_model;
      for (int j = 0; j < c.d_model; ++j) {
        memory(s * m + k, j) = row[j];
      }
    }
  }
  for (const auto& lp : model.layers()) {
    LayerCache cache;
    cache.keys.assign(static_cast<std::size_t>(batch_) * c.max_len * qk, T(0));
    cache.values.assign(static_cast<std::size_t>(batch_) * c.max_len * vv, T(0));
    if (!skip_cross_) {
      cache.cross_keys.resize(static_cast<std::size_t>(batch_) * m * qk);
      cache.cross_values.resize(static_cast<std::size_t>(batch_) * m * vv);
      MapM<T>(cache.cross_keys.data(), batch_ * m, qk).noalias() = memory * as_matrix(lp.cross_attn.wk);
      MapM<T>(cache.cross_values.data(), batch_ * m, vv).noalias() = memory * as_matrix(lp.cross_attn.wv);
    }
    caches_.push_back(std::move(cache));
  }
}

template <typename T>
std::span<const T> IncrementalDecoder<T>::step(std::span<const int> tokens) {
  const ModelConfig& c = model_.config();
  if (pos_ >= c.max_len) {
    throw Error(ErrorCategory::kModel, "LengthOverflow", "decoder is at max_len " + std::to_string(c.max_len));
  }
  const int d = c.d_model;
  const int h = c.n_heads;
  const int dk = c.head_dim_k();
  const int dv = c.head_dim_v();
  const int qk = h * dk;
  const int vv = h * dv;
  Mat<T> x(batch_, d);
  const T* tok = model_.token_embedding().data().data();
  const T* pos = model_.position_embedding().data().data() + static_cast<std::size_t>(pos_) * d;
  for (int s = 0; s < batch_; ++s) {
    const int id = tokens[static_cast<std::size_t>(s)];
    if (id < 0 || id >= c.vocab_size) {
      throw Error(ErrorCategory::kModel, "IndexOutOfRange", "token id " + std::to_string(id) + " outside vocabulary");
    }
    for (int j = 0; j < d; ++j) {
      x(s, j) = tok[static_cast<std::size_t>(id) * d + j] + pos[j];
    }
  }
  Mat<T> q;
  Mat<T> att;
  Mat<T> y;
  for (std::size_t l = 0; l < caches_.size(); ++l) {
    const LayerParams<T>& lp = model_.layers()[l];
    LayerCache& cache = caches_[l];
    // Self-attention over positions 0..pos_.
    q.noalias() = x * as_matrix(lp.self_attn.wq);
    const Mat<T> k = x * as_matrix(lp.self_attn.wk);
    const Mat<T> v = x * as_matrix(lp.self_attn.wv);
    for (int s = 0; s < batch_; ++s) {
      std::copy_n(&k(s, 0), qk, cache.keys.data() + (static_cast<std::size_t>(s) * c.max_len + pos_) * qk);
      std::copy_n(&v(s, 0), vv, cache.values.data() + (static_cast<std::size_t>(s) * c.max_len + pos_) * vv);
    }
    attend<T>(q, cache.keys.data(), cache.values.data(), batch_, c.max_len, pos_ + 1, h, dk, dv, att);
    y.noalias() = att * as_matrix(lp.self_attn.wo);
    x += y;
    layernorm_rows<T>(x, lp.ln1_gamma, lp.ln1_beta);
    if (!skip_cross_) {
      const int m = c.n_condition_slots;
      q.noalias() = x * as_matrix(lp.cross_attn.wq);
      attend<T>(q, cache.cross_keys.data(), cache.cross_values.data(), batch_, m, m, h, dk, dv, att);
      y.noalias() = att * as_matrix(lp.cross_attn.wo);
      x += y;
    }
    layernorm_rows<T>(x, lp.ln2_gamma, lp.ln2_beta);
    Mat<T> hidden = x * as_matrix(lp.ffn_w1);
    for (Eigen::Index r = 0; r < hidden.rows(); ++r) {
      for (Eigen::Index j = 0; j < hidden.cols(); ++j) {
        hidden(r, j) = std::max(T(0), hidden(r, j) + lp.ffn_b1.data()[static_cast<std::size_t>(j)]);
      }
    }
    y.noalias() = hidden * as_matrix(lp.ffn_w2);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      for (Eigen::Index j = 0; j < d; ++j) {
        x(r, j) += y(r, j) + lp.ffn_b2.data()[static_cast<std::size_t>(j)];
      }
    }
    layernorm_rows<T>(x, lp.ln3_gamma, lp.ln3_beta);
  }
  const int vsz = c.vocab_size;
  logits_.resize(static_cast<std::size_t>(batch_) * vsz);
  MapM<T> out(logits_.data(), batch_, vsz);
  out.noalias() = x * as_matrix(model_.head_weight());
  for (int s = 0; s < batch_; ++s) {
    for (int j = 0; j < vsz; ++j) {
      out(s, j) += model_.head_bias().data()[static_cast<std::size_t>(j)];
    }
  }
  ++pos_;
  return logits_;
}

template class IncrementalDecoder<float>;
template class IncrementalDecoder<double>;

}  // namespace mgforge::model
