// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgforge/tensor/tensor.h"

namespace mgforge::tensor {

// Value written by masked_fill before a softmax; exp() of it underflows to 0.
inline constexpr double kMaskSentinel = -1e30;

// x[..., K] @ w[K, N] -> [..., N].
template <typename T>
Tensor<T> matmul(const Tensor<T>& x, const Tensor<T>& w);

// x[..., K] @ w[K, N] + b[N]; one node instead of matmul followed by add.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// Batched a[B, M, K] @ b[B, K, N]; with transpose_b, b is [B, N, K] and is
// used transposed.
template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b = false);

// Elementwise; `b` may also have a shape equal to a trailing part of a's
// shape, in which case it is broadcast over the leading axes.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T>
Tensor<T> transpose(const Tensor<T>& a, int axis0, int axis1);

// Same values, new shape of equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape);

template <typename T>
Tensor<T> concat_last(const std::vector<Tensor<T>>& parts);

// Max-subtracted softmax over the last axis.
template <typename T>
Tensor<T> softmax_last(const Tensor<T>& a);

// (x - mean) / sqrt(var + eps) * gamma + beta over the last axis, with the
// biased variance.
template <typename T>
Tensor<T> layernorm_last(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps = T(1e-5));

// Rows of table[V, D] selected by ids -> prefix_shape + [D]. Throws
// kind "IndexOutOfRange" for ids outside [0, V).
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const int> ids, const Shape& prefix_shape);

template <typename T>
Tensor<T> relu(const Tensor<T>& a);

// Positions where mask != 0 become kMaskSentinel and pass no gradient. The
// mask covers a trailing part of a's shape and repeats over leading axes.
template <typename T>
Tensor<T> masked_fill(const Tensor<T>& a, std::span<const std::uint8_t> mask, const Shape& mask_shape);

// Weighted mean of -log softmax(logits[i])[targets[i]] over rows of
// logits[N, V], divided by the sum of weights. Rows with weight 0 contribute
// nothing. Throws kind "EmptyMask" when every weight is 0.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets, std::span<const T> weights);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);

// Scaled dot-product attention over heads packed in the last axis:
// q [B, Lq, h*dk], k [B, Lk, h*dk], v [B, Lk, h*dv] -> [B, Lq, h*dv], with
// softmax(q_h k_h^T / sqrt(dk)) v_h per head. With `causal` (Lq == Lk),
// query i attends to keys j <= i only and the weights of later keys are
// exactly zero. Heads are read through strided views, so nothing is copied.
template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, int n_heads, bool causal);

// Causal mask [L, L]: 1 where key j > query i.
std::vector<std::uint8_t> causal_mask(int length);

// Row-wise log-softmax without graph recording.
template <typename T>
void log_softmax_row(std::span<const T> logits, std::span<T> out);

}  // namespace mgforge::tensor
