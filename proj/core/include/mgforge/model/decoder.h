// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "mgforge/model/transformer.h"

namespace mgforge::model {

// Step-by-step decoding with cached self-attention keys and values. Computes
// the same function as Transformer::forward one position at a time (equal up
// to floating-point reassociation) without recording a graph. The model must
// outlive the decoder.
template <typename T>
class IncrementalDecoder {
 public:
  // One sequence per entry of `conditions`.
  IncrementalDecoder(const Transformer<T>& model, std::span<const int> conditions);

  int batch() const { return batch_; }
  // Number of tokens consumed so far.
  int position() const { return pos_; }

  // Consumes one token per sequence and returns next-token logits
  // [batch, vocab] row-major. Throws kind "LengthOverflow" past max_len.
  std::span<const T> step(std::span<const int> tokens);

 private:
  struct LayerCache {
    std::vector<T> keys;    // [batch, max_len, h*d_k]
    std::vector<T> values;  // [batch, max_len, h*d_v]
    std::vector<T> cross_keys;    // [batch, slots, h*d_k]
    std::vector<T> cross_values;  // [batch, slots, h*d_v]
  };

  const Transformer<T>& model_;
  int batch_;
  int pos_ = 0;
  bool skip_cross_;
  std::vector<LayerCache> caches_;
  std::vector<T> logits_;
};

extern template class IncrementalDecoder<float>;
extern template class IncrementalDecoder<double>;

}  // namespace mgforge::model
