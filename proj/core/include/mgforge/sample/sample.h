// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mgforge/model/transformer.h"
#include "mgforge/tokenizer/vocab.h"

namespace mgforge::sample {

struct SampleConfig {
  int n = 1;
  // 0 selects the arg-max token (lowest id on ties).
  double temperature = 1.0;
  // Keep only the k most likely tokens; 0 disables.
  int top_k = 0;
  // Generated tokens (EOS included) per sample; 0 or anything above the
  // model's max_len means max_len.
  int max_len = 0;
  std::uint64_t seed = 1;
  int threads = 1;
  // Tokens forced after BOS for every sample (part of the returned text).
  std::vector<int> prefix;
};

struct Sample {
  std::size_t index = 0;
  std::string smiles;
  int condition = 0;
  // NLL(S|c) of the returned text; EOS term excluded for truncated samples.
  double nll = 0.0;
  // No EOS within max_len.
  bool truncated = false;
};

using SampleSink = std::function<void(const Sample&)>;

// Sequences are drawn in fixed chunks of 64 with a KV-cached decoder; sample i
// draws from Rng::stream(seed, i), so results do not depend on `threads`.
// BOS, PAD and UNK are never sampled. Samples reach `sink` in index order and
// only one round of chunks is held in memory. Throws kind
// "UnknownCondition" / "InvalidConfig".
void generate_stream(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition,
                     const SampleConfig& config, const SampleSink& sink);

std::vector<Sample> generate(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition,
                             const SampleConfig& config);

// NLL(S|c) = -sum_i ln P(t_i | t_<i, c) over the tokens of `smiles` and the
// final EOS, from one full forward pass over the sequence alone. Throws kind
// "UnknownToken" or "LengthOverflow".
double score(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition, const std::string& smiles);

// Same quantity for encoded ids (BOS ... [EOS]); every position after BOS is a
// target.
double score_ids(const model::Transformer<float>& model, const std::vector<int>& ids, int condition);

}  // namespace mgforge::sample
