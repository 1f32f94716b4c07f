// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgforge/model/transformer.h"
#include "mgforge/store/batch.h"
#include "mgforge/store/checkpoint.h"
#include "mgforge/store/corpus.h"
#include "mgforge/tensor/adam.h"

namespace mgforge::train {

enum class FinetuneScope { kAllWeights, kConditionEmbeddingsOnly };
enum class LrSchedule { kConstant, kWarmupLinear };

struct TrainConfig {
  int epochs = 1;
  // Optional caps; 0 disables. Training stops at whichever limit hits first.
  std::int64_t max_steps = 0;
  double max_minutes = 0.0;
  int batch_size = 64;
  // Batches of similar-length sequences (see store::BatchIterator).
  bool length_bucketing = true;
  double lr = 3e-4;
  LrSchedule lr_schedule = LrSchedule::kWarmupLinear;
  int warmup_steps = 1000;
  // Floor of the linear decay, as a fraction of lr.
  double min_lr_ratio = 0.1;
  std::uint64_t seed = 1;
  double grad_clip_norm = 1.0;
  int eval_every = 100;
  // Held-out sequences scored at each evaluation (0 = all).
  int eval_max_sequences = 1000;
  model::Precision precision = model::Precision::kFloat32;
  FinetuneScope finetune_scope = FinetuneScope::kAllWeights;
  // Fine-tune one target after another instead of mixed batches.
  bool sequential_targets = false;
};

// Missing keys keep their defaults; unknown keys are rejected with kind
// "InvalidConfig".
TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig base = {});
nlohmann::json to_json(const TrainConfig& config);

struct LogRecord {
  std::int64_t step = 0;
  std::string split;  // "train" or "heldout"
  double nll_per_token = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

nlohmann::json to_json(const LogRecord& r);

using LogSink = std::function<void(const LogRecord&)>;

struct TrainResult {
  store::Checkpoint checkpoint;
  std::vector<LogRecord> log;
  std::int64_t steps = 0;
  int dropped_sequences = 0;
  // Mean per-token NLL of the last logged training window.
  double final_train_nll = 0.0;
};

// Learning rate at (0-based) optimizer step `step` of `total` planned steps.
double learning_rate(const TrainConfig& config, std::int64_t step, std::int64_t total);

// Encodes SMILES as BOS ... EOS id sequences. Throws data_error
// ("UnknownToken") when a token is missing from the vocabulary.
std::vector<std::vector<int>> encode_corpus(const std::vector<std::string>& smiles, const tok::Vocab& vocab);

// One optimization step per call: forward, masked NLL, backward, freezing
// condition row 0, clipping, Adam.
template <typename T>
class Trainer {
 public:
  Trainer(model::Transformer<T>& model, const TrainConfig& config, bool conditions_only = false);

  // Returns the batch's mean NLL per target token (before the update).
  double step(const store::Batch& batch, double lr);

  tensor::Adam<T>& optimizer() { return adam_; }
  // Norm of the gradient after clipping, from the last step.
  double last_clipped_norm() const { return last_norm_; }

 private:
  model::Transformer<T>& model_;
  TrainConfig config_;
  std::vector<tensor::Tensor<T>> trainable_;
  tensor::Adam<T> adam_;
  double last_norm_ = 0.0;
};

// Mean NLL per target token over the given sequences (no graph).
template <typename T>
double evaluate_nll(const model::Transformer<T>& model, const std::vector<std::vector<int>>& sequences,
                    const std::vector<int>& conditions, int batch_size);

// Unconditional pre-training: condition row 0 stays zero throughout.
// `heldout` may be empty.
TrainResult pretrain(const store::Corpus& train, const store::Corpus& heldout, const tok::Vocab& vocab,
                     const model::ModelConfig& model_config, const TrainConfig& config, const LogSink& sink = {});

// Adds one condition row per target not yet in `base` (rows drawn from
// Normal(0, 0.02)) and trains on <SMILES, target> pairs. Throws kind
// "ConfigMismatch" when the base conditions are not a prefix of
// {"none", targets...}.
TrainResult finetune(const store::Checkpoint& base, const store::Corpus& train, const store::Corpus& heldout,
                     const store::ConditionMap& conditions, const TrainConfig& config, const LogSink& sink = {});

extern template class Trainer<float>;
extern template class Trainer<double>;

}  // namespace mgforge::train
