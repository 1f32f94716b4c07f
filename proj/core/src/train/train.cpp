// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/train/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mgforge/common/error.h"
#include "mgforge/tensor/ops.h"

namespace mgforge::train {

namespace {

Error invalid(const std::string& what) { return Error(ErrorCategory::kUsage, "InvalidConfig", what); }

// Stream index reserved for parameter initialization.
constexpr std::uint64_t kInitStream = 0xC0FFEEULL;

struct Encoded {
  std::vector<std::vector<int>> sequences;
  std::vector<int> conditions;
};

Encoded encode(const store::Corpus& corpus, const tok::Vocab& vocab) {
  Encoded e;
  e.sequences = encode_corpus(corpus.smiles(), vocab);
  for (const auto& entry : corpus.entries) {
    e.conditions.push_back(entry.condition);
  }
  return e;
}

Encoded cap(const Encoded& e, int max_sequences, int max_len) {
  Encoded out;
  for (std::size_t i = 0; i < e.sequences.size(); ++i) {
    if (max_sequences > 0 && static_cast<int>(out.sequences.size()) >= max_sequences) {
      break;
    }
    if (static_cast<int>(e.sequences[i].size()) <= max_len) {
      out.sequences.push_back(e.sequences[i]);
      out.conditions.push_back(e.conditions[i]);
    }
  }
  return out;
}

struct LoopOutcome {
  std::vector<LogRecord> log;
  std::int64_t steps = 0;
  int dropped = 0;
  double final_train_nll = 0.0;
  store::OptimizerState optimizer;
};

template <typename T>
LoopOutcome run_loop(model::Transformer<T>& model, const Encoded& train, const Encoded& heldout,
                     const TrainConfig& config, bool conditions_only, const LogSink& sink, std::int64_t step_offset,
                     std::chrono::steady_clock::time_point started) {
  LoopOutcome out;
  store::BatchIterator batches(train.sequences, train.conditions, config.batch_size, model.config().max_len,
                               config.seed, true, config.length_bucketing);
  out.dropped = batches.dropped();
  if (batches.kept() == 0) {
    throw data_error("EmptyCorpus", "no training sequence fits max_len " + std::to_string(model.config().max_len));
  }
  const Encoded held = cap(heldout, config.eval_max_sequences, model.config().max_len);
  std::int64_t planned = static_cast<std::int64_t>(batches.batches_per_epoch()) * config.epochs;
  if (config.max_steps > 0) {
    planned = std::min(planned, config.max_steps);
  }
  Trainer<T> trainer(model, config, conditions_only);
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  };
  auto emit = [&](LogRecord r) {
    out.log.push_back(r);
    if (sink) {
      sink(r);
    }
  };
  double window_nll = 0.0;
  double window_tokens = 0.0;
  double lr = 0.0;
  auto flush_train = [&] {
    if (window_tokens > 0) {
      out.final_train_nll = window_nll / window_tokens;
      emit({step_offset + out.steps, "train", out.final_train_nll, lr, elapsed_ms()});
      window_nll = 0.0;
      window_tokens = 0.0;
    }
  };
  auto eval_heldout = [&] {
    if (!held.sequences.empty()) {
      emit({step_offset + out.steps, "heldout",
            evaluate_nll(model, held.sequences, held.conditions, std::max(config.batch_size, 32)), lr, elapsed_ms()});
    }
  };
  bool stop = false;
  store::Batch batch;
  for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    batches.start_epoch(epoch);
    while (batches.next(batch)) {
      if ((config.max_steps > 0 && out.steps >= config.max_steps) ||
          (config.max_minutes > 0 && elapsed_ms() >= config.max_minutes * 60000.0)) {
        stop = true;
        break;
      }
      lr = learning_rate(config, out.steps, planned);
      const double nll = trainer.step(batch, lr);
      double tokens = 0;
      for (auto m : batch.mask) {
        tokens += m;
      }
      window_nll += nll * tokens;
      window_tokens += tokens;
      ++out.steps;
      if (config.eval_every > 0 && out.steps % config.eval_every == 0) {
        flush_train();
        eval_heldout();
      }
    }
  }
  flush_train();
  if (config.eval_every <= 0 || out.steps % config.eval_every != 0) {
    eval_heldout();
  }
  auto& adam = trainer.optimizer();
  out.optimizer.step = adam.steps();
  // Moments for every parameter in checkpoint order; untrained ones stay 0.
  auto params = model.parameters();
  for (const auto& p : params) {
    std::vector<float> m(p.tensor->numel(), 0.0f);
    std::vector<float> v(p.tensor->numel(), 0.0f);
    for (std::size_t k = 0; k < adam.params().size(); ++k) {
      if (adam.params()[k].node() == p.tensor->node()) {
        std::transform(adam.first_moments()[k].begin(), adam.first_moments()[k].end(), m.begin(),
                       [](T x) { return static_cast<float>(x); });
        std::transform(adam.second_moments()[k].begin(), adam.second_moments()[k].end(), v.begin(),
                       [](T x) { return static_cast<float>(x); });
      }
    }
    out.optimizer.m.push_back(std::move(m));
    out.optimizer.v.push_back(std::move(v));
  }
  return out;
}

template <typename T>
std::shared_ptr<model::Transformer<float>> to_float(const model::Transformer<T>& m) {
  return std::make_shared<model::Transformer<float>>(m.template cast<float>());
}

template <typename T>
TrainResult pretrain_as(const store::Corpus& train, const store::Corpus& heldout, const tok::Vocab& vocab,
                        const model::ModelConfig& model_config, const TrainConfig& config, const LogSink& sink) {
  const auto started = std::chrono::steady_clock::now();
  for (const auto& e : train.entries) {
    if (e.condition != 0) {
      throw data_error("InvalidCorpus", "pre-training corpus must be unconditional (condition 0)");
    }
  }
  model::ModelConfig mc = model_config;
  mc.vocab_size = vocab.size();
  mc.n_conditions = 1;
  Rng init = Rng::stream(config.seed, kInitStream);
  model::Transformer<T> model(mc, init);
  LoopOutcome loop = run_loop(model, encode(train, vocab), encode(heldout, vocab), config, false, sink, 0, started);
  TrainResult result;
  result.checkpoint.model = to_float(model);
  result.checkpoint.vocab = vocab;
  result.checkpoint.seed = config.seed;
  result.checkpoint.optimizer = std::move(loop.optimizer);
  result.checkpoint.effective_config = {{"phase", "pretrain"}, {"train", to_json(config)}};
  result.log = std::move(loop.log);
  result.steps = loop.steps;
  result.dropped_sequences = loop.dropped;
  result.final_train_nll = loop.final_train_nll;
  return result;
}

template <typename T>
TrainResult finetune_as(const store::Checkpoint& base, const store::Corpus& train, const store::Corpus& heldout,
                        const store::ConditionMap& conditions, const TrainConfig& config, const LogSink& sink) {
  const auto started = std::chrono::steady_clock::now();
  const auto& names = conditions.names();
  if (base.conditions.size() > names.size() || !std::equal(base.conditions.begin(), base.conditions.end(), names.begin())) {
    throw Error(ErrorCategory::kModel, "ConfigMismatch",
                "base checkpoint conditions are not a prefix of none," + [&] {
                  std::string s;
                  for (std::size_t i = 1; i < names.size(); ++i) {
                    s += (i > 1 ? "," : "") + names[i];
                  }
                  return s;
                }());
  }
  for (const auto& e : train.entries) {
    if (e.condition < 1 || e.condition >= conditions.size()) {
      throw data_error("InvalidCorpus", "fine-tuning entries need a target condition, got " +
                                            std::to_string(e.condition));
    }
  }
  model::Transformer<T> model = base.model->template cast<T>();
  Rng init = Rng::stream(config.seed, kInitStream);
  model.expand_conditions(conditions.size(), init);
  const bool cond_only = config.finetune_scope == FinetuneScope::kConditionEmbeddingsOnly;
  const Encoded all_train = encode(train, base.vocab);
  const Encoded all_held = encode(heldout, base.vocab);

  TrainResult result;
  result.checkpoint.vocab = base.vocab;
  LoopOutcome loop;
  if (!config.sequential_targets) {
    loop = run_loop(model, all_train, all_held, config, cond_only, sink, 0, started);
    result.log = loop.log;
    result.steps = loop.steps;
    result.dropped_sequences = loop.dropped;
  } else {
    for (int target = 1; target < conditions.size(); ++target) {
      auto subset = [&](const Encoded& e) {
        Encoded s;
        for (std::size_t i = 0; i < e.sequences.size(); ++i) {
          if (e.conditions[i] == target) {
            s.sequences.push_back(e.sequences[i]);
            s.conditions.push_back(target);
          }
        }
        return s;
      };
      const Encoded part = subset(all_train);
      if (part.sequences.empty()) {
        continue;
      }
      loop = run_loop(model, part, subset(all_held), config, cond_only, sink, result.steps, started);
      result.log.insert(result.log.end(), loop.log.begin(), loop.log.end());
      result.steps += loop.steps;
      result.dropped_sequences += loop.dropped;
    }
  }
  result.final_train_nll = loop.final_train_nll;
  result.checkpoint.model = to_float(model);
  result.checkpoint.conditions = names;
  result.checkpoint.seed = config.seed;
  result.checkpoint.optimizer = std::move(loop.optimizer);
  result.checkpoint.effective_config = {
      {"phase", "finetune"}, {"train", to_json(config)}, {"base", base.effective_config}};
  return result;
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig c) {
  if (!doc.is_object()) {
    throw invalid("train config must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "epochs") {
        c.epochs = value.get<int>();
      } else if (key == "max_steps") {
        c.max_steps = value.get<std::int64_t>();
      } else if (key == "max_minutes") {
        c.max_minutes = value.get<double>();
      } else if (key == "batch_size") {
        c.batch_size = value.get<int>();
      } else if (key == "length_bucketing") {
        c.length_bucketing = value.get<bool>();
      } else if (key == "lr") {
        c.lr = value.get<double>();
      } else if (key == "lr_schedule") {
        const auto s = value.get<std::string>();
        if (s == "constant") {
          c.lr_schedule = LrSchedule::kConstant;
        } else if (s == "warmup_linear") {
          c.lr_schedule = LrSchedule::kWarmupLinear;
        } else {
          throw invalid("lr_schedule must be constant or warmup_linear, got '" + s + "'");
        }
      } else if (key == "warmup_steps") {
        c.warmup_steps = value.get<int>();
      } else if (key == "min_lr_ratio") {
        c.min_lr_ratio = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "grad_clip_norm") {
        c.grad_clip_norm = value.get<double>();
      } else if (key == "eval_every") {
        c.eval_every = value.get<int>();
      } else if (key == "eval_max_sequences") {
        c.eval_max_sequences = value.get<int>();
      } else if (key == "precision") {
        c.precision = model::precision_from_string(value.get<std::string>());
      } else if (key == "finetune_scope") {
        const auto s = value.get<std::string>();
        if (s == "all") {
          c.finetune_scope = FinetuneScope::kAllWeights;
        } else if (s == "conditions") {
          c.finetune_scope = FinetuneScope::kConditionEmbeddingsOnly;
        } else {
          throw invalid("finetune_scope must be all or conditions, got '" + s + "'");
        }
      } else if (key == "sequential_targets") {
        c.sequential_targets = value.get<bool>();
      } else {
        throw invalid("unknown train config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw invalid("train config key '" + key + "' has the wrong type");
    }
  }
  if (c.lr <= 0 || c.epochs < 1) {
    throw invalid("lr must be > 0 and epochs >= 1");
  }
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"max_steps", c.max_steps},
          {"max_minutes", c.max_minutes},
          {"batch_size", c.batch_size},
          {"length_bucketing", c.length_bucketing},
          {"lr", c.lr},
          {"lr_schedule", c.lr_schedule == LrSchedule::kConstant ? "constant" : "warmup_linear"},
          {"warmup_steps", c.warmup_steps},
          {"min_lr_ratio", c.min_lr_ratio},
          {"seed", c.seed},
          {"grad_clip_norm", c.grad_clip_norm},
          {"eval_every", c.eval_every},
          {"eval_max_sequences", c.eval_max_sequences},
          {"precision", model::to_string(c.precision)},
          {"finetune_scope", c.finetune_scope == FinetuneScope::kAllWeights ? "all" : "conditions"},
          {"sequential_targets", c.sequential_targets}};
}

nlohmann::json to_json(const LogRecord& r) {
  return {{"step", r.step}, {"split", r.split}, {"nll_per_token", r.nll_per_token}, {"lr", r.lr}, {"wall_ms", r.wall_ms}};
}

double learning_rate(const TrainConfig& c, std::int64_t step, std::int64_t total) {
  if (c.lr_schedule == LrSchedule::kConstant) {
    return c.lr;
  }
  if (step < c.warmup_steps) {
    return c.lr * static_cast<double>(step + 1) / c.warmup_steps;
  }
  const double span = static_cast<double>(std::max<std::int64_t>(1, total - c.warmup_steps));
  const double frac = std::clamp(static_cast<double>(step - c.warmup_steps) / span, 0.0, 1.0);
  return c.lr * (1.0 - (1.0 - c.min_lr_ratio) * frac);
}

std::vector<std::vector<int>> encode_corpus(const std::vector<std::string>& smiles, const tok::Vocab& vocab) {
  std::vector<std::vector<int>> out;
  out.reserve(smiles.size());
  for (const auto& s : smiles) {
    tok::TokenSeq seq = tok::encode(s, vocab);
    if (tok::count_unknown(seq.ids) > 0) {
      throw data_error("UnknownToken", "'" + s + "' contains tokens missing from the vocabulary");
    }
    out.push_back(std::move(seq.ids));
  }
  return out;
}

template <typename T>
Trainer<T>::Trainer(model::Transformer<T>& model, const TrainConfig& config, bool conditions_only)
    : model_(model),
      config_(config),
      trainable_(conditions_only ? std::vector<tensor::Tensor<T>>{model.condition_table()} : model.parameter_tensors()),
      adam_(trainable_, tensor::AdamConfig{.lr = config.lr}) {}

template <typename T>
double Trainer<T>::step(const store::Batch& batch, double lr) {
  model_.zero_grad();
  const tensor::Tensor<T> logits = model_.forward(batch.inputs, batch.batch, batch.length, batch.conditions);
  const std::vector<T> weights(batch.mask.begin(), batch.mask.end());
  tensor::Tensor<T> loss = tensor::cross_entropy(
      tensor::reshape(logits, {batch.batch * batch.length, model_.config().vocab_size}),
      std::span<const int>(batch.targets), std::span<const T>(weights));
  loss.backward();
  model_.freeze_null_condition_grad();
  if (config_.grad_clip_norm > 0) {
    tensor::clip_grad_norm(trainable_, config_.grad_clip_norm);
  }
  last_norm_ = tensor::grad_norm(trainable_);
  adam_.step(lr);
  return static_cast<double>(loss.item());
}

template <typename T>
double evaluate_nll(const model::Transformer<T>& model, const std::vector<std::vector<int>>& sequences,
                    const std::vector<int>& conditions, int batch_size) {
  tensor::NoGradGuard no_grad;
  double total = 0.0;
  double tokens = 0.0;
  for (std::size_t start = 0; start < sequences.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> rows;
    for (std::size_t i = start; i < std::min(sequences.size(), start + static_cast<std::size_t>(batch_size)); ++i) {
      rows.push_back(i);
    }
    const store::Batch b = store::make_batch(sequences, conditions, rows);
    const auto logits = model.forward(b.inputs, b.batch, b.length, b.conditions);
    const auto nll = model::token_nll(logits, b.targets);
    for (std::size_t k = 0; k < nll.size(); ++k) {
      if (b.mask[k]) {
        total += nll[k];
        tokens += 1.0;
      }
    }
  }
  return tokens > 0 ? total / tokens : 0.0;
}

TrainResult pretrain(const store::Corpus& train, const store::Corpus& heldout, const tok::Vocab& vocab,
                     const model::ModelConfig& model_config, const TrainConfig& config, const LogSink& sink) {
  if (config.precision == model::Precision::kFloat64) {
    return pretrain_as<double>(train, heldout, vocab, model_config, config, sink);
  }
  return pretrain_as<float>(train, heldout, vocab, model_config, config, sink);
}

TrainResult finetune(const store::Checkpoint& base, const store::Corpus& train, const store::Corpus& heldout,
                     const store::ConditionMap& conditions, const TrainConfig& config, const LogSink& sink) {
  if (config.precision == model::Precision::kFloat64) {
    return finetune_as<double>(base, train, heldout, conditions, config, sink);
  }
  return finetune_as<float>(base, train, heldout, conditions, config, sink);
}

template class Trainer<float>;
template class Trainer<double>;
template double evaluate_nll<float>(const model::Transformer<float>&, const std::vector<std::vector<int>>&,
                                    const std::vector<int>&, int);
template double evaluate_nll<double>(const model::Transformer<double>&, const std::vector<std::vector<int>>&,
                                     const std::vector<int>&, int);

}  // namespace mgforge::train
