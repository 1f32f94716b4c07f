// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/sample/sample.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "mgforge/common/rng.h"
#include "mgforge/model/decoder.h"
#include "mgforge/tensor/ops.h"

namespace mgforge::sample {

namespace {

constexpr int kChunk = 64;

int pick(std::span<const float> logits, const SampleConfig& config, Rng& rng, std::vector<double>& work) {
  const int v = static_cast<int>(logits.size());
  auto allowed = [](int id) { return id != tok::kBos && id != tok::kPad && id != tok::kUnk; };
  if (config.temperature <= 0.0) {
    int best = -1;
    for (int i = 0; i < v; ++i) {
      if (allowed(i) && (best < 0 || logits[static_cast<std::size_t>(i)] > logits[static_cast<std::size_t>(best)])) {
        best = i;
      }
    }
    return best;
  }
  work.assign(static_cast<std::size_t>(v), -std::numeric_limits<double>::infinity());
  for (int i = 0; i < v; ++i) {
    if (allowed(i)) {
      work[static_cast<std::size_t>(i)] = static_cast<double>(logits[static_cast<std::size_t>(i)]) / config.temperature;
    }
  }
  if (config.top_k > 0 && config.top_k < v) {
    std::vector<int> order(static_cast<std::size_t>(v));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return work[static_cast<std::size_t>(a)] > work[static_cast<std::size_t>(b)]; });
    for (std::size_t r = static_cast<std::size_t>(config.top_k); r < order.size(); ++r) {
      work[static_cast<std::size_t>(order[r])] = -std::numeric_limits<double>::infinity();
    }
  }
  const double mx = *std::max_element(work.begin(), work.end());
  double total = 0.0;
  for (double& w : work) {
    w = std::exp(w - mx);
    total += w;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < v; ++i) {
    const double w = work[static_cast<std::size_t>(i)];
    if (w <= 0.0) {
      continue;
    }
    acc += w;
    last = i;
    if (u < acc) {
      return i;
    }
  }
  return last;
}

// Draws samples [first, first + count).
std::vector<Sample> run_chunk(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition,
                              const SampleConfig& config, std::size_t first, int count) {
  const int limit = config.max_len > 0 ? std::min(config.max_len, model.config().max_len) : model.config().max_len;
  std::vector<int> conds(static_cast<std::size_t>(count), condition);
  model::IncrementalDecoder<float> decoder(model, conds);
  std::vector<Rng> rngs;
  for (int s = 0; s < count; ++s) {
    rngs.push_back(Rng::stream(config.seed, first + static_cast<std::size_t>(s)));
  }
  std::vector<std::vector<int>> seqs(static_cast<std::size_t>(count), std::vector<int>{tok::kBos});
  std::vector<char> done(static_cast<std::size_t>(count), 0);
  std::vector<int> feed(static_cast<std::size_t>(count), tok::kBos);
  std::vector<double> work;
  const int v = model.config().vocab_size;
  int remaining = count;
  for (int t = 0; t < limit && remaining > 0; ++t) {
    const std::span<const float> logits = decoder.step(feed);
    for (int s = 0; s < count; ++s) {
      const auto su = static_cast<std::size_t>(s);
      if (done[su]) {
        continue;
      }
      int next;
      if (static_cast<std::size_t>(t) < config.prefix.size()) {
        next = config.prefix[static_cast<std::size_t>(t)];
      } else {
        next = pick(logits.subspan(su * static_cast<std::size_t>(v), static_cast<std::size_t>(v)), config, rngs[su], work);
      }
      seqs[su].push_back(next);
      feed[su] = next;
      if (next == tok::kEos) {
        done[su] = 1;
        --remaining;
      }
    }
  }
  std::vector<Sample> out;
  for (int s = 0; s < count; ++s) {
    const auto su = static_cast<std::size_t>(s);
    Sample smp;
    smp.index = first + su;
    smp.condition = condition;
    smp.truncated = !done[su];
    smp.smiles = tok::decode(seqs[su], vocab);
    smp.nll = score_ids(model, seqs[su], condition);
    out.push_back(std::move(smp));
  }
  return out;
}

}  // namespace

double score_ids(const model::Transformer<float>& model, const std::vector<int>& ids, int condition) {
  if (ids.size() < 2) {
    return 0.0;
  }
  tensor::NoGradGuard no_grad;
  const int len = static_cast<int>(ids.size()) - 1;
  const std::vector<int> inputs(ids.begin(), ids.end() - 1);
  const std::vector<int> targets(ids.begin() + 1, ids.end());
  const std::vector<int> conds{condition};
  const auto logits = model.forward(inputs, 1, len, conds);
  const auto nll = model::token_nll(logits, targets);
  return std::accumulate(nll.begin(), nll.end(), 0.0);
}

double score(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition, const std::string& smiles) {
  const tok::TokenSeq seq = tok::encode(smiles, vocab);
  if (tok::count_unknown(seq.ids) > 0) {
    throw data_error("UnknownToken", "'" + smiles + "' contains tokens missing from the vocabulary");
  }
  return score_ids(model, seq.ids, condition);
}

void generate_stream(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition,
                     const SampleConfig& config, const SampleSink& sink) {
  if (config.n < 1 || config.temperature < 0.0 || config.top_k < 0 || config.threads < 1) {
    throw Error(ErrorCategory::kUsage, "InvalidConfig", "need n >= 1, temperature >= 0, top_k >= 0, threads >= 1");
  }
  if (condition < 0 || condition >= model.config().n_conditions) {
    throw Error(ErrorCategory::kModel, "UnknownCondition",
                "condition id " + std::to_string(condition) + " outside [0, " +
                    std::to_string(model.config().n_conditions) + ")");
  }
  for (int id : config.prefix) {
    if (id < tok::kNumReserved || id >= vocab.size()) {
      throw Error(ErrorCategory::kUsage, "InvalidConfig", "prefix ids must be ordinary vocabulary tokens");
    }
  }
  const std::size_t total = static_cast<std::size_t>(config.n);
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  const std::size_t workers = static_cast<std::size_t>(config.threads);
  for (std::size_t round = 0; round < chunks; round += workers) {
    const std::size_t here = std::min(workers, chunks - round);
    std::vector<std::vector<Sample>> results(here);
    auto job = [&](std::size_t k) {
      const std::size_t first = (round + k) * kChunk;
      const int count = static_cast<int>(std::min<std::size_t>(kChunk, total - first));
      results[k] = run_chunk(model, vocab, condition, config, first, count);
    };
    if (here == 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(here);
      for (std::size_t k = 0; k < here; ++k) {
        pool.emplace_back([&, k] {
          try {
            job(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) {
        th.join();
      }
      for (auto& e : errors) {
        if (e) {
          std::rethrow_exception(e);
        }
      }
    }
    for (const auto& chunk : results) {
      for (const auto& s : chunk) {
        sink(s);
      }
    }
  }
}

std::vector<Sample> generate(const model::Transformer<float>& model, const tok::Vocab& vocab, int condition,
                             const SampleConfig& config) {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(config.n));
  generate_stream(model, vocab, condition, config, [&](const Sample& s) { out.push_back(s); });
  return out;
}

}  // namespace mgforge::sample
