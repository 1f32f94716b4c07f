// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/store/batch.h"

#include <algorithm>
#include <span>

#include "mgforge/common/error.h"
#include "mgforge/common/rng.h"
#include "mgforge/tokenizer/vocab.h"

namespace mgforge::store {

Batch make_batch(const std::vector<std::vector<int>>& sequences, const std::vector<int>& conditions,
                 const std::vector<std::size_t>& rows) {
  Batch b;
  b.batch = static_cast<int>(rows.size());
  for (std::size_t r : rows) {
    b.length = std::max(b.length, static_cast<int>(sequences[r].size()) - 1);
  }
  const std::size_t cells = static_cast<std::size_t>(b.batch) * b.length;
  b.inputs.assign(cells, tok::kPad);
  b.targets.assign(cells, tok::kPad);
  b.mask.assign(cells, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& seq = sequences[rows[i]];
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      const std::size_t at = i * b.length + t;
      b.inputs[at] = seq[t];
      b.targets[at] = seq[t + 1];
      b.mask[at] = 1;
    }
    b.conditions.push_back(conditions[rows[i]]);
  }
  b.rows = rows;
  return b;
}

BatchIterator::BatchIterator(std::vector<std::vector<int>> sequences, std::vector<int> conditions, int batch_size,
                             int max_len, std::uint64_t seed, bool shuffle, bool bucket)
    : sequences_(std::move(sequences)),
      conditions_(std::move(conditions)),
      batch_size_(batch_size),
      seed_(seed),
      shuffle_(shuffle),
      bucket_(bucket) {
  if (batch_size < 1) {
    throw Error(ErrorCategory::kUsage, "InvalidConfig", "batch_size must be at least 1");
  }
  if (conditions_.size() != sequences_.size()) {
    throw Error(ErrorCategory::kInternal, "ShapeMismatch", "one condition per sequence is required");
  }
  for (std::size_t i = 0; i < sequences_.size(); ++i) {
    if (static_cast<int>(sequences_[i].size()) > max_len || sequences_[i].size() < 2) {
      ++dropped_;
    } else {
      kept_.push_back(i);
    }
  }
}

void BatchIterator::start_epoch(int epoch) {
  epoch_ = epoch;
  cursor_ = 0;
  std::vector<std::size_t> order = kept_;
  Rng rng = Rng::stream(seed_, static_cast<std::uint64_t>(epoch));
  if (shuffle_) {
    mgforge::shuffle(std::span<std::size_t>(order), rng);
  }
  const auto bs = static_cast<std::size_t>(batch_size_);
  if (bucket_) {
    const std::size_t pool = bs * kBucketPool;
    for (std::size_t p = 0; p < order.size(); p += pool) {
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(p);
      const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), p + pool));
      std::stable_sort(first, last, [&](std::size_t a, std::size_t b) { return sequences_[a].size() < sequences_[b].size(); });
    }
  }
  batches_.clear();
  for (std::size_t p = 0; p < order.size(); p += bs) {
    batches_.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(p),
                          order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), p + bs)));
  }
  if (bucket_ && shuffle_) {
    mgforge::shuffle(std::span<std::vector<std::size_t>>(batches_), rng);
  }
}

bool BatchIterator::next(Batch& out) {
  if (epoch_ < 0) {
    start_epoch(0);
  }
  if (cursor_ >= batches_.size()) {
    return false;
  }
  out = make_batch(sequences_, conditions_, batches_[cursor_]);
  ++cursor_;
  return true;
}

std::size_t BatchIterator::batches_per_epoch() const {
  return (kept_.size() + static_cast<std::size_t>(batch_size_) - 1) / static_cast<std::size_t>(batch_size_);
}

}  // namespace mgforge::store
