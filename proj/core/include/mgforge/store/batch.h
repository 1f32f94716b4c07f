// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace mgforge::store {

// Teacher-forcing batch. For a sequence BOS t1..tN EOS the inputs are
// BOS t1..tN and the targets t1..tN EOS; rows are right-padded with PAD to the
// longest row, and mask is 0 on padding.
struct Batch {
  int batch = 0;
  int length = 0;
  std::vector<int> inputs;        // [batch, length]
  std::vector<int> targets;       // [batch, length]
  std::vector<std::uint8_t> mask; // [batch, length]
  std::vector<int> conditions;    // [batch]
  std::vector<std::size_t> rows;  // source index of every row
};

// Builds one batch from encoded sequences (each BOS ... EOS).
Batch make_batch(const std::vector<std::vector<int>>& sequences, const std::vector<int>& conditions,
                 const std::vector<std::size_t>& rows);

// Deterministic epoch iterator. Each epoch visits every kept sequence once in
// an order shuffled by Rng::stream(seed, epoch); sequences with
// length (tokens + BOS + EOS) above max_len are dropped up front.
class BatchIterator {
 public:
  // With `bucket`, each epoch's shuffled order is cut into pools of
  // kBucketPool batches, each pool is sorted by length before it is split
  // into batches, and the batch order is shuffled again. Rows of a batch then
  // have similar lengths, which cuts padding.
  BatchIterator(std::vector<std::vector<int>> sequences, std::vector<int> conditions, int batch_size, int max_len,
                std::uint64_t seed, bool shuffle = true, bool bucket = false);

  static constexpr std::size_t kBucketPool = 50;

  void start_epoch(int epoch);
  // False at the end of the epoch.
  bool next(Batch& out);

  int epoch() const { return epoch_; }
  int dropped() const { return dropped_; }
  std::size_t kept() const { return kept_.size(); }
  std::size_t batches_per_epoch() const;

 private:
  std::vector<std::vector<int>> sequences_;
  std::vector<int> conditions_;
  std::vector<std::size_t> kept_;
  std::vector<std::vector<std::size_t>> batches_;
  int batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
  bool bucket_;
  int epoch_ = -1;
  std::size_t cursor_ = 0;
  int dropped_ = 0;
};

}  // namespace mgforge::store
