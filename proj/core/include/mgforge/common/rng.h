// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <utility>

namespace mgforge {

// SplitMix64 (Steele, Lea & Flood 2014). The whole generator is one 64-bit
// word of state:
//
//   state += 0x9e3779b97f4a7c15
//   z = state
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   return z ^ (z >> 31)
//
// Derived draws are defined here rather than through <random> so that every
// stream is bit-reproducible across standard libraries:
//   uniform()   = (next() >> 11) * 2^-53, in [0, 1)
//   below(n)    = high 64 bits of next() * n (128-bit product)
//   normal()    = Box-Muller cosine branch on two uniforms; u1 is replaced by
//                 1 - u1 so the logarithm never sees zero.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for item `index` of a run seeded with `seed`. Used to
  // give every sample/epoch its own generator so results do not depend on
  // scheduling.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next();
  double uniform();
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// The SplitMix64 output function applied to a single word.
std::uint64_t mix64(std::uint64_t x);

// Fisher-Yates, drawing j = below(i + 1) for i from n-1 down to 1.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace mgforge
