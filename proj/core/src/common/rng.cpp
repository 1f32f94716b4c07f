// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/common/rng.h"

#include <cmath>
#include <numbers>

namespace mgforge {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(mix64(seed) ^ (index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL)));
}

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next()) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mgforge
