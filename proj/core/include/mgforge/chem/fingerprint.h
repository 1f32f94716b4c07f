// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgforge/chem/mol_graph.h"

namespace mgforge::chem {

class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(int width, int radius);

  int width() const { return width_; }
  int radius() const { return radius_; }
  bool test(int bit) const;
  void set(int bit);
  int popcount() const;
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<int> on_bits() const;

  // Lowercase hex, most-significant byte first. Bit i lives in byte i / 8 at
  // position i % 8, so bit 0 is the low bit of the last byte printed.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, int radius);

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  int width_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

// 64-bit FNV-1a: offset basis 0xcbf29ce484222325, prime 0x100000001b3.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

// Circular fingerprint. Every identifier is serialized as little-endian
// fields and hashed with fnv1a64:
//   round 0:  six int32 (atomic number, degree, formal charge, total H,
//             ring flag, aromatic flag)
//   round r:  int32 r, uint64 previous id, then for each neighbor sorted by
//             (bond code, neighbor id): int32 bond code, uint64 neighbor id
// with bond code 1/2/3 for single/double/triple and 4 for aromatic. Every
// identifier of rounds 0..radius sets bit (id mod width).
// Throws ChemError("InvalidInput") for invalid molecules, or for a width that
// is not a power of two or a negative radius.
Fingerprint fingerprint(const MolGraph& mol, int radius = 2, int width = 1024);

// |a AND b| / |a OR b|, 1.0 when both are empty. Throws
// ChemError("WidthMismatch").
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace mgforge::chem
