// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/fingerprint.h"

#include <algorithm>
#include <bit>
#include <utility>

#include "mgforge/chem/sanitize.h"

namespace mgforge::chem {

Fingerprint::Fingerprint(int width, int radius)
    : width_(width), radius_(radius), words_(static_cast<std::size_t>((width + 63) / 64), 0) {}

bool Fingerprint::test(int bit) const {
  return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1U;
}

void Fingerprint::set(int bit) { words_[static_cast<std::size_t>(bit / 64)] |= std::uint64_t{1} << (bit % 64); }

int Fingerprint::popcount() const {
  int total = 0;
  for (std::uint64_t w : words_) {
    total += std::popcount(w);
  }
  return total;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < width_; ++i) {
    if (test(i)) {
      bits.push_back(i);
    }
  }
  return bits;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const int bytes = (width_ + 7) / 8;
  std::string out;
  out.reserve(static_cast<std::size_t>(bytes) * 2);
  for (int b = bytes - 1; b >= 0; --b) {
    const auto byte = static_cast<unsigned>((words_[static_cast<std::size_t>(b / 8)] >> ((b % 8) * 8)) & 0xffU);
    out += kDigits[byte >> 4];
    out += kDigits[byte & 0xfU];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, int radius) {
  if (hex.size() % 2 != 0) {
    throw ChemError("InvalidInput", "fingerprint hex must have an even length");
  }
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') {
      return static_cast<unsigned>(c - '0');
    }
    if (c >= 'a' && c <= 'f') {
      return static_cast<unsigned>(c - 'a' + 10);
    }
    throw ChemError("InvalidInput", "fingerprint hex must be lowercase hexadecimal");
  };
  const int bytes = static_cast<int>(hex.size() / 2);
  Fingerprint fp(bytes * 8, radius);
  for (int b = 0; b < bytes; ++b) {
    const std::size_t at = static_cast<std::size_t>(bytes - 1 - b) * 2;
    const std::uint64_t byte = (nibble(hex[at]) << 4) | nibble(hex[at + 1]);
    fp.words_[static_cast<std::size_t>(b / 8)] |= byte << ((b % 8) * 8);
  }
  return fp;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void put32(std::vector<std::uint8_t>& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) {
    out.push_back(static_cast<std::uint8_t>(u >> (8 * k)));
  }
}

void put64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
}

}  // namespace

Fingerprint fingerprint(const MolGraph& mol, int radius, int width) {
  if (radius < 0 || width <= 0 || !std::has_single_bit(static_cast<unsigned>(width))) {
    throw ChemError("InvalidInput", "fingerprint needs radius >= 0 and a power-of-two width");
  }
  const MolGraph m = sanitize(mol);
  const int n = m.num_atoms();
  Fingerprint fp(width, radius);
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> buf;
  for (int i = 0; i < n; ++i) {
    const Atom& a = m.atom(i);
    buf.clear();
    put32(buf, a.atomic_number);
    put32(buf, m.degree(i));
    put32(buf, a.formal_charge);
    put32(buf, a.total_h());
    put32(buf, m.atom_in_ring(i) ? 1 : 0);
    put32(buf, a.aromatic ? 1 : 0);
    ids[static_cast<std::size_t>(i)] = fnv1a64(buf);
    fp.set(static_cast<int>(ids[static_cast<std::size_t>(i)] % static_cast<std::uint64_t>(width)));
  }
  for (int round = 1; round <= radius; ++round) {
    std::vector<std::uint64_t> next(ids.size());
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<std::int32_t, std::uint64_t>> nbrs;
      for (int bi : m.bonds_of(i)) {
        const Bond& b = m.bond(bi);
        nbrs.emplace_back(b.aromatic ? 4 : static_cast<std::int32_t>(b.order),
                          ids[static_cast<std::size_t>(b.other(i))]);
      }
      std::sort(nbrs.begin(), nbrs.end());
      buf.clear();
      put32(buf, round);
      put64(buf, ids[static_cast<std::size_t>(i)]);
      for (const auto& [code, id] : nbrs) {
        put32(buf, code);
        put64(buf, id);
      }
      next[static_cast<std::size_t>(i)] = fnv1a64(buf);
      fp.set(static_cast<int>(next[static_cast<std::size_t>(i)] % static_cast<std::uint64_t>(width)));
    }
    ids = std::move(next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width()) {
    throw ChemError("WidthMismatch", "fingerprint widths differ: " + std::to_string(a.width()) + " vs " +
                                         std::to_string(b.width()));
  }
  int both = 0;
  int either = 0;
  for (std::size_t k = 0; k < a.words().size(); ++k) {
    both += std::popcount(a.words()[k] & b.words()[k]);
    either += std::popcount(a.words()[k] | b.words()[k]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace mgforge::chem
