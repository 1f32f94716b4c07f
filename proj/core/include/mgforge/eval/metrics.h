// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mgforge/chem/fingerprint.h"
#include "mgforge/chem/mol_graph.h"

namespace mgforge::eval {

// Canonical SMILES when `smiles` parses and validates, nullopt otherwise.
std::optional<std::string> canonical_or_null(std::string_view smiles);

struct ValidityResult {
  double fraction = 0.0;
  // Canonical text of each valid input, in input order.
  std::vector<std::string> canonical;
  std::vector<std::size_t> valid_indices;
};

// Empty input gives fraction 0.
ValidityResult validity(std::span<const std::string> generated, int threads = 1);

// Distinct strings among the first k, over min(k, size). Inputs are expected
// to be canonical already. 0 for an empty list.
double unique_at(std::span<const std::string> valid_canonical, std::size_t k);

// Fraction of distinct inputs absent from `train`; 0 for an empty list.
double novelty(std::span<const std::string> valid_canonical, const std::unordered_set<std::string>& train);

// Mean over `generated` of the best Tanimoto similarity against `reference`.
// Throws data_error "EmptyReference" (empty reference) or "EmptyInput".
double snn(std::span<const chem::Fingerprint> generated, std::span<const chem::Fingerprint> reference, int threads = 1);

using FragmentCounts = std::map<std::string, std::int64_t>;

FragmentCounts fragment_counts(std::span<const chem::MolGraph> mols);
// Cosine of two count vectors over the union dictionary; 0 if either is
// all-zero.
double cosine(const FragmentCounts& a, const FragmentCounts& b);
// Throws data_error "EmptyInput" when either set is empty.
double frag_similarity(std::span<const chem::MolGraph> generated, std::span<const chem::MolGraph> reference);

// Exact 1-D Wasserstein-1 distance between two empirical distributions:
// the integral over u in [0,1] of |Qa(u) - Qb(u)| with Q the empirical
// quantile functions, evaluated on the merged grid {i/n} U {j/m}. Throws
// data_error "EmptyInput".
double wasserstein1(std::span<const double> a, std::span<const double> b);

// Runs fn(i) for i in [0, n) on up to `threads` threads with a static block
// partition. Exceptions are rethrown (lowest block first).
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn);

}  // namespace mgforge::eval

#include "mgforge/eval/parallel.inl"
