// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "mgforge/chem/mol_graph.h"

namespace mgforge::chem {

// Canonical SMILES. Atoms are ranked by iterated neighborhood refinement of
// (degree, element, isotope, aromatic, charge, H count, ring flag); remaining
// ties are individualized one candidate at a time and the lexicographically
// smallest emitted string wins. Stereo annotations are dropped.
// Throws ChemError("InvalidInput") when validate() fails.
std::string canonicalize(const MolGraph& mol);

// Canonical atom order of a sanitized graph: ranks[i] is the position of atom
// i, all distinct.
std::vector<int> canonical_ranks(const MolGraph& sanitized);

// Equitable partition reached by refinement alone (no tie breaking). Two
// isomorphic graphs yield the same multiset of (class, invariant) pairs.
std::vector<int> refine_classes(const MolGraph& sanitized);

// Writes a SMILES string for a sanitized graph, starting each component at
// its lowest-ranked atom and visiting neighbors in rank order. `rank` must be
// a permutation of 0..n-1. Used with canonical ranks for canonical output and
// with random ranks for alternative renderings.
std::string write_smiles(const MolGraph& sanitized, std::span<const int> rank);

}  // namespace mgforge::chem
