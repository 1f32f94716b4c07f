// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mgforge/chem/mol_graph.h"

namespace mgforge::chem {

// True for the bonds fragment() cuts: single, non-aromatic, outside every
// ring, both ends heavy, and at least one end in a ring or not carbon.
bool is_cut_bond(const MolGraph& sanitized, int bond);

// Breaks every cut bond, caps each broken end with a '*' attachment atom
// (hydrogen counts of the original atoms are kept) and returns the canonical
// SMILES of every resulting piece, sorted. This is a simplified stand-in for
// retrosynthetic fragmentation, not BRICS.
// Throws ChemError("InvalidInput") for invalid molecules.
std::vector<std::string> fragment(const MolGraph& mol);

}  // namespace mgforge::chem
