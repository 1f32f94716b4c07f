// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string_view>

#include "mgforge/chem/mol_graph.h"

namespace mgforge::chem {

// Sum of standard atomic weights over all atoms and their hydrogens, in g/mol.
// Isotope labels are ignored. Throws ChemError("InvalidInput").
double mol_weight(const MolGraph& mol);

struct Descriptors {
  double mol_weight = 0.0;
  int heavy_atoms = 0;
  // Cycle rank (|E| - |V| + components).
  int rings = 0;
  // Fractions over heavy atoms; 0 for a molecule without heavy atoms.
  double aromatic_fraction = 0.0;
  double hetero_fraction = 0.0;
};

inline constexpr std::array<std::string_view, 5> kDescriptorNames = {
    "mw", "heavy_atoms", "rings", "aromatic_fraction", "hetero_fraction"};

// Throws ChemError("InvalidInput").
Descriptors simple_descriptors(const MolGraph& mol);

// Values in kDescriptorNames order.
std::array<double, 5> as_array(const Descriptors& d);

}  // namespace mgforge::chem
