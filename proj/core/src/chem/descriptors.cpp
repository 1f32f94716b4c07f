// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/descriptors.h"

#include "mgforge/chem/element.h"
#include "mgforge/chem/sanitize.h"

namespace mgforge::chem {

namespace {

double weight_of(const MolGraph& m) {
  const double h = standard_weight(kHydrogen);
  double total = 0.0;
  for (const Atom& a : m.atoms()) {
    total += standard_weight(a.atomic_number) + h * a.total_h();
  }
  return total;
}

}  // namespace

double mol_weight(const MolGraph& mol) { return weight_of(sanitize(mol)); }

Descriptors simple_descriptors(const MolGraph& mol) {
  const MolGraph m = sanitize(mol);
  Descriptors d;
  d.mol_weight = weight_of(m);
  d.rings = m.ring_count();
  int aromatic = 0;
  int hetero = 0;
  for (const Atom& a : m.atoms()) {
    if (!a.is_heavy()) {
      continue;
    }
    ++d.heavy_atoms;
    aromatic += a.aromatic ? 1 : 0;
    hetero += a.atomic_number != kCarbon && a.atomic_number != kDummyAtom ? 1 : 0;
  }
  if (d.heavy_atoms > 0) {
    d.aromatic_fraction = static_cast<double>(aromatic) / d.heavy_atoms;
    d.hetero_fraction = static_cast<double>(hetero) / d.heavy_atoms;
  }
  return d;
}

std::array<double, 5> as_array(const Descriptors& d) {
  return {d.mol_weight, static_cast<double>(d.heavy_atoms), static_cast<double>(d.rings), d.aromatic_fraction,
          d.hetero_fraction};
}

}  // namespace mgforge::chem
