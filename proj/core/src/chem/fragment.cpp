// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/fragment.h"

#include <algorithm>

#include "mgforge/chem/canonical.h"
#include "mgforge/chem/element.h"
#include "mgforge/chem/sanitize.h"

namespace mgforge::chem {

namespace {

bool is_hetero(const Atom& a) { return a.atomic_number != kCarbon && a.atomic_number != kHydrogen; }

}  // namespace

bool is_cut_bond(const MolGraph& sanitized, int bond) {
  const Bond& b = sanitized.bond(bond);
  if (b.aromatic || b.order != BondOrder::kSingle || sanitized.bond_in_ring(bond)) {
    return false;
  }
  const Atom& x = sanitized.atom(b.begin);
  const Atom& y = sanitized.atom(b.end);
  if (!x.is_heavy() || !y.is_heavy()) {
    return false;
  }
  return sanitized.atom_in_ring(b.begin) || sanitized.atom_in_ring(b.end) || is_hetero(x) || is_hetero(y);
}

std::vector<std::string> fragment(const MolGraph& mol) {
  const MolGraph m = sanitize(mol);
  MolGraph cut;
  for (const Atom& a : m.atoms()) {
    cut.add_atom(a);
  }
  Atom dummy;
  dummy.atomic_number = kDummyAtom;
  dummy.implicit_h = 0;
  for (int bi = 0; bi < m.num_bonds(); ++bi) {
    const Bond& b = m.bond(bi);
    if (is_cut_bond(m, bi)) {
      cut.add_bond(b.begin, cut.add_atom(dummy), BondOrder::kSingle);
      cut.add_bond(b.end, cut.add_atom(dummy), BondOrder::kSingle);
    } else {
      const int nb = cut.add_bond(b.begin, b.end, b.order);
      cut.bond(nb).aromatic = b.aromatic;
    }
  }
  cut.update_ring_info();

  // One subgraph per connected component, atoms in original order.
  const std::vector<int>& comp = cut.component_of();
  std::vector<std::string> out;
  for (int c = 0; c < cut.num_components(); ++c) {
    MolGraph piece;
    std::vector<int> local(static_cast<std::size_t>(cut.num_atoms()), -1);
    for (int i = 0; i < cut.num_atoms(); ++i) {
      if (comp[static_cast<std::size_t>(i)] == c) {
        local[static_cast<std::size_t>(i)] = piece.add_atom(cut.atom(i));
      }
    }
    for (const Bond& b : cut.bonds()) {
      const int u = local[static_cast<std::size_t>(b.begin)];
      if (u >= 0) {
        const int nb = piece.add_bond(u, local[static_cast<std::size_t>(b.end)], b.order);
        piece.bond(nb).aromatic = b.aromatic;
      }
    }
    piece.update_ring_info();
    out.push_back(canonicalize(piece));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mgforge::chem
