// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/mol_graph.h"

#include <algorithm>

namespace mgforge::chem {

int MolGraph::add_atom(const Atom& atom) {
  atoms_.push_back(atom);
  adjacency_.emplace_back();
  atom_in_ring_.push_back(false);
  component_.push_back(num_components_++);
  return num_atoms() - 1;
}

int MolGraph::add_bond(int begin, int end, BondOrder order, BondStereo stereo) {
  if (begin == end || find_bond(begin, end) >= 0) {
    return -1;
  }
  Bond bond;
  bond.begin = begin;
  bond.end = end;
  bond.order = order;
  bond.aromatic = order == BondOrder::kAromatic;
  bond.stereo = stereo;
  bonds_.push_back(bond);
  const int index = num_bonds() - 1;
  adjacency_[static_cast<std::size_t>(begin)].push_back(index);
  adjacency_[static_cast<std::size_t>(end)].push_back(index);
  bond_in_ring_.push_back(false);
  return index;
}

int MolGraph::find_bond(int a, int b) const {
  for (int bi : bonds_of(a)) {
    if (bonds_[static_cast<std::size_t>(bi)].other(a) == b) {
      return bi;
    }
  }
  return -1;
}

bool MolGraph::hydrogens_resolved() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.implicit_h >= 0; });
}

void MolGraph::update_ring_info() {
  const int n = num_atoms();
  std::fill(atom_in_ring_.begin(), atom_in_ring_.end(), false);
  bond_in_ring_.assign(bonds_.size(), false);
  component_.assign(static_cast<std::size_t>(n), -1);

  // Bridge detection (Tarjan low-link); a bond is in a ring iff it is not a
  // bridge. Iterative to stay safe on long chains.
  std::vector<int> order(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<bool> is_bridge(bonds_.size(), false);
  int counter = 0;
  num_components_ = 0;

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (order[static_cast<std::size_t>(root)] >= 0) {
      continue;
    }
    const int comp = num_components_++;
    std::vector<Frame> stack{{root, -1, 0}};
    order[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    component_[static_cast<std::size_t>(root)] = comp;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& adj = adjacency_[static_cast<std::size_t>(f.atom)];
      if (f.next < adj.size()) {
        const int bi = adj[f.next++];
        if (bi == f.parent_bond) {
          continue;
        }
        const int nb = bonds_[static_cast<std::size_t>(bi)].other(f.atom);
        if (order[static_cast<std::size_t>(nb)] < 0) {
          order[static_cast<std::size_t>(nb)] = low[static_cast<std::size_t>(nb)] = counter++;
          component_[static_cast<std::size_t>(nb)] = comp;
          stack.push_back({nb, bi, 0});
        } else {
          low[static_cast<std::size_t>(f.atom)] =
              std::min(low[static_cast<std::size_t>(f.atom)], order[static_cast<std::size_t>(nb)]);
        }
      } else {
        const int done = f.atom;
        const int via = f.parent_bond;
        stack.pop_back();
        if (!stack.empty()) {
          const int parent = stack.back().atom;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(done)]);
          if (low[static_cast<std::size_t>(done)] > order[static_cast<std::size_t>(parent)]) {
            is_bridge[static_cast<std::size_t>(via)] = true;
          }
        }
      }
    }
  }

  for (std::size_t bi = 0; bi < bonds_.size(); ++bi) {
    if (!is_bridge[bi]) {
      bond_in_ring_[bi] = true;
      atom_in_ring_[static_cast<std::size_t>(bonds_[bi].begin)] = true;
      atom_in_ring_[static_cast<std::size_t>(bonds_[bi].end)] = true;
    }
  }
}

}  // namespace mgforge::chem
