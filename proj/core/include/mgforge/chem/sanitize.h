// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mgforge/chem/mol_graph.h"

namespace mgforge::chem {

struct ValidityVerdict {
  bool valid = true;
  // First violating atom, or -1 for molecule-level problems.
  int atom = -1;
  std::string reason;

  explicit operator bool() const { return valid; }
};

// Valence model:
//   neutral: B 3, C 4, N 3, O 2, P {3,5}, S {2,4,6}, H and halogens 1;
//   N, P: +1 per positive charge;  O, S: -1 per negative charge;
//   every other charged atom, unlisted element or '*': any total <= 6.
// Aromatic bonds count 1 before kekulization. Organic-subset atoms receive
// implicit hydrogens up to the smallest allowed valence; bracket atoms use
// their written H count.
ValidityVerdict validate(const MolGraph& mol);

// Replaces aromatic bonds by an alternating single/double assignment found by
// backtracking over the aromatic subgraph. Atoms keep their aromatic flag and
// bonds keep `aromatic`; implicit hydrogens are resolved on the result.
// An isolated aromatic ring without exocyclic double bonds whose pi-electron
// count is not 4n+2 is rejected as well. Throws ChemError("NoKekuleAssignment").
MolGraph kekulize(const MolGraph& mol);

// Marks six-membered rings of C/N with a strictly alternating single/double
// pattern as aromatic, so Kekule and lowercase renderings of the same
// benzenoid ring coincide. Repeats until no ring changes (fused systems).
MolGraph perceive_aromaticity(const MolGraph& mol);

// Normal form used by canonicalization, fingerprints and descriptors:
// aromaticity perceived, hydrogens resolved, aromatic bonds kept (verified
// kekulizable). Graphs whose hydrogens are already resolved are re-checked
// but not re-perceived. Throws ChemError("InvalidInput") with the verdict
// reason when the molecule is invalid.
MolGraph sanitize(const MolGraph& mol);

// Hydrogen count an organic-subset atom would receive if written without
// brackets in the given bonding context (aromatic bonds counted as 1), or -1
// when no allowed valence fits.
int organic_default_h(int atomic_number, bool aromatic, int bond_sum);

// Allowed total valences for an atom (see validate()). `generic` is set when
// any total up to kMaxGenericValence is accepted.
struct ValenceRule {
  std::vector<int> allowed;
  bool generic = false;
  int max() const;
};
ValenceRule valence_rule(const Atom& atom);

}  // namespace mgforge::chem
