// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/sanitize.h"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <optional>

#include "mgforge/chem/element.h"

namespace mgforge::chem {

int ValenceRule::max() const { return generic ? kMaxGenericValence : allowed.back(); }

ValenceRule valence_rule(const Atom& atom) {
  ValenceRule rule;
  const int z = atom.atomic_number;
  const int q = atom.formal_charge;
  const auto defaults = default_valences(z);
  if (defaults.empty()) {
    rule.generic = true;
    return rule;
  }
  if (q == 0) {
    rule.allowed.assign(defaults.begin(), defaults.end());
  } else if (q > 0 && (z == kNitrogen || z == kPhosphorus)) {
    for (int v : defaults) {
      rule.allowed.push_back(v + q);
    }
  } else if (q < 0 && (z == kOxygen || z == kSulfur)) {
    for (int v : defaults) {
      if (v + q > 0) {
        rule.allowed.push_back(v + q);
      }
    }
  }
  if (rule.allowed.empty()) {
    rule.generic = true;
  }
  return rule;
}

int organic_default_h(int atomic_number, bool aromatic, int bond_sum) {
  if (atomic_number == kDummyAtom) {
    return 0;
  }
  for (int v : default_valences(atomic_number)) {
    if (v >= bond_sum) {
      if (aromatic) {
        return v > bond_sum ? v - bond_sum - 1 : 0;
      }
      return v - bond_sum;
    }
  }
  return -1;
}

namespace {

int bond_sum(const MolGraph& mol, int atom) {
  int sum = 0;
  for (int bi : mol.bonds_of(atom)) {
    sum += mol.bond(bi).valence_contribution();
  }
  return sum;
}

// Target valence used to decide whether an aromatic atom must take a double
// bond. Generic-rule atoms fall back to the isoelectronic neutral element.
std::optional<int> pi_target(const Atom& atom, int total) {
  const ValenceRule rule = valence_rule(atom);
  if (!rule.generic) {
    for (int v : rule.allowed) {
      if (v >= total) {
        return v;
      }
    }
    return std::nullopt;
  }
  const int q = atom.formal_charge;
  switch (atom.atomic_number) {
    case kCarbon:
      return 4 - std::abs(q);
    case kNitrogen:
    case kPhosphorus:
      return 3 + q;
    case kOxygen:
    case kSulfur:
      return 2 + q;
    case kBoron:
      return 3 - q;
    default:
      return total;
  }
}

struct Resolution {
  std::vector<char> needs_pi;
  std::optional<ValidityVerdict> failure;
};

ValidityVerdict invalid(int atom, std::string reason) {
  ValidityVerdict v;
  v.valid = false;
  v.atom = atom;
  v.reason = std::move(reason);
  return v;
}

std::string describe(const MolGraph& mol, int atom) {
  const Atom& a = mol.atom(atom);
  std::string s(element_symbol(a.atomic_number));
  if (a.formal_charge != 0) {
    s += a.formal_charge > 0 ? "+" : "-";
    if (std::abs(a.formal_charge) > 1) {
      s += std::to_string(std::abs(a.formal_charge));
    }
  }
  return s + " atom " + std::to_string(atom);
}

// Resolves hydrogens (unless already resolved) and decides which aromatic
// atoms need a double bond in the Kekule form.
Resolution resolve(MolGraph& mol) {
  Resolution res;
  res.needs_pi.assign(static_cast<std::size_t>(mol.num_atoms()), 0);
  const bool preset = mol.hydrogens_resolved();
  for (int i = 0; i < mol.num_atoms(); ++i) {
    Atom& a = mol.atom(i);
    if (a.aromatic && !mol.atom_in_ring(i)) {
      res.failure = invalid(i, "aromatic atom outside any ring: " + describe(mol, i));
      return res;
    }
    const int sum = bond_sum(mol, i);
    const ValenceRule rule = valence_rule(a);
    int h = 0;
    if (preset) {
      h = a.total_h();
    } else if (a.in_bracket) {
      h = a.explicit_h.value_or(0);
      a.implicit_h = 0;
    } else {
      h = organic_default_h(a.atomic_number, a.aromatic, sum);
      if (h < 0) {
        res.failure = invalid(i, "valence " + std::to_string(sum) + " exceeds allowed maximum " +
                                     std::to_string(rule.max()) + " for " + describe(mol, i));
        return res;
      }
      a.implicit_h = h;
    }
    const int total = sum + h;
    if (total > rule.max()) {
      res.failure = invalid(i, "valence " + std::to_string(total) + " exceeds allowed maximum " +
                                   std::to_string(rule.max()) + " for " + describe(mol, i));
      return res;
    }
    if (a.aromatic) {
      const auto target = pi_target(a, total);
      if (!target) {
        res.failure = invalid(i, "no valence fits aromatic " + describe(mol, i));
        return res;
      }
      res.needs_pi[static_cast<std::size_t>(i)] = *target > total ? 1 : 0;
    }
  }
  return res;
}

// Perfect matching of pi-needing atoms over aromatic bonds. Most-constrained
// atom first with chronological backtracking; bounded by kMaxSteps.
class KekuleSolver {
 public:
  KekuleSolver(const MolGraph& mol, const std::vector<char>& needs_pi)
      : mol_(mol), needs_pi_(needs_pi), mate_(static_cast<std::size_t>(mol.num_atoms()), -1) {}

  // Returns the bond indices chosen as double bonds, or nullopt.
  std::optional<std::vector<int>> solve(int& failing_atom) {
    if (!parity_ok(failing_atom)) {
      return std::nullopt;
    }
    std::vector<int> chosen;
    if (search(chosen, failing_atom)) {
      return chosen;
    }
    return std::nullopt;
  }

 private:
  static constexpr long kMaxSteps = 200000;

  bool candidate(int bi, int from) const {
    const Bond& b = mol_.bond(bi);
    if (!b.aromatic) {
      return false;
    }
    const int to = b.other(from);
    return needs_pi_[static_cast<std::size_t>(to)] && mate_[static_cast<std::size_t>(to)] < 0;
  }

  // Each connected piece of the pi-needing subgraph must have even size.
  bool parity_ok(int& failing_atom) const {
    std::vector<char> seen(static_cast<std::size_t>(mol_.num_atoms()), 0);
    for (int start = 0; start < mol_.num_atoms(); ++start) {
      if (!needs_pi_[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) {
        continue;
      }
      int count = 0;
      std::vector<int> stack{start};
      seen[static_cast<std::size_t>(start)] = 1;
      while (!stack.empty()) {
        const int a = stack.back();
        stack.pop_back();
        ++count;
        for (int bi : mol_.bonds_of(a)) {
          const Bond& b = mol_.bond(bi);
          const int o = b.other(a);
          if (b.aromatic && needs_pi_[static_cast<std::size_t>(o)] && !seen[static_cast<std::size_t>(o)]) {
            seen[static_cast<std::size_t>(o)] = 1;
            stack.push_back(o);
          }
        }
      }
      if (count % 2 != 0) {
        failing_atom = start;
        return false;
      }
    }
    return true;
  }

  bool search(std::vector<int>& chosen, int& failing_atom) {
    if (++steps_ > kMaxSteps) {
      return false;
    }
    int best = -1;
    int best_options = 1 << 30;
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      if (!needs_pi_[static_cast<std::size_t>(i)] || mate_[static_cast<std::size_t>(i)] >= 0) {
        continue;
      }
      int options = 0;
      for (int bi : mol_.bonds_of(i)) {
        options += candidate(bi, i) ? 1 : 0;
      }
      if (options < best_options) {
        best = i;
        best_options = options;
      }
    }
    if (best < 0) {
      return true;
    }
    if (best_options == 0) {
      failing_atom = best;
      return false;
    }
    for (int bi : mol_.bonds_of(best)) {
      if (!candidate(bi, best)) {
        continue;
      }
      const int other = mol_.bond(bi).other(best);
      mate_[static_cast<std::size_t>(best)] = other;
      mate_[static_cast<std::size_t>(other)] = best;
      chosen.push_back(bi);
      if (search(chosen, failing_atom)) {
        return true;
      }
      chosen.pop_back();
      mate_[static_cast<std::size_t>(best)] = -1;
      mate_[static_cast<std::size_t>(other)] = -1;
      if (steps_ > kMaxSteps) {
        return false;
      }
    }
    return false;
  }

  const MolGraph& mol_;
  const std::vector<char>& needs_pi_;
  std::vector<int> mate_;
  long steps_ = 0;
};

bool has_lone_pair_for_ring(const Atom& a, int total_valence) {
  switch (a.atomic_number) {
    case kNitrogen:
    case kPhosphorus:
      return a.formal_charge < 0 || (a.formal_charge == 0 && total_valence == 3);
    case kOxygen:
    case kSulfur:
      return a.formal_charge <= 0;
    case kCarbon:
      return a.formal_charge < 0;
    default:
      return false;
  }
}

// Rejects isolated aromatic rings (not fused to another aromatic ring) that
// do not hold 4n+2 pi electrons in the Kekule form. Rings carrying an
// exocyclic double bond are skipped.
std::optional<ValidityVerdict> check_isolated_rings(const MolGraph& kek) {
  const int n = kek.num_atoms();
  std::vector<int> system(static_cast<std::size_t>(n), -1);
  int systems = 0;
  for (int start = 0; start < n; ++start) {
    if (system[static_cast<std::size_t>(start)] >= 0 || !kek.atom(start).aromatic) {
      continue;
    }
    std::vector<int> members;
    int ring_bonds = 0;
    std::vector<int> stack{start};
    system[static_cast<std::size_t>(start)] = systems;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      members.push_back(a);
      for (int bi : kek.bonds_of(a)) {
        const Bond& b = kek.bond(bi);
        if (!b.aromatic || !kek.bond_in_ring(bi)) {
          continue;
        }
        const int o = b.other(a);
        if (a < o) {
          ++ring_bonds;
        }
        if (system[static_cast<std::size_t>(o)] < 0) {
          system[static_cast<std::size_t>(o)] = systems;
          stack.push_back(o);
        }
      }
    }
    ++systems;
    if (ring_bonds != static_cast<int>(members.size())) {
      continue;  // fused or branched aromatic system
    }
    int electrons = 0;
    for (int a : members) {
      const Atom& atom = kek.atom(a);
      bool ring_double = false;
      bool exo_double = false;
      int total = atom.total_h();
      for (int bi : kek.bonds_of(a)) {
        const Bond& b = kek.bond(bi);
        total += static_cast<int>(b.order);
        if (b.order == BondOrder::kDouble) {
          (b.aromatic ? ring_double : exo_double) = true;
        }
      }
      if (exo_double) {
        electrons = -1;  // quinoid-like ring: electron count is ambiguous, not checked
        break;
      }
      if (ring_double) {
        electrons += 1;
      } else if (has_lone_pair_for_ring(atom, total)) {
        electrons += 2;
      }
    }
    if (electrons >= 0 && (electrons < 2 || (electrons - 2) % 4 != 0)) {
      return invalid(members.front(), "aromatic ring with " + std::to_string(electrons) +
                                          " pi electrons is not 4n+2");
    }
  }
  return std::nullopt;
}

struct Outcome {
  MolGraph sanitized;  // aromatic bonds kept
  MolGraph kekule;
  ValidityVerdict verdict;
};

Outcome run(const MolGraph& input, bool perceive) {
  Outcome out;
  out.sanitized = perceive && !input.hydrogens_resolved() ? perceive_aromaticity(input) : input;
  Resolution res = resolve(out.sanitized);
  if (res.failure) {
    out.verdict = *res.failure;
    return out;
  }
  int failing = -1;
  KekuleSolver solver(out.sanitized, res.needs_pi);
  const auto doubles = solver.solve(failing);
  if (!doubles) {
    out.verdict = invalid(failing, "no Kekule assignment for the aromatic system containing atom " +
                                       std::to_string(failing));
    return out;
  }
  out.kekule = out.sanitized;
  for (int bi = 0; bi < out.kekule.num_bonds(); ++bi) {
    Bond& b = out.kekule.bond(bi);
    if (b.order == BondOrder::kAromatic) {
      b.order = BondOrder::kSingle;
    }
  }
  for (int bi : *doubles) {
    out.kekule.bond(bi).order = BondOrder::kDouble;
  }
  if (auto ring_failure = check_isolated_rings(out.kekule)) {
    out.verdict = *ring_failure;
    return out;
  }
  for (int i = 0; i < out.kekule.num_atoms(); ++i) {
    const Atom& a = out.kekule.atom(i);
    int total = a.total_h();
    for (int bi : out.kekule.bonds_of(i)) {
      total += static_cast<int>(out.kekule.bond(bi).order);
    }
    const ValenceRule rule = valence_rule(a);
    if (total > rule.max()) {
      out.verdict = invalid(i, "valence " + std::to_string(total) + " exceeds allowed maximum " +
                                   std::to_string(rule.max()) + " for " + describe(out.kekule, i));
      return out;
    }
  }
  return out;
}

}  // namespace

MolGraph perceive_aromaticity(const MolGraph& input) {
  MolGraph mol = input;
  auto eligible = [&](int a) {
    const Atom& atom = mol.atom(a);
    if (!mol.atom_in_ring(a)) {
      return false;
    }
    if (atom.atomic_number == kCarbon) {
      return atom.formal_charge == 0;
    }
    return atom.atomic_number == kNitrogen && (atom.formal_charge == 0 || atom.formal_charge == 1);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    // Enumerate 6-cycles rooted at their lowest atom index.
    for (int root = 0; root < mol.num_atoms(); ++root) {
      if (!eligible(root)) {
        continue;
      }
      std::array<int, 6> path{};
      std::array<int, 6> path_bonds{};
      path[0] = root;
      std::vector<std::pair<std::array<int, 6>, std::array<int, 6>>> cycles;
      auto extend = [&](auto&& self, int depth) -> void {
        const int at = path[static_cast<std::size_t>(depth - 1)];
        for (int bi : mol.bonds_of(at)) {
          if (!mol.bond_in_ring(bi)) {
            continue;
          }
          const int nb = mol.bond(bi).other(at);
          if (depth == 6) {
            if (nb == root && path[1] < path[5]) {
              path_bonds[5] = bi;
              cycles.emplace_back(path, path_bonds);
            }
            continue;
          }
          if (nb <= root || !eligible(nb)) {
            continue;
          }
          if (std::find(path.begin(), path.begin() + depth, nb) != path.begin() + depth) {
            continue;
          }
          path[static_cast<std::size_t>(depth)] = nb;
          path_bonds[static_cast<std::size_t>(depth - 1)] = bi;
          self(self, depth + 1);
        }
      };
      extend(extend, 1);

      for (const auto& [atoms, bonds] : cycles) {
        bool any_kekule = false;
        bool pattern_a = true;
        bool pattern_b = true;
        for (std::size_t k = 0; k < 6; ++k) {
          const Bond& b = mol.bond(bonds[k]);
          if (b.order == BondOrder::kAromatic) {
            continue;
          }
          any_kekule = true;
          const bool is_double = b.order == BondOrder::kDouble;
          if (b.order == BondOrder::kTriple) {
            pattern_a = pattern_b = false;
          }
          pattern_a = pattern_a && (is_double == (k % 2 == 0));
          pattern_b = pattern_b && (is_double == (k % 2 == 1));
        }
        if (!any_kekule || !(pattern_a || pattern_b)) {
          continue;
        }
        // An exocyclic double bond on a ring atom rules the ring out.
        bool exocyclic = false;
        for (int a : atoms) {
          for (int bi : mol.bonds_of(a)) {
            if (mol.bond(bi).order == BondOrder::kDouble &&
                std::find(bonds.begin(), bonds.end(), bi) == bonds.end()) {
              exocyclic = true;
            }
          }
        }
        if (exocyclic) {
          continue;
        }
        for (int a : atoms) {
          mol.atom(a).aromatic = true;
        }
        for (int bi : bonds) {
          mol.bond(bi).order = BondOrder::kAromatic;
          mol.bond(bi).aromatic = true;
        }
        changed = true;
      }
    }
  }
  return mol;
}

ValidityVerdict validate(const MolGraph& mol) { return run(mol, true).verdict; }

MolGraph kekulize(const MolGraph& mol) {
  Outcome out = run(mol, false);
  if (!out.verdict.valid) {
    if (out.verdict.reason.find("Kekule") != std::string::npos ||
        out.verdict.reason.find("pi electrons") != std::string::npos) {
      throw ChemError("NoKekuleAssignment", out.verdict.reason, out.verdict.atom);
    }
    throw ChemError("InvalidInput", out.verdict.reason, out.verdict.atom);
  }
  return std::move(out.kekule);
}

MolGraph sanitize(const MolGraph& mol) {
  Outcome out = run(mol, true);
  if (!out.verdict.valid) {
    throw ChemError("InvalidInput", out.verdict.reason, out.verdict.atom);
  }
  return std::move(out.sanitized);
}

}  // namespace mgforge::chem
