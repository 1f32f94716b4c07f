// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgforge/common/error.h"

namespace mgforge::chem {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Directional single bonds ('/' and '\'). Parsed and kept, never interpreted.
enum class BondStereo : std::uint8_t { kNone, kUp, kDown };

// Tetrahedral markers ('@' and '@@'). Parsed and kept, never interpreted.
enum class Chirality : std::uint8_t { kNone, kCounterClockwise, kClockwise };

struct Atom {
  int atomic_number = 6;
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<int> explicit_h;
  std::optional<int> isotope;
  bool in_bracket = false;
  Chirality chirality = Chirality::kNone;
  // Implicit hydrogens; -1 until resolved by sanitize().
  int implicit_h = -1;

  int total_h() const { return explicit_h.value_or(0) + (implicit_h > 0 ? implicit_h : 0); }
  bool is_heavy() const { return atomic_number > 1; }
};

struct Bond {
  int begin = -1;
  int end = -1;
  BondOrder order = BondOrder::kSingle;
  // Set for bonds written (or perceived) as aromatic. Survives kekulization,
  // which replaces `order` by single/double.
  bool aromatic = false;
  BondStereo stereo = BondStereo::kNone;

  int other(int atom) const { return atom == begin ? end : begin; }
  // Bond order as a valence contribution; aromatic bonds count 1.
  int valence_contribution() const {
    return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
  }
};

// Thrown for operations that require a valid molecule (kind "InvalidInput")
// and by kekulize() (kind "NoKekuleAssignment").
class ChemError : public Error {
 public:
  ChemError(std::string kind, const std::string& message, int atom = -1)
      : Error(ErrorCategory::kData, std::move(kind), message), atom_(atom) {}
  int atom() const { return atom_; }

 private:
  int atom_;
};

// Heavy-atom molecular graph. Explicit [H] atoms, when written, are graph
// nodes like any other atom.
class MolGraph {
 public:
  int add_atom(const Atom& atom);
  // Returns the new bond index, or -1 when begin == end or the pair is
  // already bonded.
  int add_bond(int begin, int end, BondOrder order, BondStereo stereo = BondStereo::kNone);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }

  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) { return bonds_[static_cast<std::size_t>(i)]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  // Indices of the bonds incident to `atom`, in insertion order.
  std::span<const int> bonds_of(int atom) const {
    return adjacency_[static_cast<std::size_t>(atom)];
  }
  int degree(int atom) const { return static_cast<int>(bonds_of(atom).size()); }
  int find_bond(int a, int b) const;

  // Recomputes ring flags and component count. Called by the parser; call
  // again after editing the bond list by hand.
  void update_ring_info();

  bool atom_in_ring(int atom) const { return atom_in_ring_[static_cast<std::size_t>(atom)]; }
  bool bond_in_ring(int bond) const { return bond_in_ring_[static_cast<std::size_t>(bond)]; }
  int num_components() const { return num_components_; }
  // Cycle rank |E| - |V| + components; equals the SSSR size.
  int ring_count() const { return num_bonds() - num_atoms() + num_components_; }
  // Component index of every atom, numbered in order of first atom.
  const std::vector<int>& component_of() const { return component_; }

  bool hydrogens_resolved() const;
  // Set when the source text contained '.'.
  bool has_dot() const { return has_dot_; }
  void set_has_dot(bool v) { has_dot_ = v; }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<bool> atom_in_ring_;
  std::vector<bool> bond_in_ring_;
  std::vector<int> component_;
  int num_components_ = 0;
  bool has_dot_ = false;
};

}  // namespace mgforge::chem
