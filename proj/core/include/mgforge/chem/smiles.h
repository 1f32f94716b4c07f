// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "mgforge/chem/mol_graph.h"
#include "mgforge/common/error.h"

namespace mgforge::chem {

enum class ParseErrorKind {
  kEmptyInput,
  kUnknownToken,
  kUnbalancedParen,
  kUnclosedRing,
  // Ring closure that would bond an atom to itself, duplicate an existing
  // bond, or whose two ends name different bond orders.
  kInvalidRingBond,
  // A syntactically known token in a position where it cannot appear, e.g. a
  // leading bond or a branch before any atom.
  kMisplacedToken,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& detail);

  ParseErrorKind parse_kind() const { return parse_kind_; }
  // Byte offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind parse_kind_;
  std::size_t offset_;
};

// Parses the supported SMILES subset: organic-subset and bracket atoms
// (isotope, chirality marker, H count, charge, atom class), bonds - = # : / \,
// branches, ring closures 1-9 and %NN, '.' components, lowercase aromatic
// atoms and the '*' attachment atom.
//
// Ring flags are computed; implicit hydrogens are left unresolved. An implicit
// bond between two aromatic atoms is aromatic unless it ends up outside every
// ring, in which case it is demoted to single.
MolGraph parse_smiles(std::string_view smiles);

}  // namespace mgforge::chem
