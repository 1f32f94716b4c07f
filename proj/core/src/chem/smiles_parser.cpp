// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <map>
#include <optional>
#include <vector>

#include "mgforge/chem/element.h"
#include "mgforge/chem/smiles.h"

namespace mgforge::chem {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kEmptyInput:
      return "EmptyInput";
    case ParseErrorKind::kUnknownToken:
      return "UnknownToken";
    case ParseErrorKind::kUnbalancedParen:
      return "UnbalancedParen";
    case ParseErrorKind::kUnclosedRing:
      return "UnclosedRing";
    case ParseErrorKind::kInvalidRingBond:
      return "InvalidRingBond";
    case ParseErrorKind::kMisplacedToken:
      return "MisplacedToken";
  }
  return "UnknownToken";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& detail)
    : Error(ErrorCategory::kData, to_string(kind),
            std::string(to_string(kind)) + " at offset " + std::to_string(offset) + ": " + detail),
      parse_kind_(kind),
      offset_(offset) {}

namespace {

struct PendingBond {
  BondOrder order = BondOrder::kSingle;
  BondStereo stereo = BondStereo::kNone;
  std::size_t offset = 0;
};

struct OpenRing {
  int atom;
  std::optional<PendingBond> bond;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  MolGraph run() {
    if (text_.empty()) {
      throw ParseError(ParseErrorKind::kEmptyInput, 0, "empty SMILES");
    }
    while (pos_ < text_.size()) {
      step();
    }
    finish();
    return std::move(mol_);
  }

 private:
  [[noreturn]] void fail(ParseErrorKind kind, std::size_t offset, const std::string& detail) {
    throw ParseError(kind, offset, detail);
  }

  void step() {
    const char c = text_[pos_];
    switch (c) {
      case '(':
        if (prev_ < 0) {
          fail(ParseErrorKind::kMisplacedToken, pos_, "branch before any atom");
        }
        if (pending_) {
          fail(ParseErrorKind::kMisplacedToken, pending_->offset, "bond before branch");
        }
        branches_.push_back({prev_, pos_});
        last_was_open_ = true;
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) {
          fail(ParseErrorKind::kUnbalancedParen, pos_, "')' without matching '('");
        }
        if (pending_) {
          fail(ParseErrorKind::kMisplacedToken, pending_->offset, "bond at end of branch");
        }
        if (last_was_open_) {
          fail(ParseErrorKind::kMisplacedToken, pos_, "empty branch");
        }
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
        return;
      case '-':
      case '=':
      case '#':
      case ':':
      case '/':
      case '\\':
        read_bond(c);
        return;
      case '.':
        if (prev_ < 0 || pending_ || !branches_.empty()) {
          fail(ParseErrorKind::kMisplacedToken, pos_, "misplaced '.'");
        }
        mol_.set_has_dot(true);
        prev_ = -1;
        last_dot_ = pos_;
        ++pos_;
        return;
      case '%':
        read_ring_closure();
        return;
      case '[':
        add_atom(read_bracket_atom());
        return;
      default:
        break;
    }
    if (c >= '0' && c <= '9') {
      read_ring_closure();
      return;
    }
    add_atom(read_organic_atom());
  }

  void read_bond(char c) {
    if (prev_ < 0) {
      fail(ParseErrorKind::kMisplacedToken, pos_, std::string("bond '") + c + "' before any atom");
    }
    if (pending_) {
      fail(ParseErrorKind::kMisplacedToken, pos_, "two consecutive bond symbols");
    }
    PendingBond b;
    b.offset = pos_;
    switch (c) {
      case '=':
        b.order = BondOrder::kDouble;
        break;
      case '#':
        b.order = BondOrder::kTriple;
        break;
      case ':':
        b.order = BondOrder::kAromatic;
        break;
      case '/':
        b.stereo = BondStereo::kUp;
        break;
      case '\\':
        b.stereo = BondStereo::kDown;
        break;
      default:
        break;
    }
    pending_ = b;
    ++pos_;
  }

  void read_ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0) {
      fail(ParseErrorKind::kMisplacedToken, start, "ring closure before any atom");
    }
    int number = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        fail(ParseErrorKind::kUnknownToken, start, "'%' must be followed by two digits");
      }
      number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      number = text_[pos_] - '0';
      ++pos_;
    }
    last_was_open_ = false;

    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing{prev_, pending_, start});
      pending_.reset();
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    std::optional<PendingBond> bond = pending_;
    pending_.reset();
    if (open.bond && bond && open.bond->order != bond->order) {
      fail(ParseErrorKind::kInvalidRingBond, start, "ring closure bond orders disagree");
    }
    if (!bond) {
      bond = open.bond;
    }
    BondOrder order = implicit_order(open.atom, prev_);
    BondStereo stereo = BondStereo::kNone;
    if (bond) {
      order = bond->order;
      stereo = bond->stereo;
    }
    if (mol_.add_bond(open.atom, prev_, order, stereo) < 0) {
      fail(ParseErrorKind::kInvalidRingBond, start,
           open.atom == prev_ ? "ring closure to the same atom" : "ring closure duplicates a bond");
    }
  }

  BondOrder implicit_order(int a, int b) const {
    return mol_.atom(a).aromatic && mol_.atom(b).aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
  }

  Atom read_organic_atom() {
    Atom atom;
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    if (c == 'C' && next == 'l') {
      atom.atomic_number = kChlorine;
      pos_ += 2;
      return atom;
    }
    if (c == 'B' && next == 'r') {
      atom.atomic_number = kBromine;
      pos_ += 2;
      return atom;
    }
    ++pos_;
    switch (c) {
      case 'B':
        atom.atomic_number = kBoron;
        return atom;
      case 'C':
        atom.atomic_number = kCarbon;
        return atom;
      case 'N':
        atom.atomic_number = kNitrogen;
        return atom;
      case 'O':
        atom.atomic_number = kOxygen;
        return atom;
      case 'P':
        atom.atomic_number = kPhosphorus;
        return atom;
      case 'S':
        atom.atomic_number = kSulfur;
        return atom;
      case 'F':
        atom.atomic_number = kFluorine;
        return atom;
      case 'I':
        atom.atomic_number = kIodine;
        return atom;
      case '*':
        atom.atomic_number = kDummyAtom;
        return atom;
      default:
        break;
    }
    if (auto z = aromatic_symbol(c)) {
      atom.atomic_number = *z;
      atom.aromatic = true;
      return atom;
    }
    fail(ParseErrorKind::kUnknownToken, pos_ - 1, std::string("unexpected character '") + printable(c) + "'");
  }

  static std::optional<int> aromatic_symbol(char c) {
    switch (c) {
      case 'b':
        return kBoron;
      case 'c':
        return kCarbon;
      case 'n':
        return kNitrogen;
      case 'o':
        return kOxygen;
      case 'p':
        return kPhosphorus;
      case 's':
        return kSulfur;
      default:
        return std::nullopt;
    }
  }

  static std::string printable(char c) {
    if (std::isprint(static_cast<unsigned char>(c))) {
      return std::string(1, c);
    }
    return "\\x" + std::to_string(static_cast<unsigned char>(c));
  }

  bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  bool at_digit() const { return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])); }

  int read_number() {
    int value = 0;
    int digits = 0;
    while (at_digit() && digits < 4) {
      value = value * 10 + (text_[pos_] - '0');
      ++pos_;
      ++digits;
    }
    return value;
  }

  Atom read_bracket_atom() {
    const std::size_t open = pos_;
    ++pos_;
    Atom atom;
    atom.in_bracket = true;
    atom.explicit_h = 0;
    if (at_digit()) {
      atom.isotope = read_number();
    }
    if (pos_ >= text_.size()) {
      fail(ParseErrorKind::kUnknownToken, open, "unterminated bracket atom");
    }
    const char c = text_[pos_];
    if (c == '*') {
      atom.atomic_number = kDummyAtom;
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::optional<int> z;
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        z = element_from_symbol(text_.substr(pos_, 2));
        if (z) {
          pos_ += 2;
        }
      }
      if (!z) {
        z = element_from_symbol(text_.substr(pos_, 1));
        if (!z) {
          fail(ParseErrorKind::kUnknownToken, pos_, "unknown element symbol");
        }
        ++pos_;
      }
      atom.atomic_number = *z;
    } else if (auto z = aromatic_symbol(c)) {
      atom.atomic_number = *z;
      atom.aromatic = true;
      ++pos_;
    } else {
      fail(ParseErrorKind::kUnknownToken, pos_, "expected element symbol in bracket atom");
    }

    if (at('@')) {
      ++pos_;
      atom.chirality = Chirality::kCounterClockwise;
      if (at('@')) {
        ++pos_;
        atom.chirality = Chirality::kClockwise;
      }
    }
    if (at('H')) {
      ++pos_;
      atom.explicit_h = at_digit() ? read_number() : 1;
    }
    if (at('+') || at('-')) {
      const char sign_char = text_[pos_];
      const int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (at_digit()) {
        magnitude = read_number();
      } else {
        while (at(sign_char)) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.formal_charge = sign * magnitude;
    }
    if (at(':')) {
      ++pos_;
      if (!at_digit()) {
        fail(ParseErrorKind::kUnknownToken, pos_, "atom class needs digits");
      }
      read_number();
    }
    if (!at(']')) {
      fail(ParseErrorKind::kUnknownToken, pos_ < text_.size() ? pos_ : open, "unterminated bracket atom");
    }
    ++pos_;
    return atom;
  }

  void add_atom(const Atom& atom) {
    const int index = mol_.add_atom(atom);
    if (prev_ >= 0) {
      BondOrder order = implicit_order(prev_, index);
      BondStereo stereo = BondStereo::kNone;
      if (pending_) {
        order = pending_->order;
        stereo = pending_->stereo;
      }
      mol_.add_bond(prev_, index, order, stereo);
    } else if (pending_) {
      fail(ParseErrorKind::kMisplacedToken, pending_->offset, "dangling bond");
    }
    pending_.reset();
    prev_ = index;
    last_was_open_ = false;
  }

  void finish() {
    if (pending_) {
      fail(ParseErrorKind::kMisplacedToken, pending_->offset, "dangling bond at end of input");
    }
    if (!branches_.empty()) {
      fail(ParseErrorKind::kUnbalancedParen, branches_.back().second, "'(' never closed");
    }
    if (!rings_.empty()) {
      std::size_t first = text_.size();
      int digit = 0;
      for (const auto& [number, ring] : rings_) {
        if (ring.offset < first) {
          first = ring.offset;
          digit = number;
        }
      }
      fail(ParseErrorKind::kUnclosedRing, first, "ring bond " + std::to_string(digit) + " never closed");
    }
    if (prev_ < 0) {
      fail(ParseErrorKind::kMisplacedToken, last_dot_, "trailing '.'");
    }
    mol_.update_ring_info();
    for (int bi = 0; bi < mol_.num_bonds(); ++bi) {
      Bond& b = mol_.bond(bi);
      if (b.aromatic && !mol_.bond_in_ring(bi)) {
        b.order = BondOrder::kSingle;
        b.aromatic = false;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t last_dot_ = 0;
  MolGraph mol_;
  int prev_ = -1;
  bool last_was_open_ = false;
  std::optional<PendingBond> pending_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, OpenRing> rings_;
};

}  // namespace

MolGraph parse_smiles(std::string_view smiles) { return Parser(smiles).run(); }

}  // namespace mgforge::chem
