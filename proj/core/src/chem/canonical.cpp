// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/canonical.h"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <numeric>

#include "mgforge/chem/element.h"
#include "mgforge/chem/sanitize.h"

namespace mgforge::chem {
namespace {

constexpr long kMaxLeaves = 1024;

int bond_code(const Bond& b) { return b.aromatic ? 4 : static_cast<int>(b.order); }

// ranks[i] = number of atoms whose key compares less than atom i's key.
template <typename Less>
int rank_by(int n, Less less, std::vector<int>& ranks) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), less);
  ranks.assign(static_cast<std::size_t>(n), 0);
  int distinct = 0;
  for (int k = 0; k < n; ++k) {
    if (k == 0 || less(idx[static_cast<std::size_t>(k - 1)], idx[static_cast<std::size_t>(k)])) {
      ++distinct;
      ranks[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = k;
    } else {
      ranks[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] =
          ranks[static_cast<std::size_t>(idx[static_cast<std::size_t>(k - 1)])];
    }
  }
  return distinct;
}

int count_distinct(const std::vector<int>& ranks) {
  std::vector<int> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::vector<int> initial_ranks(const MolGraph& mol) {
  const int n = mol.num_atoms();
  std::vector<std::array<int, 7>> inv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    // Degree leads so that traversal starts at a terminal atom when there is one.
    inv[static_cast<std::size_t>(i)] = {mol.degree(i),   a.atomic_number, a.isotope.value_or(0),
                                        a.aromatic ? 1 : 0, a.formal_charge,  a.total_h(),
                                        mol.atom_in_ring(i) ? 1 : 0};
  }
  std::vector<int> ranks;
  rank_by(n, [&](int x, int y) { return inv[static_cast<std::size_t>(x)] < inv[static_cast<std::size_t>(y)]; },
          ranks);
  return ranks;
}

void refine(const MolGraph& mol, std::vector<int>& ranks) {
  const int n = mol.num_atoms();
  int distinct = count_distinct(ranks);
  std::vector<std::vector<int>> env(static_cast<std::size_t>(n));
  while (distinct < n) {
    for (int i = 0; i < n; ++i) {
      auto& e = env[static_cast<std::size_t>(i)];
      e.clear();
      for (int bi : mol.bonds_of(i)) {
        const Bond& b = mol.bond(bi);
        e.push_back(ranks[static_cast<std::size_t>(b.other(i))] * 8 + bond_code(b));
      }
      std::sort(e.begin(), e.end());
    }
    std::vector<int> next;
    const int now = rank_by(
        n,
        [&](int x, int y) {
          const int rx = ranks[static_cast<std::size_t>(x)];
          const int ry = ranks[static_cast<std::size_t>(y)];
          if (rx != ry) {
            return rx < ry;
          }
          return env[static_cast<std::size_t>(x)] < env[static_cast<std::size_t>(y)];
        },
        next);
    ranks = std::move(next);
    if (now == distinct) {
      break;
    }
    distinct = now;
  }
}

std::string atom_text(const MolGraph& mol, int i) {
  const Atom& a = mol.atom(i);
  if (a.atomic_number == kDummyAtom && a.formal_charge == 0 && !a.isotope) {
    return "*";
  }
  int sum = 0;
  for (int bi : mol.bonds_of(i)) {
    sum += mol.bond(bi).valence_contribution();
  }
  const std::string_view symbol = element_symbol(a.atomic_number);
  const bool organic = is_organic_subset(a.atomic_number) && a.formal_charge == 0 && !a.isotope &&
                       organic_default_h(a.atomic_number, a.aromatic, sum) == a.total_h();
  std::string s;
  if (organic) {
    s = symbol;
    if (a.aromatic) {
      s[0] = static_cast<char>(s[0] - 'A' + 'a');
    }
    return s;
  }
  s = "[";
  if (a.isotope) {
    s += std::to_string(*a.isotope);
  }
  std::string sym(symbol);
  if (a.aromatic) {
    sym[0] = static_cast<char>(sym[0] - 'A' + 'a');
  }
  s += sym;
  const int h = a.total_h();
  if (h > 0) {
    s += 'H';
    if (h > 1) {
      s += std::to_string(h);
    }
  }
  if (a.formal_charge != 0) {
    s += a.formal_charge > 0 ? '+' : '-';
    if (std::abs(a.formal_charge) > 1) {
      s += std::to_string(std::abs(a.formal_charge));
    }
  }
  s += ']';
  return s;
}

std::string bond_text(const MolGraph& mol, const Bond& b) {
  const bool both_aromatic = mol.atom(b.begin).aromatic && mol.atom(b.end).aromatic;
  if (b.aromatic) {
    return both_aromatic ? "" : ":";
  }
  switch (b.order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  if (digit < 10) {
    return std::string(1, static_cast<char>('0' + digit));
  }
  return "%" + std::to_string(digit);
}

class Writer {
 public:
  Writer(const MolGraph& mol, std::span<const int> rank)
      : mol_(mol),
        rank_(rank),
        kind_(static_cast<std::size_t>(mol.num_bonds()), 0),
        visited_(static_cast<std::size_t>(mol.num_atoms()), 0),
        children_(static_cast<std::size_t>(mol.num_atoms())),
        closures_(static_cast<std::size_t>(mol.num_atoms())),
        digit_of_(static_cast<std::size_t>(mol.num_bonds()), 0) {}

  std::string run() {
    std::vector<int> order(static_cast<std::size_t>(mol_.num_atoms()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return rank_[static_cast<std::size_t>(x)] < rank_[static_cast<std::size_t>(y)]; });
    std::string out;
    for (int start : order) {
      if (visited_[static_cast<std::size_t>(start)]) {
        continue;
      }
      discover(start);
      if (!out.empty()) {
        out += '.';
      }
      emit(start, out);
    }
    return out;
  }

 private:
  std::vector<int> sorted_bonds(int u) const {
    std::vector<int> bonds(mol_.bonds_of(u).begin(), mol_.bonds_of(u).end());
    std::sort(bonds.begin(), bonds.end(), [&](int x, int y) {
      return rank_[static_cast<std::size_t>(mol_.bond(x).other(u))] <
             rank_[static_cast<std::size_t>(mol_.bond(y).other(u))];
    });
    return bonds;
  }

  void discover(int u) {
    visited_[static_cast<std::size_t>(u)] = 1;
    for (int bi : sorted_bonds(u)) {
      if (kind_[static_cast<std::size_t>(bi)] != 0) {
        continue;
      }
      const int v = mol_.bond(bi).other(u);
      if (visited_[static_cast<std::size_t>(v)]) {
        kind_[static_cast<std::size_t>(bi)] = 2;
        closures_[static_cast<std::size_t>(u)].push_back(bi);
        closures_[static_cast<std::size_t>(v)].push_back(bi);
      } else {
        kind_[static_cast<std::size_t>(bi)] = 1;
        children_[static_cast<std::size_t>(u)].push_back(bi);
        discover(v);
      }
    }
  }

  int take_digit() {
    for (int d = 1;; ++d) {
      if (std::find(in_use_.begin(), in_use_.end(), d) == in_use_.end()) {
        in_use_.push_back(d);
        return d;
      }
    }
  }

  void emit(int u, std::string& out) {
    out += atom_text(mol_, u);

    auto& ring_bonds = closures_[static_cast<std::size_t>(u)];
    std::vector<int> closing;
    std::vector<int> opening;
    for (int bi : ring_bonds) {
      (digit_of_[static_cast<std::size_t>(bi)] > 0 ? closing : opening).push_back(bi);
    }
    std::sort(closing.begin(), closing.end(), [&](int x, int y) {
      return digit_of_[static_cast<std::size_t>(x)] < digit_of_[static_cast<std::size_t>(y)];
    });
    std::sort(opening.begin(), opening.end(), [&](int x, int y) {
      return rank_[static_cast<std::size_t>(mol_.bond(x).other(u))] <
             rank_[static_cast<std::size_t>(mol_.bond(y).other(u))];
    });
    for (int bi : closing) {
      const int digit = digit_of_[static_cast<std::size_t>(bi)];
      out += ring_label(digit);
      in_use_.erase(std::find(in_use_.begin(), in_use_.end(), digit));
    }
    for (int bi : opening) {
      const int digit = take_digit();
      digit_of_[static_cast<std::size_t>(bi)] = digit;
      out += bond_text(mol_, mol_.bond(bi));
      out += ring_label(digit);
    }

    const auto& kids = children_[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const Bond& b = mol_.bond(kids[k]);
      const bool last = k + 1 == kids.size();
      if (!last) {
        out += '(';
      }
      out += bond_text(mol_, b);
      emit(b.other(u), out);
      if (!last) {
        out += ')';
      }
    }
  }

  const MolGraph& mol_;
  std::span<const int> rank_;
  std::vector<char> kind_;
  std::vector<char> visited_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> closures_;
  std::vector<int> digit_of_;
  std::vector<int> in_use_;
};

class CanonicalSearch {
 public:
  explicit CanonicalSearch(const MolGraph& mol) : mol_(mol) {}

  void explore(std::vector<int> ranks) {
    refine(mol_, ranks);
    const int n = mol_.num_atoms();
    // Lowest-ranked class with more than one member.
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (int r : ranks) {
      ++count[static_cast<std::size_t>(r)];
    }
    int cell = -1;
    for (int r = 0; r < n; ++r) {
      if (count[static_cast<std::size_t>(r)] > 1) {
        cell = r;
        break;
      }
    }
    if (cell < 0) {
      ++leaves_;
      std::string s = write_smiles(mol_, ranks);
      if (best_rank_.empty() || s < best_) {
        best_ = std::move(s);
        best_rank_ = ranks;
      }
      return;
    }
    std::vector<int> tried;
    for (int m = 0; m < n; ++m) {
      if (ranks[static_cast<std::size_t>(m)] != cell) {
        continue;
      }
      if (twin_of_tried(m, tried)) {
        continue;
      }
      if (leaves_ >= kMaxLeaves) {
        return;
      }
      tried.push_back(m);
      std::vector<int> next = ranks;
      for (int x = 0; x < n; ++x) {
        if (x != m && ranks[static_cast<std::size_t>(x)] == cell) {
          next[static_cast<std::size_t>(x)] = cell + 1;
        }
      }
      explore(std::move(next));
    }
  }

  const std::vector<int>& best_rank() const { return best_rank_; }
  const std::string& best() const { return best_; }

 private:
  // Terminal atoms of one class hanging off the same neighbor are
  // interchangeable by an automorphism; exploring one of them suffices.
  bool twin_of_tried(int m, const std::vector<int>& tried) const {
    if (mol_.degree(m) != 1) {
      return false;
    }
    const int anchor = mol_.bond(mol_.bonds_of(m)[0]).other(m);
    return std::any_of(tried.begin(), tried.end(), [&](int t) {
      return mol_.degree(t) == 1 && mol_.bond(mol_.bonds_of(t)[0]).other(t) == anchor;
    });
  }

  const MolGraph& mol_;
  long leaves_ = 0;
  std::string best_;
  std::vector<int> best_rank_;
};

}  // namespace

std::vector<int> refine_classes(const MolGraph& sanitized) {
  std::vector<int> ranks = initial_ranks(sanitized);
  refine(sanitized, ranks);
  return ranks;
}

std::vector<int> canonical_ranks(const MolGraph& sanitized) {
  CanonicalSearch search(sanitized);
  search.explore(initial_ranks(sanitized));
  return search.best_rank();
}

std::string write_smiles(const MolGraph& sanitized, std::span<const int> rank) {
  return Writer(sanitized, rank).run();
}

std::string canonicalize(const MolGraph& mol) {
  const MolGraph s = sanitize(mol);
  CanonicalSearch search(s);
  search.explore(initial_ranks(s));
  return search.best();
}

}  // namespace mgforge::chem
