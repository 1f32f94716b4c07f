// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace mgforge::chem {

inline constexpr int kDummyAtom = 0;  // '*' attachment point
inline constexpr int kHydrogen = 1;
inline constexpr int kBoron = 5;
inline constexpr int kCarbon = 6;
inline constexpr int kNitrogen = 7;
inline constexpr int kOxygen = 8;
inline constexpr int kFluorine = 9;
inline constexpr int kPhosphorus = 15;
inline constexpr int kSulfur = 16;
inline constexpr int kChlorine = 17;
inline constexpr int kBromine = 35;
inline constexpr int kIodine = 53;

// Returns the atomic number for a capitalized element symbol ("C", "Cl").
std::optional<int> element_from_symbol(std::string_view symbol);

std::string_view element_symbol(int atomic_number);

// Conventional IUPAC standard atomic weight, g/mol. Zero for the dummy atom.
double standard_weight(int atomic_number);

// Allowed valences of a neutral atom, ascending. Empty when the element has no
// valence model (any total up to kMaxGenericValence is accepted).
std::span<const int> default_valences(int atomic_number);

inline constexpr int kMaxGenericValence = 6;

// True for B C N O P S F Cl Br I.
bool is_organic_subset(int atomic_number);

// True for the elements that may be written as lowercase aromatic atoms.
bool may_be_aromatic(int atomic_number);

}  // namespace mgforge::chem
