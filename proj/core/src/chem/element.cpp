// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/chem/element.h"

#include <algorithm>
#include <array>

namespace mgforge::chem {
namespace {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  double weight;
};

constexpr std::array<ElementInfo, 63> kElements = {{
    {0, "*", 0.0},         {1, "H", 1.008},       {2, "He", 4.0026},
    {3, "Li", 6.94},       {4, "Be", 9.0122},     {5, "B", 10.81},
    {6, "C", 12.011},      {7, "N", 14.007},      {8, "O", 15.999},
    {9, "F", 18.998},      {10, "Ne", 20.180},    {11, "Na", 22.990},
    {12, "Mg", 24.305},    {13, "Al", 26.982},    {14, "Si", 28.085},
    {15, "P", 30.974},     {16, "S", 32.06},      {17, "Cl", 35.45},
    {18, "Ar", 39.95},     {19, "K", 39.098},     {20, "Ca", 40.078},
    {21, "Sc", 44.956},    {22, "Ti", 47.867},    {23, "V", 50.942},
    {24, "Cr", 51.996},    {25, "Mn", 54.938},    {26, "Fe", 55.845},
    {27, "Co", 58.933},    {28, "Ni", 58.693},    {29, "Cu", 63.546},
    {30, "Zn", 65.38},     {31, "Ga", 69.723},    {32, "Ge", 72.630},
    {33, "As", 74.922},    {34, "Se", 78.971},    {35, "Br", 79.904},
    {36, "Kr", 83.798},    {37, "Rb", 85.468},    {38, "Sr", 87.62},
    {39, "Y", 88.906},     {40, "Zr", 91.224},    {41, "Nb", 92.906},
    {42, "Mo", 95.95},     {43, "Tc", 97.0},      {44, "Ru", 101.07},
    {45, "Rh", 102.91},    {46, "Pd", 106.42},    {47, "Ag", 107.87},
    {48, "Cd", 112.41},    {49, "In", 114.82},    {50, "Sn", 118.71},
    {51, "Sb", 121.76},    {52, "Te", 127.60},    {53, "I", 126.90},
    {54, "Xe", 131.29},    {55, "Cs", 132.91},    {56, "Ba", 137.33},
    {78, "Pt", 195.08},    {79, "Au", 196.97},    {80, "Hg", 200.59},
    {81, "Tl", 204.38},    {82, "Pb", 207.2},     {83, "Bi", 208.98},
}};

constexpr std::array<int, 1> kValenceOne = {1};
constexpr std::array<int, 1> kValenceTwo = {2};
constexpr std::array<int, 1> kValenceThree = {3};
constexpr std::array<int, 1> kValenceFour = {4};
constexpr std::array<int, 2> kPhosphorusValences = {3, 5};
constexpr std::array<int, 3> kSulfurValences = {2, 4, 6};

const ElementInfo* find(int atomic_number) {
  const auto it = std::find_if(kElements.begin(), kElements.end(), [&](const ElementInfo& e) {
    return e.atomic_number == atomic_number;
  });
  return it == kElements.end() ? nullptr : &*it;
}

}  // namespace

std::optional<int> element_from_symbol(std::string_view symbol) {
  if (symbol == "*") {
    return std::nullopt;
  }
  for (const ElementInfo& e : kElements) {
    if (e.symbol == symbol) {
      return e.atomic_number;
    }
  }
  return std::nullopt;
}

std::string_view element_symbol(int atomic_number) {
  const ElementInfo* info = find(atomic_number);
  return info ? info->symbol : std::string_view("?");
}

double standard_weight(int atomic_number) {
  const ElementInfo* info = find(atomic_number);
  return info ? info->weight : 0.0;
}

std::span<const int> default_valences(int atomic_number) {
  switch (atomic_number) {
    case kHydrogen:
    case kFluorine:
    case kChlorine:
    case kBromine:
    case kIodine:
      return kValenceOne;
    case kOxygen:
      return kValenceTwo;
    case kBoron:
    case kNitrogen:
      return kValenceThree;
    case kCarbon:
      return kValenceFour;
    case kPhosphorus:
      return kPhosphorusValences;
    case kSulfur:
      return kSulfurValences;
    default:
      return {};
  }
}

bool is_organic_subset(int z) {
  switch (z) {
    case kBoron:
    case kCarbon:
    case kNitrogen:
    case kOxygen:
    case kPhosphorus:
    case kSulfur:
    case kFluorine:
    case kChlorine:
    case kBromine:
    case kIodine:
      return true;
    default:
      return false;
  }
}

bool may_be_aromatic(int z) {
  switch (z) {
    case kBoron:
    case kCarbon:
    case kNitrogen:
    case kOxygen:
    case kPhosphorus:
    case kSulfur:
      return true;
    default:
      return false;
  }
}

}  // namespace mgforge::chem
