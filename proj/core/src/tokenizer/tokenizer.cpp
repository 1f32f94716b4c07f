// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/tokenizer/tokenizer.h"

#include <cctype>
#include <string_view>

namespace mgforge::tok {

namespace {

constexpr std::string_view kSingles = "BCNOPSFIbcnops*-=#:/\\().0123456789";

std::string describe(std::string_view text, std::size_t at) {
  const char c = text[at];
  std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + std::to_string(c);
  return "unknown character '" + shown + "' at offset " + std::to_string(at);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view smiles) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < smiles.size()) {
    const char c = smiles[i];
    if (c == '[') {
      const std::size_t close = smiles.find(']', i + 1);
      if (close == std::string_view::npos) {
        throw TokenizeError(i, "unterminated bracket atom at offset " + std::to_string(i));
      }
      out.emplace_back(smiles.substr(i, close - i + 1));
      i = close + 1;
      continue;
    }
    if (c == '%') {
      if (i + 2 >= smiles.size() || !std::isdigit(static_cast<unsigned char>(smiles[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(smiles[i + 2]))) {
        throw TokenizeError(i, "'%' must be followed by two digits at offset " + std::to_string(i));
      }
      out.emplace_back(smiles.substr(i, 3));
      i += 3;
      continue;
    }
    if ((c == 'C' && i + 1 < smiles.size() && smiles[i + 1] == 'l') ||
        (c == 'B' && i + 1 < smiles.size() && smiles[i + 1] == 'r')) {
      out.emplace_back(smiles.substr(i, 2));
      i += 2;
      continue;
    }
    if (kSingles.find(c) == std::string_view::npos) {
      throw TokenizeError(i, describe(smiles, i));
    }
    out.emplace_back(1, c);
    ++i;
  }
  return out;
}

}  // namespace mgforge::tok
