// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mgforge/common/error.h"

namespace mgforge::tok {

// Thrown by tokenize() (kind "UnknownCharacter") with the offending offset.
class TokenizeError : public Error {
 public:
  TokenizeError(std::size_t offset, const std::string& message)
      : Error(ErrorCategory::kData, "UnknownCharacter", message), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Greedy segmentation: "[...]" blocks, Cl and Br, single-letter atoms
// (B C N O P S F I b c n o p s *), bond symbols - = # : / \, parentheses,
// one token per ring digit, "%NN" and ".". Concatenating the result gives
// back the input.
std::vector<std::string> tokenize(std::string_view smiles);

}  // namespace mgforge::tok
