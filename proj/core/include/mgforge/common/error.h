// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mgforge {

// Coarse error classes; the CLI maps each one to an exit code.
enum class ErrorCategory {
  kUsage,
  kData,
  kModel,
  kInternal,
};

// Base for every error thrown by the library. `kind()` is a stable
// machine-readable tag such as "UnclosedRing" or "ShapeMismatch".
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string kind, const std::string& message);

  ErrorCategory category() const noexcept { return category_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorCategory category_;
  std::string kind_;
};

inline Error data_error(std::string kind, const std::string& message) {
  return Error(ErrorCategory::kData, std::move(kind), message);
}

inline Error model_error(std::string kind, const std::string& message) {
  return Error(ErrorCategory::kModel, std::move(kind), message);
}

const char* to_string(ErrorCategory category) noexcept;

}  // namespace mgforge
