// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/common/error.h"

#include <utility>

namespace mgforge {

Error::Error(ErrorCategory category, std::string kind, const std::string& message)
    : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kUsage:
      return "usage";
    case ErrorCategory::kData:
      return "data";
    case ErrorCategory::kModel:
      return "model";
    case ErrorCategory::kInternal:
      return "internal";
  }
  return "internal";
}

}  // namespace mgforge
