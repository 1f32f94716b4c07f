// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

// mgforge: pre-train, fine-tune, sample and evaluate conditional SMILES
// generators from the command line.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 model/checkpoint error,
// 5 internal. Failures print one JSON object on stderr:
//   {"error": {"category": "data", "kind": "UnknownToken", "message": "..."}}

#include <exception>
#include <iostream>
#include <new>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "mgforge/common/error.h"

namespace {

int exit_code(mgforge::ErrorCategory c) {
  switch (c) {
    case mgforge::ErrorCategory::kUsage:
      return 2;
    case mgforge::ErrorCategory::kData:
      return 3;
    case mgforge::ErrorCategory::kModel:
      return 4;
    case mgforge::ErrorCategory::kInternal:
      break;
  }
  return 5;
}

int report(const std::string& category, const std::string& kind, const std::string& message, int code) {
  const nlohmann::json doc = {{"error", {{"category", category}, {"kind", kind}, {"message", message}}}};
  std::cerr << doc.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees the same large buffers every step; keep
  // them in the heap rather than mapping them afresh.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"mgforge: conditional SMILES generation with a transformer decoder"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mgforge 0.1.0");
  mgforge::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    return report("usage", e.get_name(), e.what(), 2);
  }
  try {
    mgforge::cli::run_selected(app);
  } catch (const mgforge::Error& e) {
    return report(mgforge::to_string(e.category()), e.kind(), e.what(), exit_code(e.category()));
  } catch (const std::bad_alloc& e) {
    return report("internal", "OutOfMemory", e.what(), 5);
  } catch (const std::exception& e) {
    return report("internal", "Internal", e.what(), 5);
  }
  return 0;
}
