// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace CLI {
class App;
}

namespace mgforge::cli {

// Adds pretrain, finetune, sample, eval, validate and fp-export.
void register_commands(CLI::App& app);
// Runs the subcommand chosen by the last parse. Throws mgforge::Error.
void run_selected(const CLI::App& app);

}  // namespace mgforge::cli
