// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mgforge/chem/mol_graph.h"
#include "mgforge/common/rng.h"
#include "mgforge/model/transformer.h"

namespace mgforge::testing {

// File under the repository's data/ directory.
std::filesystem::path data_path(const std::string& name);

std::vector<std::string> read_smi(const std::string& name);

// A valid non-canonical rendering: DFS from random start atoms with random
// neighbor order.
std::string random_smiles(const chem::MolGraph& sanitized, Rng& rng);

// Same molecule with atom i moved to position perm[i].
chem::MolGraph permute_atoms(const chem::MolGraph& mol, std::span<const int> perm);

// Forward pass of `model` with each cross-attention sublayer replaced by the
// layer norm alone. Built from the public parameters and tensor ops.
tensor::Tensor<double> forward_without_cross(const model::Transformer<double>& model, std::span<const int> tokens,
                                             int batch, int length);

// Adds Normal(0, sigma) noise to every parameter except condition row 0, so
// layer norms and biases are away from their initial values.
template <typename T>
void jitter(model::Transformer<T>& model, double sigma, Rng& rng);

}  // namespace mgforge::testing
