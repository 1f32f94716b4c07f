// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.h"

#include <numeric>

#include "mgforge/chem/canonical.h"
#include "mgforge/store/corpus.h"
#include "mgforge/tensor/ops.h"

#ifndef MGFORGE_DATA_DIR
#error "MGFORGE_DATA_DIR must point at the data/ directory"
#endif

namespace mgforge::testing {

std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(MGFORGE_DATA_DIR) / name; }

std::vector<std::string> read_smi(const std::string& name) { return store::read_lines(data_path(name)); }

std::string random_smiles(const chem::MolGraph& sanitized, Rng& rng) {
  std::vector<int> rank(static_cast<std::size_t>(sanitized.num_atoms()));
  std::iota(rank.begin(), rank.end(), 0);
  shuffle<int>(rank, rng);
  return chem::write_smiles(sanitized, rank);
}

chem::MolGraph permute_atoms(const chem::MolGraph& mol, std::span<const int> perm) {
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  }
  chem::MolGraph out;
  for (int slot = 0; slot < mol.num_atoms(); ++slot) {
    out.add_atom(mol.atom(inverse[static_cast<std::size_t>(slot)]));
  }
  for (const auto& b : mol.bonds()) {
    const int id = out.add_bond(perm[static_cast<std::size_t>(b.begin)], perm[static_cast<std::size_t>(b.end)], b.order,
                                b.stereo);
    out.bond(id).aromatic = b.aromatic;
  }
  out.set_has_dot(mol.has_dot());
  out.update_ring_info();
  return out;
}

tensor::Tensor<double> forward_without_cross(const model::Transformer<double>& model, std::span<const int> tokens,
                                             int batch, int length) {
  using namespace tensor;
  const auto& c = model.config();
  std::vector<int> positions(static_cast<std::size_t>(length));
  std::iota(positions.begin(), positions.end(), 0);
  Tensor<double> z =
      add(embedding(model.token_embedding(), tokens, {batch, length}), embedding(model.position_embedding(), positions, {length}));
  for (const auto& lp : model.layers()) {
    z = layernorm_last(add(z, model::multi_head_attention(lp.self_attn, z, z, c.n_heads, c.head_dim_k(), c.head_dim_v(), true)),
                       lp.ln1_gamma, lp.ln1_beta);
    z = layernorm_last(z, lp.ln2_gamma, lp.ln2_beta);
    const Tensor<double> hidden = relu(linear(z, lp.ffn_w1, lp.ffn_b1));
    z = layernorm_last(add(z, linear(hidden, lp.ffn_w2, lp.ffn_b2)), lp.ln3_gamma, lp.ln3_beta);
  }
  return linear(z, model.head_weight(), model.head_bias());
}

template <typename T>
void jitter(model::Transformer<T>& model, double sigma, Rng& rng) {
  for (auto& p : model.parameters()) {
    auto data = p.tensor->data();
    const std::size_t skip = p.role == model::ParamRole::kCondition
                                 ? static_cast<std::size_t>(model.config().n_condition_slots * model.config().d_model)
                                 : 0;
    for (std::size_t i = skip; i < data.size(); ++i) {
      data[i] += static_cast<T>(sigma * rng.normal());
    }
  }
}

template void jitter<float>(model::Transformer<float>&, double, Rng&);
template void jitter<double>(model::Transformer<double>&, double, Rng&);

}  // namespace mgforge::testing
