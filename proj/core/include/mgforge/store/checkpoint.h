// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgforge/model/transformer.h"
#include "mgforge/tokenizer/vocab.h"

namespace mgforge::store {

inline constexpr int kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[9] = "MGFORGE1";

// Adam moments in checkpoint order, one buffer per parameter.
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

struct Checkpoint {
  std::shared_ptr<model::Transformer<float>> model;
  tok::Vocab vocab;
  // Condition names by id; entry 0 is "none".
  std::vector<std::string> conditions{"none"};
  std::uint64_t seed = 0;
  std::optional<OptimizerState> optimizer;
  // Free-form provenance, e.g. the effective training configuration.
  nlohmann::json effective_config = nlohmann::json::object();
};

// File layout:
//   bytes 0-7   "MGFORGE1"
//   bytes 8-11  header length H, uint32 little-endian
//   next H      UTF-8 JSON header: format_version, model_config, vocab,
//               conditions, has_optimizer_state, optimizer_step, seed,
//               effective_config, payload_bytes and a tensors manifest of
//               {name, shape, offset, role} with byte offsets into the
//               payload
//   rest        little-endian IEEE-754 float32 values in manifest order:
//               every parameter, then (when present) every Adam m, then
//               every Adam v
// Throws data/model errors on I/O failure.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws kind "CorruptHeader", "PayloadLengthMismatch", "VersionMismatch" or
// "FileNotFound".
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mgforge::store
