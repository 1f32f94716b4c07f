// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace mgforge::model {

enum class Precision { kFloat32, kFloat64 };

const char* to_string(Precision p);
// Accepts "float32"/"fp32"/"float64"/"fp64". Throws kind "InvalidConfig".
Precision precision_from_string(const std::string& s);

struct ModelConfig {
  int n_layers = 4;
  int n_heads = 8;
  int d_model = 256;
  // Per-head query/key and value widths; 0 means d_model / n_heads.
  int d_k = 0;
  int d_v = 0;
  int d_ffn = 1024;
  int max_len = 128;
  int vocab_size = 0;
  // Row 0 is the unconditional (all-zero) embedding.
  int n_conditions = 1;
  // Condition memory slots per condition.
  int n_condition_slots = 1;
  Precision precision = Precision::kFloat32;

  int head_dim_k() const { return d_k > 0 ? d_k : d_model / n_heads; }
  int head_dim_v() const { return d_v > 0 ? d_v : d_model / n_heads; }

  // Throws kind "InvalidConfig" naming the offending field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// The small configuration used throughout the tests.
ModelConfig test_config(int vocab_size);

// Number of learnable scalars, condition table included.
std::int64_t count_params(const ModelConfig& config);

nlohmann::json to_json(const ModelConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& doc, ModelConfig base = {});

}  // namespace mgforge::model
