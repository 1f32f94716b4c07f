// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/model/config.h"

#include <nlohmann/json.hpp>

#include "mgforge/common/error.h"

namespace mgforge::model {

namespace {

Error invalid(const std::string& what) { return Error(ErrorCategory::kUsage, "InvalidConfig", what); }

}  // namespace

const char* to_string(Precision p) { return p == Precision::kFloat64 ? "float64" : "float32"; }

Precision precision_from_string(const std::string& s) {
  if (s == "float32" || s == "fp32") {
    return Precision::kFloat32;
  }
  if (s == "float64" || s == "fp64") {
    return Precision::kFloat64;
  }
  throw invalid("unknown precision '" + s + "' (expected float32 or float64)");
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) {
      throw invalid(std::string(name) + " must be positive, got " + std::to_string(v));
    }
  };
  if (n_layers < 0) {
    throw invalid("n_layers must be >= 0");
  }
  positive(n_heads, "n_heads");
  positive(d_model, "d_model");
  positive(d_ffn, "d_ffn");
  positive(max_len, "max_len");
  positive(n_conditions, "n_conditions");
  positive(n_condition_slots, "n_condition_slots");
  if (vocab_size < 5) {
    throw invalid("vocab_size must be at least 5, got " + std::to_string(vocab_size));
  }
  if (d_k < 0 || d_v < 0) {
    throw invalid("d_k and d_v must be >= 0");
  }
  if ((d_k == 0 || d_v == 0) && d_model % n_heads != 0) {
    throw invalid("d_model " + std::to_string(d_model) + " is not divisible by n_heads " + std::to_string(n_heads));
  }
}

ModelConfig test_config(int vocab_size) {
  ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 16;
  c.d_ffn = 64;
  c.max_len = 64;
  c.vocab_size = vocab_size;
  return c;
}

std::int64_t count_params(const ModelConfig& c) {
  const std::int64_t d = c.d_model;
  const std::int64_t qk = static_cast<std::int64_t>(c.n_heads) * c.head_dim_k();
  const std::int64_t vv = static_cast<std::int64_t>(c.n_heads) * c.head_dim_v();
  const std::int64_t attention = 2 * d * qk + d * vv + vv * d;
  const std::int64_t layer = 2 * attention + 3 * 2 * d + d * c.d_ffn + c.d_ffn + c.d_ffn * d + d;
  return c.vocab_size * d + c.max_len * d + static_cast<std::int64_t>(c.n_conditions) * c.n_condition_slots * d +
         c.n_layers * layer + d * c.vocab_size + c.vocab_size;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"n_layers", c.n_layers},     {"n_heads", c.n_heads},
          {"d_model", c.d_model},       {"d_k", c.d_k},
          {"d_v", c.d_v},      {"d_ffn", c.d_ffn},
          {"max_len", c.max_len},       {"vocab_size", c.vocab_size},
          {"n_conditions", c.n_conditions}, {"n_condition_slots", c.n_condition_slots},
          {"precision", to_string(c.precision)}};
}

ModelConfig model_config_from_json(const nlohmann::json& doc, ModelConfig c) {
  if (!doc.is_object()) {
    throw invalid("model config must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "n_layers") {
        c.n_layers = value.get<int>();
      } else if (key == "n_heads") {
        c.n_heads = value.get<int>();
      } else if (key == "d_model") {
        c.d_model = value.get<int>();
      } else if (key == "d_k") {
        c.d_k = value.get<int>();
      } else if (key == "d_v") {
        c.d_v = value.get<int>();
      } else if (key == "d_ffn") {
        c.d_ffn = value.get<int>();
      } else if (key == "max_len") {
        c.max_len = value.get<int>();
      } else if (key == "vocab_size") {
        c.vocab_size = value.get<int>();
      } else if (key == "n_conditions") {
        c.n_conditions = value.get<int>();
      } else if (key == "n_condition_slots") {
        c.n_condition_slots = value.get<int>();
      } else if (key == "precision") {
        c.precision = precision_from_string(value.get<std::string>());
      } else {
        throw invalid("unknown model config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw invalid("model config key '" + key + "' has the wrong type");
    }
  }
  return c;
}

}  // namespace mgforge::model
