// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/store/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mgforge/common/error.h"

namespace mgforge::store {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

Error ckpt_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorCategory::kModel, kind, msg);
}

const char* role_name(model::ParamRole r) { return r == model::ParamRole::kCondition ? "condition" : "weight"; }

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (!ckpt.model) {
    throw ckpt_error("InvalidCheckpoint", "checkpoint has no model");
  }
  auto params = ckpt.model->parameters();
  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  auto add = [&](const std::string& name, const tensor::Shape& shape, const char* role) {
    manifest.push_back({{"name", name}, {"shape", shape}, {"offset", offset}, {"role", role}});
    offset += 4 * tensor::numel(shape);
  };
  for (const auto& p : params) {
    add(p.name, p.tensor->shape(), role_name(p.role));
  }
  if (ckpt.optimizer) {
    if (ckpt.optimizer->m.size() != params.size() || ckpt.optimizer->v.size() != params.size()) {
      throw ckpt_error("InvalidCheckpoint", "optimizer state does not match the parameter list");
    }
    for (const auto& p : params) {
      add("adam_m." + p.name, p.tensor->shape(), "adam_m");
    }
    for (const auto& p : params) {
      add("adam_v." + p.name, p.tensor->shape(), "adam_v");
    }
  }
  const nlohmann::json header = {
      {"format_version", kCheckpointVersion},
      {"model_config", model::to_json(ckpt.model->config())},
      {"vocab", ckpt.vocab.to_json()},
      {"conditions", ckpt.conditions},
      {"has_optimizer_state", ckpt.optimizer.has_value()},
      {"optimizer_step", ckpt.optimizer ? ckpt.optimizer->step : 0},
      {"seed", ckpt.seed},
      {"effective_config", ckpt.effective_config},
      {"payload_bytes", offset},
      {"tensors", manifest},
  };
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw data_error("FileNotWritable", "cannot write " + path.string());
  }
  out.write(kCheckpointMagic, 8);
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  auto write_floats = [&](std::span<const float> v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
  };
  for (const auto& p : params) {
    write_floats(p.tensor->data());
  }
  if (ckpt.optimizer) {
    for (const auto& m : ckpt.optimizer->m) {
      write_floats(m);
    }
    for (const auto& v : ckpt.optimizer->v) {
      write_floats(v);
    }
  }
  if (!out) {
    throw data_error("FileNotWritable", "failed while writing " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw data_error("FileNotFound", "cannot open " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw ckpt_error("CorruptHeader", path.string() + " is not an mgforge checkpoint (bad magic)");
  }
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 4);
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) {
    throw ckpt_error("CorruptHeader", path.string() + ": header length exceeds file size");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(12, len));
  } catch (const nlohmann::json::exception& e) {
    throw ckpt_error("CorruptHeader", path.string() + ": header is not valid JSON: " + e.what());
  }
  Checkpoint ckpt;
  std::vector<nlohmann::json> manifest;
  std::uint64_t payload_bytes = 0;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw ckpt_error("VersionMismatch", path.string() + ": format_version " + std::to_string(version) +
                                              ", this build reads " + std::to_string(kCheckpointVersion));
    }
    const model::ModelConfig config = model::model_config_from_json(header.at("model_config"));
    ckpt.model = std::make_shared<model::Transformer<float>>(config);
    ckpt.vocab = tok::Vocab::from_json(header.at("vocab"));
    ckpt.conditions = header.at("conditions").get<std::vector<std::string>>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.effective_config = header.value("effective_config", nlohmann::json::object());
    payload_bytes = header.at("payload_bytes").get<std::uint64_t>();
    manifest = header.at("tensors").get<std::vector<nlohmann::json>>();
    if (header.at("has_optimizer_state").get<bool>()) {
      ckpt.optimizer = OptimizerState{};
      ckpt.optimizer->step = header.at("optimizer_step").get<std::int64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ckpt_error("CorruptHeader", path.string() + ": malformed header: " + e.what());
  } catch (const Error& e) {
    if (e.kind() == "VersionMismatch") {
      throw;
    }
    throw ckpt_error("CorruptHeader", path.string() + ": " + e.what());
  }
  const std::size_t payload = bytes.size() - 12 - len;
  if (payload != payload_bytes) {
    throw ckpt_error("PayloadLengthMismatch", path.string() + ": payload has " + std::to_string(payload) +
                                                  " bytes, header declares " + std::to_string(payload_bytes));
  }
  auto params = ckpt.model->parameters();
  const std::size_t expected = params.size() * (ckpt.optimizer ? 3 : 1);
  if (manifest.size() != expected) {
    throw ckpt_error("CorruptHeader", path.string() + ": manifest lists " + std::to_string(manifest.size()) +
                                          " tensors, expected " + std::to_string(expected));
  }
  const char* base = bytes.data() + 12 + len;
  std::uint64_t total = 0;
  auto read_into = [&](const nlohmann::json& entry, const std::string& name, const tensor::Shape& shape,
                       std::span<float> dst) {
    try {
      if (entry.at("name").get<std::string>() != name || entry.at("shape").get<tensor::Shape>() != shape) {
        throw ckpt_error("CorruptHeader", path.string() + ": manifest entry '" + entry.at("name").get<std::string>() +
                                              "' does not match the model layout (expected " + name + " " +
                                              tensor::to_string(shape) + ")");
      }
      const std::uint64_t off = entry.at("offset").get<std::uint64_t>();
      if (off + 4 * dst.size() > payload) {
        throw ckpt_error("PayloadLengthMismatch", path.string() + ": tensor " + name + " runs past the payload");
      }
      std::memcpy(dst.data(), base + off, 4 * dst.size());
      total += 4 * dst.size();
    } catch (const nlohmann::json::exception& e) {
      throw ckpt_error("CorruptHeader", path.string() + ": malformed manifest entry: " + e.what());
    }
  };
  std::size_t k = 0;
  for (auto& p : params) {
    read_into(manifest[k++], p.name, p.tensor->shape(), p.tensor->data());
  }
  if (ckpt.optimizer) {
    for (const char* prefix : {"adam_m.", "adam_v."}) {
      auto& dst = prefix[5] == 'm' ? ckpt.optimizer->m : ckpt.optimizer->v;
      for (auto& p : params) {
        dst.emplace_back(p.tensor->numel());
        read_into(manifest[k++], prefix + p.name, p.tensor->shape(), dst.back());
      }
    }
  }
  if (total != payload) {
    throw ckpt_error("PayloadLengthMismatch", path.string() + ": manifest covers " + std::to_string(total) +
                                                  " of " + std::to_string(payload) + " payload bytes");
  }
  return ckpt;
}

}  // namespace mgforge::store
