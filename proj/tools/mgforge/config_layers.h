// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mgforge::cli {

// Effective configuration, built in layers: built-in defaults, then the
// --config file, then --set overrides, then dedicated flags.
class ConfigLayers {
 public:
  explicit ConfigLayers(nlohmann::json defaults) : doc_(std::move(defaults)) {}

  // Merges a JSON file whose top-level keys are section names. Unknown
  // sections are rejected (usage error "InvalidConfig").
  void merge_file(const std::filesystem::path& path);
  // "section.key=value"; value is parsed as JSON, falling back to a string.
  void apply_set(const std::string& assignment);
  void apply_sets(const std::vector<std::string>& assignments);

  template <typename V>
  void set(const std::string& section, const std::string& key, const V& value) {
    doc_[section][key] = value;
  }

  const nlohmann::json& section(const std::string& name) const { return doc_.at(name); }
  const nlohmann::json& doc() const { return doc_; }

 private:
  nlohmann::json doc_;
};

}  // namespace mgforge::cli
