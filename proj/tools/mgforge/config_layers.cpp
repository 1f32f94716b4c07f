// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "config_layers.h"

#include <fstream>

#include "mgforge/common/error.h"

namespace mgforge::cli {

namespace {

Error config_error(const std::string& message) { return Error(ErrorCategory::kUsage, "InvalidConfig", message); }

}  // namespace

void ConfigLayers::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("FileNotFound", "cannot open config " + path.string());
  }
  nlohmann::json file;
  try {
    file = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(path.string() + ": " + e.what());
  }
  if (!file.is_object()) {
    throw config_error(path.string() + ": top level must be an object");
  }
  for (const auto& [name, body] : file.items()) {
    if (!doc_.contains(name)) {
      throw config_error(path.string() + ": unknown section '" + name + "'");
    }
    if (!body.is_object()) {
      throw config_error(path.string() + ": section '" + name + "' must be an object");
    }
    for (const auto& [key, value] : body.items()) {
      doc_[name][key] = value;
    }
  }
}

void ConfigLayers::apply_set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq) {
    throw config_error("--set expects section.key=value, got '" + assignment + "'");
  }
  const std::string name = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);
  if (!doc_.contains(name)) {
    throw config_error("--set: unknown section '" + name + "'");
  }
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  doc_[name][key] = std::move(value);
}

void ConfigLayers::apply_sets(const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    apply_set(a);
  }
}

}  // namespace mgforge::cli
