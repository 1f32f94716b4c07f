// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mgforge::store {

struct CorpusEntry {
  std::string smiles;
  int condition = 0;

  friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
  friend auto operator<=>(const CorpusEntry&, const CorpusEntry&) = default;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  // "train", "test" or "all".
  std::string split = "train";

  std::vector<std::string> smiles() const;
};

// Condition names by id. Id 0 is always "none" (unconditional); targets are
// numbered from 1 in the order given.
class ConditionMap {
 public:
  ConditionMap() : names_{"none"} {}
  explicit ConditionMap(const std::vector<std::string>& targets);

  int size() const { return static_cast<int>(names_.size()); }
  // Throws data_error("UnknownTargetName").
  int id_of(std::string_view name) const;
  const std::string& name_of(int id) const;
  const std::vector<std::string>& names() const { return names_; }
  // Ids 1..size()-1.
  std::vector<std::string> targets() const { return {names_.begin() + 1, names_.end()}; }

 private:
  std::vector<std::string> names_;
};

struct LoadOptions {
  // Rows kept: "train", "test", or "all". For plain text files every line
  // gets this tag.
  std::string split = "train";
  // Skip (and count) rows whose SMILES do not parse and validate instead of
  // failing.
  bool lenient = false;
};

struct LoadReport {
  int rows_read = 0;
  int rows_skipped = 0;
  std::vector<std::string> problems;
};

// CSV with a SMILES column and optional SPLIT column (a header line with a
// comma marks the CSV form), or plain text with one SMILES per line. Every
// entry gets condition 0. A row whose SPLIT is not the requested split is
// left out. Throws data_error("MissingColumn") or
// data_error("UnparseableRow") naming the 1-based line.
Corpus load_pretrain(const std::filesystem::path& path, const LoadOptions& options = {},
                     LoadReport* report = nullptr);

// CSV with columns smiles,target. Throws data_error("UnknownTargetName") for
// empty or unmapped targets, plus the load_pretrain errors.
Corpus load_finetune(const std::filesystem::path& path, const ConditionMap& conditions,
                     const LoadOptions& options = {}, LoadReport* report = nullptr);

// Distinct target names in a fine-tuning CSV, in order of first appearance.
std::vector<std::string> scan_targets(const std::filesystem::path& path);

// One entry per line with surrounding whitespace removed. Blank lines are
// dropped unless keep_empty is set (generated sets may contain empty
// strings); a final newline never adds an entry.
std::vector<std::string> read_lines(const std::filesystem::path& path, bool keep_empty = false);

}  // namespace mgforge::store
