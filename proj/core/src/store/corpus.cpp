// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/store/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>

#include "mgforge/chem/sanitize.h"
#include "mgforge/chem/smiles.h"
#include "mgforge/common/error.h"

namespace mgforge::store {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) {
      return out;
    }
    start = comma + 1;
  }
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("FileNotFound", "cannot open " + path.string());
  }
  return in;
}

// Empty string when the SMILES is acceptable, otherwise the reason.
std::string check_smiles(const std::string& smiles) {
  try {
    const chem::ValidityVerdict v = chem::validate(chem::parse_smiles(smiles));
    return v.valid ? std::string() : v.reason;
  } catch (const Error& e) {
    return e.what();
  }
}

bool keep_split(const std::string& wanted, const std::string& row_split) {
  return wanted == "all" || lower(row_split) == wanted;
}

void admit(Corpus& corpus, const std::string& smiles, int condition, int line, const std::filesystem::path& path,
           const LoadOptions& options, LoadReport* report) {
  const std::string problem = check_smiles(smiles);
  if (!problem.empty()) {
    const std::string msg =
        path.string() + ":" + std::to_string(line) + ": unparseable SMILES '" + smiles + "': " + problem;
    if (!options.lenient) {
      throw data_error("UnparseableRow", msg);
    }
    if (report != nullptr) {
      ++report->rows_skipped;
      report->problems.push_back(msg);
    }
    return;
  }
  corpus.entries.push_back({smiles, condition});
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (lower(header[i]) == name) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> Corpus::smiles() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back(e.smiles);
  }
  return out;
}

ConditionMap::ConditionMap(const std::vector<std::string>& targets) : names_{"none"} {
  for (const auto& t : targets) {
    if (t.empty() || std::find(names_.begin(), names_.end(), t) != names_.end()) {
      throw data_error("InvalidTargets", "target names must be distinct, non-empty and not 'none': '" + t + "'");
    }
    names_.push_back(t);
  }
}

int ConditionMap::id_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw data_error("UnknownTargetName", "unknown target name '" + std::string(name) + "'");
  }
  return static_cast<int>(it - names_.begin());
}

const std::string& ConditionMap::name_of(int id) const {
  if (id < 0 || id >= size()) {
    throw data_error("UnknownCondition", "condition id " + std::to_string(id) + " is not registered");
  }
  return names_[static_cast<std::size_t>(id)];
}

Corpus load_pretrain(const std::filesystem::path& path, const LoadOptions& options, LoadReport* report) {
  std::ifstream in = open(path);
  Corpus corpus;
  corpus.split = options.split;
  std::string line;
  int line_no = 0;
  std::optional<std::size_t> smiles_col;
  std::optional<std::size_t> split_col;
  bool csv = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty()) {
      continue;
    }
    if (line_no == 1 && row.find(',') != std::string::npos) {
      csv = true;
      const auto header = split_csv(row);
      smiles_col = find_column(header, "smiles");
      split_col = find_column(header, "split");
      if (!smiles_col) {
        throw data_error("MissingColumn", path.string() + ": CSV header has no SMILES column");
      }
      continue;
    }
    if (report != nullptr) {
      ++report->rows_read;
    }
    if (!csv) {
      admit(corpus, row, 0, line_no, path, options, report);
      continue;
    }
    const auto fields = split_csv(row);
    if (fields.size() <= *smiles_col || (split_col && fields.size() <= *split_col)) {
      throw data_error("UnparseableRow", path.string() + ":" + std::to_string(line_no) + ": too few columns");
    }
    if (split_col && !keep_split(options.split, fields[*split_col])) {
      continue;
    }
    admit(corpus, fields[*smiles_col], 0, line_no, path, options, report);
  }
  return corpus;
}

Corpus load_finetune(const std::filesystem::path& path, const ConditionMap& conditions, const LoadOptions& options,
                     LoadReport* report) {
  std::ifstream in = open(path);
  Corpus corpus;
  corpus.split = options.split;
  std::string line;
  int line_no = 0;
  std::size_t smiles_col = 0;
  std::size_t target_col = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (line_no == 1) {
      const auto header = split_csv(row);
      const auto s = find_column(header, "smiles");
      const auto t = find_column(header, "target");
      if (!s || !t) {
        throw data_error("MissingColumn", path.string() + ": fine-tuning CSV needs smiles and target columns");
      }
      smiles_col = *s;
      target_col = *t;
      continue;
    }
    if (row.empty()) {
      continue;
    }
    if (report != nullptr) {
      ++report->rows_read;
    }
    const auto fields = split_csv(row);
    if (fields.size() <= std::max(smiles_col, target_col)) {
      throw data_error("UnparseableRow", path.string() + ":" + std::to_string(line_no) + ": too few columns");
    }
    const std::string& target = fields[target_col];
    if (target.empty() || target == "none") {
      throw data_error("UnknownTargetName",
                       path.string() + ":" + std::to_string(line_no) + ": empty or reserved target name");
    }
    admit(corpus, fields[smiles_col], conditions.id_of(target), line_no, path, options, report);
  }
  return corpus;
}

std::vector<std::string> scan_targets(const std::filesystem::path& path) {
  std::ifstream in = open(path);
  std::string line;
  std::vector<std::string> targets;
  std::optional<std::size_t> col;
  while (std::getline(in, line)) {
    const auto fields = split_csv(trim(line));
    if (!col) {
      col = find_column(fields, "target");
      if (!col) {
        throw data_error("MissingColumn", path.string() + ": fine-tuning CSV has no target column");
      }
      continue;
    }
    if (fields.size() > *col && !fields[*col].empty() &&
        std::find(targets.begin(), targets.end(), fields[*col]) == targets.end()) {
      targets.push_back(fields[*col]);
    }
  }
  return targets;
}

std::vector<std::string> read_lines(const std::filesystem::path& path, bool keep_empty) {
  std::ifstream in = open(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (keep_empty || !t.empty()) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace mgforge::store
