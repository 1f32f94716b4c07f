// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mgforge::eval {

struct Histogram {
  std::vector<double> edges;  // bins + 1, ascending
  std::vector<std::int64_t> count_gen;
  std::vector<std::int64_t> count_ref;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Label under which the fragment metric is reported. The fragments come from
// a simplified cut rule, so values are not comparable with BRICS-based ones.
inline constexpr const char* kFragLabel = "frag (surrogate)";

struct EvalReport {
  std::int64_t n_generated = 0;
  std::int64_t n_valid = 0;
  double valid = 0.0;
  double unique_at_1k = 0.0;
  double unique_at_10k = 0.0;
  double novelty = 0.0;
  double snn = 0.0;
  double frag = 0.0;
  int fingerprint_radius = 2;
  int fingerprint_width = 1024;
  std::map<std::string, double> property_w1;
  std::map<std::string, Histogram> histograms;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

nlohmann::json to_json(const EvalReport& report);
// Throws data_error "CorruptReport" on a missing or mistyped field.
EvalReport eval_report_from_json(const nlohmann::json& doc);

struct ReportOptions {
  int threads = 1;
  int fingerprint_radius = 2;
  int fingerprint_width = 1024;
  int histogram_bins = 20;
};

// MOSES-style bundle. Validity is over every generated entry (a set
// `truncated` flag counts as invalid); the other metrics use only the valid
// ones. Novelty is against `train_ref`; SNN, frag, W1 and histograms are
// against `test_ref`. With no valid sample the valid-only metrics are 0 and
// property_w1 is empty. Throws data_error "InvalidReference" when a
// reference SMILES is invalid and "EmptyReference" for an empty test_ref.
EvalReport full_report(std::span<const std::string> generated, std::span<const bool> truncated,
                       std::span<const std::string> train_ref, std::span<const std::string> test_ref,
                       const ReportOptions& options = {});

// bin_left,bin_right,count_gen,count_ref (one block per property, preceded
// by a property column).
void write_histograms_csv(const EvalReport& report, std::ostream& out);

// Header "smiles,label,b0..b{width-1}" then one row per molecule with its
// canonical SMILES. Throws data_error "InvalidMolecule" for an invalid input
// and "InvalidInput" when labels and molecules differ in length.
void fp_export(std::span<const std::string> smiles, std::span<const std::string> labels, std::ostream& out,
               int radius = 2, int width = 1024);
void fp_export(std::span<const std::string> smiles, std::span<const std::string> labels,
               const std::filesystem::path& path, int radius = 2, int width = 1024);

}  // namespace mgforge::eval
