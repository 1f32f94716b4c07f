// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/eval/report.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mgforge/chem/canonical.h"
#include "mgforge/chem/descriptors.h"
#include "mgforge/chem/fingerprint.h"
#include "mgforge/chem/sanitize.h"
#include "mgforge/chem/smiles.h"
#include "mgforge/common/error.h"
#include "mgforge/eval/metrics.h"

namespace mgforge::eval {

namespace {

using nlohmann::json;

struct Analyzed {
  std::string canonical;
  chem::MolGraph mol;
  chem::Fingerprint fp;
  std::array<double, 5> desc{};
};

std::optional<Analyzed> analyze(const std::string& smiles, const ReportOptions& opt) {
  try {
    chem::MolGraph mol = chem::parse_smiles(smiles);
    if (!chem::validate(mol)) {
      return std::nullopt;
    }
    Analyzed a;
    a.canonical = chem::canonicalize(mol);
    a.fp = chem::fingerprint(mol, opt.fingerprint_radius, opt.fingerprint_width);
    a.desc = chem::as_array(chem::simple_descriptors(mol));
    a.mol = std::move(mol);
    return a;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<std::optional<Analyzed>> analyze_all(std::span<const std::string> smiles, const ReportOptions& opt) {
  std::vector<std::optional<Analyzed>> out(smiles.size());
  parallel_for(smiles.size(), opt.threads, [&](std::size_t i) { out[i] = analyze(smiles[i], opt); });
  return out;
}

std::vector<Analyzed> require_valid(std::span<const std::string> smiles, const ReportOptions& opt,
                                    const char* what) {
  auto all = analyze_all(smiles, opt);
  std::vector<Analyzed> out;
  out.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i]) {
      throw data_error("InvalidReference", std::string(what) + " row " + std::to_string(i + 1) + " ('" + smiles[i] +
                                               "') is not a valid molecule");
    }
    out.push_back(std::move(*all[i]));
  }
  return out;
}

Histogram make_histogram(std::span<const double> gen, std::span<const double> ref, int bins) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : gen) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : ref) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) {
    h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  }
  h.edges.back() = hi;
  auto fill = [&](std::span<const double> values, std::vector<std::int64_t>& counts) {
    counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
      // Bins are [left, right) except the last, which includes hi.
      const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
      auto b = static_cast<std::ptrdiff_t>(it - h.edges.begin()) - 1;
      b = std::clamp<std::ptrdiff_t>(b, 0, bins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
  };
  fill(gen, h.count_gen);
  fill(ref, h.count_ref);
  return h;
}

template <typename V>
V field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw data_error("CorruptReport", std::string("report is missing '") + key + "'");
  }
  try {
    return doc.at(key).get<V>();
  } catch (const json::exception& e) {
    throw data_error("CorruptReport", std::string("report field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const EvalReport& r) {
  json hist = json::object();
  for (const auto& [name, h] : r.histograms) {
    hist[name] = {{"edges", h.edges}, {"count_gen", h.count_gen}, {"count_ref", h.count_ref}};
  }
  return {{"n_generated", r.n_generated},
          {"n_valid", r.n_valid},
          {"valid", r.valid},
          {"unique_at_1k", r.unique_at_1k},
          {"unique_at_10k", r.unique_at_10k},
          {"novelty", r.novelty},
          {"snn", r.snn},
          {kFragLabel, r.frag},
          {"fingerprint", {{"radius", r.fingerprint_radius}, {"width", r.fingerprint_width}}},
          {"property_w1", r.property_w1},
          {"histograms", hist}};
}

EvalReport eval_report_from_json(const json& doc) {
  EvalReport r;
  r.n_generated = field<std::int64_t>(doc, "n_generated");
  r.n_valid = field<std::int64_t>(doc, "n_valid");
  r.valid = field<double>(doc, "valid");
  r.unique_at_1k = field<double>(doc, "unique_at_1k");
  r.unique_at_10k = field<double>(doc, "unique_at_10k");
  r.novelty = field<double>(doc, "novelty");
  r.snn = field<double>(doc, "snn");
  r.frag = field<double>(doc, kFragLabel);
  const json fp = field<json>(doc, "fingerprint");
  r.fingerprint_radius = field<int>(fp, "radius");
  r.fingerprint_width = field<int>(fp, "width");
  r.property_w1 = field<std::map<std::string, double>>(doc, "property_w1");
  const json hists = field<json>(doc, "histograms");
  for (const auto& [name, h] : hists.items()) {
    Histogram hg;
    hg.edges = field<std::vector<double>>(h, "edges");
    hg.count_gen = field<std::vector<std::int64_t>>(h, "count_gen");
    hg.count_ref = field<std::vector<std::int64_t>>(h, "count_ref");
    if (hg.edges.size() != hg.count_gen.size() + 1 || hg.count_gen.size() != hg.count_ref.size()) {
      throw data_error("CorruptReport", "histogram '" + name + "' has inconsistent lengths");
    }
    r.histograms.emplace(name, std::move(hg));
  }
  if (r.n_valid > r.n_generated || r.n_valid < 0) {
    throw data_error("CorruptReport", "n_valid must lie in [0, n_generated]");
  }
  return r;
}

EvalReport full_report(std::span<const std::string> generated, std::span<const bool> truncated,
                       std::span<const std::string> train_ref, std::span<const std::string> test_ref,
                       const ReportOptions& options) {
  if (!truncated.empty() && truncated.size() != generated.size()) {
    throw Error(ErrorCategory::kUsage, "InvalidInput", "truncated flags must match the generated list");
  }
  if (test_ref.empty()) {
    throw data_error("EmptyReference", "the test reference set is empty");
  }
  EvalReport r;
  r.fingerprint_radius = options.fingerprint_radius;
  r.fingerprint_width = options.fingerprint_width;
  r.n_generated = static_cast<std::int64_t>(generated.size());

  auto gen_all = analyze_all(generated, options);
  std::vector<Analyzed> gen;
  for (std::size_t i = 0; i < gen_all.size(); ++i) {
    if (gen_all[i] && (truncated.empty() || !truncated[i])) {
      gen.push_back(std::move(*gen_all[i]));
    }
  }
  gen_all.clear();
  r.n_valid = static_cast<std::int64_t>(gen.size());
  r.valid = generated.empty() ? 0.0 : static_cast<double>(r.n_valid) / static_cast<double>(r.n_generated);

  std::unordered_set<std::string> train;
  {
    std::vector<std::optional<std::string>> canon(train_ref.size());
    parallel_for(train_ref.size(), options.threads, [&](std::size_t i) { canon[i] = canonical_or_null(train_ref[i]); });
    for (std::size_t i = 0; i < canon.size(); ++i) {
      if (!canon[i]) {
        throw data_error("InvalidReference", "train row " + std::to_string(i + 1) + " is not a valid molecule");
      }
      train.insert(std::move(*canon[i]));
    }
  }
  const std::vector<Analyzed> test = require_valid(test_ref, options, "test");

  std::vector<std::array<double, 5>> gen_desc;
  std::vector<std::array<double, 5>> ref_desc;
  for (const auto& t : test) {
    ref_desc.push_back(t.desc);
  }
  if (!gen.empty()) {
    std::vector<std::string> canon;
    std::vector<chem::Fingerprint> gen_fps;
    std::vector<chem::MolGraph> gen_mols;
    for (const auto& g : gen) {
      canon.push_back(g.canonical);
      gen_fps.push_back(g.fp);
      gen_mols.push_back(g.mol);
      gen_desc.push_back(g.desc);
    }
    std::vector<chem::Fingerprint> ref_fps;
    std::vector<chem::MolGraph> ref_mols;
    for (const auto& t : test) {
      ref_fps.push_back(t.fp);
      ref_mols.push_back(t.mol);
    }
    r.unique_at_1k = unique_at(canon, 1000);
    r.unique_at_10k = unique_at(canon, 10000);
    r.novelty = novelty(canon, train);
    r.snn = snn(gen_fps, ref_fps, options.threads);
    r.frag = frag_similarity(gen_mols, ref_mols);
  }
  for (std::size_t p = 0; p < chem::kDescriptorNames.size(); ++p) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& d : gen_desc) {
      a.push_back(d[p]);
    }
    for (const auto& d : ref_desc) {
      b.push_back(d[p]);
    }
    const std::string name(chem::kDescriptorNames[p]);
    if (!a.empty()) {
      r.property_w1[name] = wasserstein1(a, b);
    }
    r.histograms[name] = make_histogram(a, b, options.histogram_bins);
  }
  return r;
}

void write_histograms_csv(const EvalReport& report, std::ostream& out) {
  out << "property,bin_left,bin_right,count_gen,count_ref\n";
  out.precision(17);
  for (const auto& [name, h] : report.histograms) {
    for (std::size_t b = 0; b < h.count_gen.size(); ++b) {
      out << name << ',' << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.count_gen[b] << ',' << h.count_ref[b]
          << '\n';
    }
  }
}

void fp_export(std::span<const std::string> smiles, std::span<const std::string> labels, std::ostream& out,
               int radius, int width) {
  if (smiles.size() != labels.size()) {
    throw Error(ErrorCategory::kUsage, "InvalidInput", "one label per molecule is required");
  }
  out << "smiles,label";
  for (int b = 0; b < width; ++b) {
    out << ",b" << b;
  }
  out << '\n';
  std::string row;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    chem::MolGraph mol;
    try {
      mol = chem::parse_smiles(smiles[i]);
    } catch (const Error&) {
      throw data_error("InvalidMolecule", "row " + std::to_string(i + 1) + " ('" + smiles[i] + "') does not parse");
    }
    if (!chem::validate(mol)) {
      throw data_error("InvalidMolecule", "row " + std::to_string(i + 1) + " ('" + smiles[i] + "') is not valid");
    }
    const chem::Fingerprint fp = chem::fingerprint(mol, radius, width);
    row = chem::canonicalize(mol);
    row += ',';
    row += labels[i];
    for (int b = 0; b < width; ++b) {
      row += fp.test(b) ? ",1" : ",0";
    }
    row += '\n';
    out << row;
  }
}

void fp_export(std::span<const std::string> smiles, std::span<const std::string> labels,
               const std::filesystem::path& path, int radius, int width) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw data_error("FileNotWritable", "cannot write " + path.string());
  }
  fp_export(smiles, labels, out, radius, width);
}

}  // namespace mgforge::eval
