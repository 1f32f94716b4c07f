// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "mgforge/chem/canonical.h"
#include "mgforge/chem/fragment.h"
#include "mgforge/chem/sanitize.h"
#include "mgforge/chem/smiles.h"
#include "mgforge/common/error.h"

namespace mgforge::eval {

std::optional<std::string> canonical_or_null(std::string_view smiles) {
  try {
    const chem::MolGraph mol = chem::parse_smiles(smiles);
    if (!chem::validate(mol)) {
      return std::nullopt;
    }
    return chem::canonicalize(mol);
  } catch (const Error&) {
    return std::nullopt;
  }
}

ValidityResult validity(std::span<const std::string> generated, int threads) {
  std::vector<std::optional<std::string>> canon(generated.size());
  parallel_for(generated.size(), threads, [&](std::size_t i) { canon[i] = canonical_or_null(generated[i]); });
  ValidityResult out;
  for (std::size_t i = 0; i < canon.size(); ++i) {
    if (canon[i]) {
      out.canonical.push_back(std::move(*canon[i]));
      out.valid_indices.push_back(i);
    }
  }
  out.fraction = generated.empty() ? 0.0 : static_cast<double>(out.canonical.size()) / static_cast<double>(generated.size());
  return out;
}

double unique_at(std::span<const std::string> valid_canonical, std::size_t k) {
  const std::size_t n = std::min(k, valid_canonical.size());
  if (n == 0) {
    return 0.0;
  }
  std::unordered_set<std::string_view> seen(valid_canonical.begin(), valid_canonical.begin() + static_cast<std::ptrdiff_t>(n));
  return static_cast<double>(seen.size()) / static_cast<double>(n);
}

double novelty(std::span<const std::string> valid_canonical, const std::unordered_set<std::string>& train) {
  std::unordered_set<std::string_view> distinct(valid_canonical.begin(), valid_canonical.end());
  if (distinct.empty()) {
    return 0.0;
  }
  std::size_t novel = 0;
  for (std::string_view s : distinct) {
    novel += train.count(std::string(s)) == 0 ? 1 : 0;
  }
  return static_cast<double>(novel) / static_cast<double>(distinct.size());
}

double snn(std::span<const chem::Fingerprint> generated, std::span<const chem::Fingerprint> reference, int threads) {
  if (reference.empty()) {
    throw data_error("EmptyReference", "SNN needs at least one reference fingerprint");
  }
  if (generated.empty()) {
    throw data_error("EmptyInput", "SNN needs at least one generated fingerprint");
  }
  std::vector<double> best(generated.size(), 0.0);
  parallel_for(generated.size(), threads, [&](std::size_t i) {
    double b = 0.0;
    for (const auto& r : reference) {
      b = std::max(b, chem::tanimoto(generated[i], r));
    }
    best[i] = b;
  });
  double total = 0.0;
  for (double b : best) {
    total += b;
  }
  return total / static_cast<double>(best.size());
}

FragmentCounts fragment_counts(std::span<const chem::MolGraph> mols) {
  FragmentCounts counts;
  for (const auto& m : mols) {
    for (auto& f : chem::fragment(m)) {
      ++counts[f];
    }
  }
  return counts;
}

double cosine(const FragmentCounts& a, const FragmentCounts& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [k, v] : a) {
    const double x = static_cast<double>(v);
    na += x * x;
    if (auto it = b.find(k); it != b.end()) {
      dot += x * static_cast<double>(it->second);
    }
  }
  for (const auto& [k, v] : b) {
    nb += static_cast<double>(v) * static_cast<double>(v);
  }
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double frag_similarity(std::span<const chem::MolGraph> generated, std::span<const chem::MolGraph> reference) {
  if (generated.empty() || reference.empty()) {
    throw data_error("EmptyInput", "fragment similarity needs two non-empty sets");
  }
  return cosine(fragment_counts(generated), fragment_counts(reference));
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw data_error("EmptyInput", "Wasserstein-1 needs two non-empty samples");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<std::int64_t>(x.size());
  const auto m = static_cast<std::int64_t>(y.size());
  // Walk the merged breakpoints i/n and j/m with exact integer comparison
  // (i*m vs j*n); on each piece both quantile functions are constant.
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t prev = 0;  // in units of 1/(n*m)
  double total = 0.0;
  while (i < n && j < m) {
    const std::int64_t next_a = (i + 1) * m;
    const std::int64_t next_b = (j + 1) * n;
    const std::int64_t next = std::min(next_a, next_b);
    total += static_cast<double>(next - prev) * std::abs(x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(j)]);
    prev = next;
    if (next_a == next) {
      ++i;
    }
    if (next_b == next) {
      ++j;
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(m));
}

}  // namespace mgforge::eval
