// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.h"
#include "mgforge/chem/canonical.h"
#include "mgforge/chem/fingerprint.h"
#include "mgforge/chem/fragment.h"
#include "mgforge/chem/sanitize.h"
#include "mgforge/chem/smiles.h"
#include "mgforge/common/rng.h"
#include "mgforge/eval/metrics.h"
#include "mgforge/eval/report.h"
#include "oracles.h"

namespace mgforge::eval {
namespace {

using Strings = std::vector<std::string>;

chem::MolGraph mol(const std::string& s) { return chem::sanitize(chem::parse_smiles(s)); }

std::vector<chem::MolGraph> mols(const Strings& s) {
  std::vector<chem::MolGraph> out;
  for (const auto& x : s) {
    out.push_back(mol(x));
  }
  return out;
}

std::vector<chem::Fingerprint> fps(const Strings& s) {
  std::vector<chem::Fingerprint> out;
  for (const auto& m : mols(s)) {
    out.push_back(chem::fingerprint(m));
  }
  return out;
}

TEST(Validity, Examples) {
  const Strings gen = {"CCO", "C1CC", "c1ccccc1"};
  const ValidityResult r = validity(gen);
  EXPECT_NEAR(r.fraction, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.valid_indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(r.canonical.size(), 2U);
  EXPECT_EQ(validity(Strings{}).fraction, 0.0);
  EXPECT_EQ(validity(Strings{"", "C(", "c1cccc1"}).fraction, 0.0);
}

TEST(Validity, ThreadsAgree) {
  const Strings gen = testing::read_smi("overfit32.smi");
  const ValidityResult a = validity(gen, 1);
  const ValidityResult b = validity(gen, 4);
  EXPECT_EQ(a.canonical, b.canonical);
  EXPECT_EQ(a.fraction, 1.0);
}

TEST(Uniqueness, Examples) {
  const Strings c = {chem::canonicalize(mol("CCO")), chem::canonicalize(mol("OCC")),
                     chem::canonicalize(mol("CCN"))};
  EXPECT_NEAR(unique_at(c, 1000), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(unique_at(c, 1), 1.0);
  EXPECT_EQ(unique_at(Strings{}, 10), 0.0);
}

TEST(Novelty, Examples) {
  const Strings gen = {"a", "b", "c", "c"};
  EXPECT_NEAR(novelty(gen, {"b"}), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(novelty(gen, {"a", "b", "c"}), 0.0);
  EXPECT_EQ(novelty(gen, {}), 1.0);
}

TEST(Uniqueness, AgreesWithOracleOnRandomMultisets) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    Strings items;
    Strings train;
    const int n = 1 + static_cast<int>(rng.below(60));
    for (int i = 0; i < n; ++i) {
      items.push_back("m" + std::to_string(rng.below(25)));
    }
    for (int i = 0; i < 10; ++i) {
      train.push_back("m" + std::to_string(rng.below(40)));
    }
    const std::size_t k = 1 + rng.below(80);
    EXPECT_NEAR(unique_at(items, k), testing::oracle_unique_at(items, k), 1e-12);
    EXPECT_NEAR(novelty(items, {train.begin(), train.end()}), testing::oracle_novelty(items, train), 1e-12);
  }
}

TEST(Snn, IdentityAndDisjointSets) {
  const Strings a = {"CCO", "c1ccccc1", "CC(=O)O"};
  EXPECT_NEAR(snn(fps(a), fps(a)), 1.0, 1e-15);
  EXPECT_EQ(snn(fps({"C"}), fps({"O"})), 0.0);
  EXPECT_THROW((void)snn(fps(a), {}), Error);
}

TEST(Snn, AgreesWithOracle) {
  const Strings pool = testing::read_smi("overfit32.smi");
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    Strings g;
    Strings r;
    for (int i = 0; i < 8; ++i) {
      g.push_back(pool[rng.below(pool.size())]);
      r.push_back(pool[rng.below(pool.size())]);
    }
    const auto fg = fps(g);
    const auto fr = fps(r);
    EXPECT_NEAR(snn(fg, fr, 1 + t % 3), testing::oracle_snn(fg, fr), 1e-12);
  }
}

TEST(Frag, IdentityDisjointAndHandCosine) {
  const auto a = mols({"CCc1ccccc1", "CCO"});
  EXPECT_NEAR(frag_similarity(a, a), 1.0, 1e-12);
  EXPECT_EQ(frag_similarity(mols({"CC"}), mols({"c1ccccc1"})), 0.0);

  // {CC-Ph} has fragments {*CC, *Ph}; {CC, Ph-Ph} has {CC, *Ph, *Ph}.
  const FragmentCounts x = fragment_counts(mols({"CCc1ccccc1"}));
  const FragmentCounts y = fragment_counts(mols({"CC", "c1ccc(cc1)-c1ccccc1"}));
  ASSERT_EQ(x.size(), 2U);
  ASSERT_EQ(y.size(), 2U);
  // Shared key *Ph: 1 * 2; norms sqrt(2) and sqrt(1 + 4).
  EXPECT_NEAR(cosine(x, y), 2.0 / (std::sqrt(2.0) * std::sqrt(5.0)), 1e-12);

  std::vector<std::string> fa;
  std::vector<std::string> fb;
  for (const auto& [k, n] : x) {
    fa.insert(fa.end(), static_cast<std::size_t>(n), k);
  }
  for (const auto& [k, n] : y) {
    fb.insert(fb.end(), static_cast<std::size_t>(n), k);
  }
  EXPECT_NEAR(cosine(x, y), testing::oracle_multiset_cosine(fa, fb), 1e-12);
  EXPECT_THROW((void)frag_similarity({}, a), Error);
}

TEST(Wasserstein, ExamplesAndOracle) {
  const std::vector<double> a = {1.0, 2.0, 7.0, 3.5};
  EXPECT_EQ(wasserstein1(a, a), 0.0);
  std::vector<double> shifted = a;
  for (double& x : shifted) {
    x += 2.5;
  }
  EXPECT_NEAR(wasserstein1(a, shifted), 2.5, 1e-12);
  EXPECT_NEAR(wasserstein1(std::vector<double>{0.0}, std::vector<double>{0.0, 1.0}), 0.5, 1e-12);

  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    std::vector<double> x(1 + rng.below(12));
    std::vector<double> y(1 + rng.below(12));
    std::vector<double> z(1 + rng.below(12));
    for (auto* v : {&x, &y, &z}) {
      for (double& e : *v) {
        e = rng.normal() * 3.0;
      }
    }
    EXPECT_NEAR(wasserstein1(x, y), testing::oracle_w1(x, y), 1e-9);
    EXPECT_NEAR(wasserstein1(x, y), wasserstein1(y, x), 1e-12);
    EXPECT_LE(wasserstein1(x, z), wasserstein1(x, y) + wasserstein1(y, z) + 1e-12);
  }
  EXPECT_THROW((void)wasserstein1(std::vector<double>{}, a), Error);
}

TEST(Report, CraftedSet) {
  const Strings gen = {"CCO", "OCC", "c1ccccc1", "C1CC", "CCN", "CC(=O)O", "", "C(", "CCCC", "CCO"};
  const bool truncated[] = {false, false, false, false, false, false, true, false, false, false};
  const Strings train = {"CCO", "CCCC"};
  const Strings test = {"c1ccccc1", "CCN", "CC(=O)O"};
  const EvalReport r = full_report(gen, truncated, train, test);
  EXPECT_EQ(r.n_generated, 10);
  EXPECT_EQ(r.n_valid, 7);
  EXPECT_NEAR(r.valid, 0.7, 1e-15);
  // Valid canonical: CCO x3, benzene, CCN, acetic acid, butane.
  EXPECT_NEAR(r.unique_at_1k, 5.0 / 7.0, 1e-15);
  EXPECT_NEAR(r.novelty, 3.0 / 5.0, 1e-15);
  EXPECT_EQ(r.property_w1.size(), r.histograms.size());
  for (const auto& [name, h] : r.histograms) {
    EXPECT_EQ(h.count_gen.size(), 20U) << name;
    std::int64_t ng = 0;
    std::int64_t nr = 0;
    for (std::size_t b = 0; b < h.count_gen.size(); ++b) {
      ng += h.count_gen[b];
      nr += h.count_ref[b];
    }
    EXPECT_EQ(ng, 7) << name;
    EXPECT_EQ(nr, 3) << name;
  }
}

TEST(Report, GeneratedEqualsTestSet) {
  const Strings test = testing::read_smi("overfit32.smi");
  const auto none = std::make_unique<bool[]>(test.size());
  const EvalReport r = full_report(test, {none.get(), test.size()}, Strings{"C"}, test);
  EXPECT_EQ(r.valid, 1.0);
  EXPECT_NEAR(r.snn, 1.0, 1e-12);
  EXPECT_NEAR(r.frag, 1.0, 1e-12);
  for (const auto& [name, w] : r.property_w1) {
    EXPECT_EQ(w, 0.0) << name;
  }
}

TEST(Report, JsonRoundTripAndHistogramCsv) {
  const Strings gen = {"CCO", "c1ccccc1", "CCN"};
  const bool none[] = {false, false, false};
  const EvalReport r = full_report(gen, none, Strings{"CCO"},
                                   Strings{"CCC", "c1ccncc1"});
  const nlohmann::json doc = to_json(r);
  EXPECT_EQ(eval_report_from_json(doc), r);
  EXPECT_EQ(eval_report_from_json(nlohmann::json::parse(doc.dump())), r);
  std::ostringstream csv;
  write_histograms_csv(r, csv);
  const std::string text = csv.str();
  EXPECT_EQ(text.rfind("property,bin_left,bin_right,count_gen,count_ref\n", 0), 0U);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), 1 + 20 * r.histograms.size());
}

TEST(FpExport, ShapeAndDeterminism) {
  const Strings smiles = {"CCO", "c1ccccc1", "CC(=O)O"};
  const Strings labels = {"gen", "gen", "ref"};
  std::ostringstream a;
  std::ostringstream b;
  fp_export(smiles, labels, a);
  fp_export(smiles, labels, b);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  ASSERT_EQ(lines.size(), 4U);
  for (const auto& l : lines) {
    EXPECT_EQ(std::count(l.begin(), l.end(), ','), 1025);
  }
  EXPECT_EQ(lines[1].rfind("CCO,gen,", 0), 0U);
  // Bits agree with the fingerprint of the molecule.
  const chem::Fingerprint fp = chem::fingerprint(mol("CCO"));
  std::size_t ones = static_cast<std::size_t>(std::count(lines[1].begin(), lines[1].end(), '1'));
  EXPECT_EQ(ones, static_cast<std::size_t>(fp.popcount()));
  EXPECT_THROW(fp_export(smiles, Strings{"x"}, a), Error);
  std::ostringstream bad;
  EXPECT_THROW(fp_export(Strings{"C1CC"}, Strings{"x"}, bad), Error);
}

}  // namespace
}  // namespace mgforge::eval
