// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "mgforge/common/rng.h"
#include "mgforge/model/config.h"
#include "mgforge/sample/sample.h"
#include "mgforge/tokenizer/tokenizer.h"
#include "mgforge/tokenizer/vocab.h"

namespace mgforge::sample {
namespace {

struct Fixture {
  tok::Vocab vocab;
  model::Transformer<float> model;
};

Fixture make_fixture(std::uint64_t seed = 1) {
  const auto smiles = testing::read_smi("overfit32.smi");
  tok::Vocab v = tok::build_vocab(smiles);
  Rng rng(seed);
  model::ModelConfig mc = model::test_config(v.size());
  mc.n_conditions = 2;
  model::Transformer<float> m(mc, rng);
  testing::jitter(m, 0.3, rng);
  return {std::move(v), std::move(m)};
}

std::vector<std::string> texts(const std::vector<Sample>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) {
    out.push_back(x.smiles);
  }
  return out;
}

TEST(Generate, DeterministicForSeed) {
  const Fixture f = make_fixture();
  SampleConfig c;
  c.n = 40;
  c.seed = 11;
  const auto a = generate(f.model, f.vocab, 1, c);
  const auto b = generate(f.model, f.vocab, 1, c);
  ASSERT_EQ(a.size(), 40U);
  EXPECT_EQ(texts(a), texts(b));
  c.seed = 12;
  EXPECT_NE(texts(generate(f.model, f.vocab, 1, c)), texts(a));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].index, i);
    EXPECT_EQ(a[i].condition, 1);
    EXPECT_EQ(a[i].nll, b[i].nll);
  }
}

TEST(Generate, ThreadCountDoesNotChangeOutput) {
  const Fixture f = make_fixture(2);
  SampleConfig c;
  c.n = 200;
  c.seed = 5;
  const auto one = generate(f.model, f.vocab, 0, c);
  c.threads = 3;
  const auto three = generate(f.model, f.vocab, 0, c);
  EXPECT_EQ(texts(one), texts(three));
}

TEST(Generate, SampleDependsOnlyOnSeedAndIndex) {
  const Fixture f = make_fixture(3);
  SampleConfig c;
  c.seed = 9;
  c.n = 5;
  const auto few = generate(f.model, f.vocab, 1, c);
  c.n = 150;
  const auto many = generate(f.model, f.vocab, 1, c);
  for (std::size_t i = 0; i < few.size(); ++i) {
    EXPECT_EQ(few[i].smiles, many[i].smiles);
    EXPECT_NEAR(few[i].nll, many[i].nll, 1e-4 * std::max(1.0, few[i].nll));
  }
}

TEST(Generate, TinyTemperatureMatchesGreedy) {
  const Fixture f = make_fixture(4);
  SampleConfig greedy;
  greedy.n = 8;
  greedy.temperature = 0.0;
  const auto g = generate(f.model, f.vocab, 1, greedy);
  for (const auto& s : g) {
    EXPECT_EQ(s.smiles, g.front().smiles);
  }
  SampleConfig cold = greedy;
  cold.temperature = 1e-6;
  cold.seed = 77;
  EXPECT_EQ(texts(generate(f.model, f.vocab, 1, cold)), texts(g));
}

TEST(Generate, ReportedNllMatchesScore) {
  const Fixture f = make_fixture(5);
  SampleConfig c;
  c.n = 60;
  c.seed = 3;
  int complete = 0;
  for (const auto& s : generate(f.model, f.vocab, 1, c)) {
    if (s.truncated) {
      continue;
    }
    ++complete;
    const double want = score(f.model, f.vocab, 1, s.smiles);
    EXPECT_NEAR(s.nll, want, 1e-4 * std::max(1.0, want)) << s.smiles;
  }
  EXPECT_GT(complete, 0);
}

TEST(Generate, MaxLenTruncates) {
  const Fixture f = make_fixture(6);
  SampleConfig c;
  c.n = 30;
  c.max_len = 2;
  for (const auto& s : generate(f.model, f.vocab, 0, c)) {
    if (s.truncated) {
      EXPECT_EQ(tok::tokenize(s.smiles).size(), 2U);
    } else {
      EXPECT_LE(tok::tokenize(s.smiles).size(), 1U);
    }
  }
}

TEST(Generate, TopOneIsGreedy) {
  const Fixture f = make_fixture(7);
  SampleConfig c;
  c.n = 4;
  c.top_k = 1;
  c.seed = 21;
  SampleConfig g = c;
  g.temperature = 0.0;
  EXPECT_EQ(texts(generate(f.model, f.vocab, 1, c)), texts(generate(f.model, f.vocab, 1, g)));
}

TEST(Generate, PrefixIsKept) {
  const Fixture f = make_fixture(8);
  SampleConfig c;
  c.n = 10;
  c.prefix = {f.vocab.id_of("c"), f.vocab.id_of("1")};
  for (const auto& s : generate(f.model, f.vocab, 0, c)) {
    EXPECT_EQ(s.smiles.rfind("c1", 0), 0U) << s.smiles;
  }
  c.prefix = {tok::kBos};
  EXPECT_THROW((void)generate(f.model, f.vocab, 0, c), Error);
}

TEST(Generate, RejectsBadArguments) {
  const Fixture f = make_fixture(9);
  SampleConfig c;
  EXPECT_THROW((void)generate(f.model, f.vocab, 2, c), Error);
  c.temperature = -1.0;
  EXPECT_THROW((void)generate(f.model, f.vocab, 0, c), Error);
  c = {};
  c.n = 0;
  EXPECT_THROW((void)generate(f.model, f.vocab, 0, c), Error);
}

TEST(Score, UniformLogitsGiveLengthTimesLogV) {
  Fixture f = make_fixture(10);
  for (auto& p : f.model.parameters()) {
    if (p.name.rfind("head.", 0) == 0) {
      std::fill(p.tensor->data().begin(), p.tensor->data().end(), 0.0F);
    }
  }
  const double log_v = std::log(static_cast<double>(f.vocab.size()));
  for (const std::string s : {"CCO", "c1ccccc1", "C"}) {
    const double n = static_cast<double>(tok::tokenize(s).size());
    EXPECT_NEAR(score(f.model, f.vocab, 0, s), (n + 1.0) * log_v, 1e-4) << s;
  }
}

TEST(Score, UnknownTokenIsRejected) {
  const Fixture f = make_fixture(11);
  ASSERT_EQ(f.vocab.id_of("[Se]"), tok::kUnk);
  try {
    (void)score(f.model, f.vocab, 0, "C[Se]C");
    FAIL() << "expected UnknownToken";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "UnknownToken");
  }
}

}  // namespace
}  // namespace mgforge::sample
