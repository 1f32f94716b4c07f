// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.h"
#include "mgforge/common/rng.h"
#include "mgforge/store/corpus.h"
#include "mgforge/tokenizer/tokenizer.h"
#include "mgforge/tokenizer/vocab.h"

namespace mgforge::tok {
namespace {

using Tokens = std::vector<std::string>;

std::string join(const Tokens& t) { return std::accumulate(t.begin(), t.end(), std::string()); }

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("CCl"), (Tokens{"C", "Cl"}));
  EXPECT_EQ(tokenize("c1ccccc1"), (Tokens{"c", "1", "c", "c", "c", "c", "c", "1"}));
  const Tokens egfr = tokenize("CNc1ccc2ncncc2c1");
  EXPECT_EQ(egfr.size(), 16U);
  EXPECT_EQ(tokenize("[nH]1cc%12Br.[Na+]"), (Tokens{"[nH]", "1", "c", "c", "%12", "Br", ".", "[Na+]"}));
  EXPECT_EQ(tokenize("C/C=C\\C#N"), (Tokens{"C", "/", "C", "=", "C", "\\", "C", "#", "N"}));
}

TEST(Tokenize, RejectsUnknownCharacterWithOffset) {
  try {
    (void)tokenize("CC$C");
    FAIL() << "expected TokenizeError";
  } catch (const TokenizeError& e) {
    EXPECT_EQ(e.offset(), 2U);
    EXPECT_EQ(e.kind(), "UnknownCharacter");
  }
  EXPECT_THROW((void)tokenize("C[NH"), TokenizeError);
}

TEST(Tokenize, LosslessOverCorpora) {
  for (const char* name : {"overfit32.smi"}) {
    for (const auto& s : testing::read_smi(name)) {
      EXPECT_EQ(join(tokenize(s)), s);
    }
  }
  for (const auto& s : store::load_pretrain(testing::data_path("moses_subset.csv"), {.split = "all"}).smiles()) {
    ASSERT_EQ(join(tokenize(s)), s);
  }
}

TEST(Vocab, Examples) {
  const std::vector<std::string> cc = {"CC", "CC"};
  const Vocab v = build_vocab(cc);
  EXPECT_EQ(v.size(), 5);
  EXPECT_EQ(v.token(kBos), v.tokens()[0]);
  EXPECT_EQ(v.id_of("C"), 4);
  const std::vector<std::string> co = {"CO"};
  const Vocab w = build_vocab(co);
  EXPECT_TRUE(w.contains("C"));
  EXPECT_TRUE(w.contains("O"));
  EXPECT_EQ(w.id_of("N"), kUnk);
  EXPECT_THROW((void)build_vocab(std::vector<std::string>{}), Error);
}

TEST(Vocab, ReservedIdsAndJsonRoundTrip) {
  const std::vector<std::string> corpus = {"CCO", "c1ccccc1Cl"};
  const Vocab v = build_vocab(corpus);
  const nlohmann::json doc = v.to_json();
  ASSERT_TRUE(doc.contains("tokens"));
  EXPECT_EQ(doc["tokens"].size(), static_cast<std::size_t>(v.size()));
  EXPECT_EQ(Vocab::from_json(doc), v);
  EXPECT_THROW((void)Vocab(std::vector<std::string>{"C", "C"}), Error);
  EXPECT_THROW((void)v.token(v.size()), Error);
}

TEST(Vocab, OrderIndependent) {
  std::vector<std::string> corpus = testing::read_smi("overfit32.smi");
  const Vocab ref = build_vocab(corpus);
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    shuffle<std::string>(corpus, rng);
    EXPECT_EQ(build_vocab(corpus), ref);
  }
}

TEST(Vocab, MosesSubsetHasNoUnknownTokens) {
  const auto smiles = store::load_pretrain(testing::data_path("moses_subset.csv"), {.split = "all"}).smiles();
  const Vocab v = build_vocab(smiles);
  int unknown = 0;
  for (const auto& s : smiles) {
    unknown += count_unknown(encode(s, v).ids);
  }
  EXPECT_EQ(unknown, 0);
}

TEST(Encode, BosEosAndRoundTrip) {
  const std::vector<std::string> corpus = {"CCO"};
  const Vocab v = build_vocab(corpus);
  const TokenSeq seq = encode("CCO", v);
  ASSERT_EQ(seq.ids.size(), 5U);
  EXPECT_EQ(seq.ids.front(), kBos);
  EXPECT_EQ(seq.ids.back(), kEos);
  EXPECT_EQ(decode(seq, v), "CCO");
  const TokenSeq unk = encode("CCN", v);
  EXPECT_EQ(count_unknown(unk.ids), 1);
  EXPECT_EQ(decode(unk, v), "CC" + std::string(kUnkMarker));
  const std::vector<int> bad = {kBos, 99};
  EXPECT_THROW((void)decode(bad, v), Error);
}

TEST(Encode, FinetuneSetRoundTrips) {
  const auto rows = store::read_lines(testing::data_path("finetune_halogen.csv"));
  std::vector<std::string> smiles;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    smiles.push_back(rows[i].substr(0, rows[i].find(',')));
  }
  const Vocab v = build_vocab(smiles);
  int mismatches = 0;
  for (const auto& s : smiles) {
    mismatches += decode(encode(s, v), v) != s;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Encode, DecodeThenEncodeIsIdentity) {
  const auto corpus = testing::read_smi("overfit32.smi");
  const Vocab v = build_vocab(corpus);
  for (const auto& s : corpus) {
    const TokenSeq a = encode(s, v);
    EXPECT_EQ(encode(decode(a, v), v).ids, a.ids);
  }
}

}  // namespace
}  // namespace mgforge::tok
