// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.h"
#include "mgforge/common/rng.h"
#include "mgforge/model/config.h"
#include "mgforge/store/batch.h"
#include "mgforge/store/checkpoint.h"
#include "mgforge/store/corpus.h"
#include "mgforge/tensor/ops.h"
#include "mgforge/tokenizer/vocab.h"

namespace mgforge::store {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mgforge_store_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  fs::path dir_;
};

std::string error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return "none";
}

using Corpora = TempDir;

TEST_F(Corpora, PlainTextFile) {
  const Corpus c = load_pretrain(write("three.smi", "CCO\nc1ccccc1\n\nCC(=O)O\n"));
  ASSERT_EQ(c.entries.size(), 3U);
  for (const auto& e : c.entries) {
    EXPECT_EQ(e.condition, 0);
  }
  EXPECT_EQ(c.entries[1].smiles, "c1ccccc1");
}

TEST_F(Corpora, SplitColumnFilters) {
  const fs::path p = write("moses.csv", "SMILES,SPLIT\nCCO,train\nCCN,test\nCCC,train\nCCCl,test_scaffolds\n");
  const Corpus train = load_pretrain(p);
  ASSERT_EQ(train.entries.size(), 2U);
  EXPECT_EQ(train.entries[1].smiles, "CCC");
  EXPECT_EQ(load_pretrain(p, {.split = "test"}).entries.size(), 1U);
  EXPECT_EQ(load_pretrain(p, {.split = "all"}).entries.size(), 4U);
}

TEST_F(Corpora, ErrorsAndLenientMode) {
  EXPECT_EQ(error_kind([&] { load_pretrain(write("nocol.csv", "name,split\nx,train\n")); }), "MissingColumn");
  const fs::path bad = write("bad.smi", "CCO\nC1CC\nCCN\n");
  EXPECT_EQ(error_kind([&] { load_pretrain(bad); }), "UnparseableRow");
  LoadReport report;
  const Corpus c = load_pretrain(bad, {.split = "train", .lenient = true}, &report);
  EXPECT_EQ(c.entries.size(), 2U);
  EXPECT_EQ(report.rows_skipped, 1);
  EXPECT_EQ(error_kind([&] { load_pretrain(dir_ / "missing.smi"); }), "FileNotFound");
}

TEST(MosesSubset, TenThousandRowsWithoutUnknownTokens) {
  const Corpus all = load_pretrain(testing::data_path("moses_subset.csv"), {.split = "all"});
  EXPECT_EQ(all.entries.size(), 12000U);
  EXPECT_EQ(load_pretrain(testing::data_path("moses_subset.csv")).entries.size(), 10000U);
  const auto smiles = all.smiles();
  const tok::Vocab v = tok::build_vocab(smiles);
  int unk = 0;
  for (const auto& s : smiles) {
    unk += tok::count_unknown(tok::encode(s, v).ids);
  }
  EXPECT_EQ(unk, 0);
}

TEST_F(Corpora, FinetuneTargets) {
  const ConditionMap map({"EGFR", "HTR1A", "S1PR1"});
  const Corpus c = load_finetune(write("ft.csv", "smiles,target\nCNc1ccc2ncncc2c1,EGFR\nCCO,S1PR1\n"), map);
  ASSERT_EQ(c.entries.size(), 2U);
  EXPECT_EQ(c.entries[0].condition, map.id_of("EGFR"));
  EXPECT_EQ(c.entries[0].condition, 1);
  EXPECT_EQ(c.entries[1].condition, 3);
  EXPECT_EQ(error_kind([&] { load_finetune(write("empty_target.csv", "smiles,target\nCCO,\n"), map); }),
            "UnknownTargetName");
  EXPECT_EQ(error_kind([&] { load_finetune(write("other.csv", "smiles,target\nCCO,DRD2\n"), map); }),
            "UnknownTargetName");
  EXPECT_EQ(error_kind([] { ConditionMap({"A", "A"}); }), "InvalidTargets");
}

TEST(Finetune, PerTargetCountsMatchFileTallies) {
  const fs::path p = testing::data_path("finetune_halogen.csv");
  const auto targets = scan_targets(p);
  const ConditionMap map(targets);
  std::map<std::string, int> tally;
  const auto lines = read_lines(p);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    ++tally[lines[i].substr(lines[i].rfind(',') + 1)];
  }
  const Corpus c = load_finetune(p, map, {.split = "all"});
  std::map<std::string, int> counted;
  for (const auto& e : c.entries) {
    ++counted[map.name_of(e.condition)];
  }
  EXPECT_EQ(counted, tally);
}

TEST_F(Corpora, LoadingIsOrderIndependentAsMultiset) {
  std::vector<std::string> rows = testing::read_smi("overfit32.smi");
  std::string a;
  for (const auto& r : rows) {
    a += r + "\n";
  }
  Rng rng(4);
  shuffle<std::string>(rows, rng);
  std::string b;
  for (const auto& r : rows) {
    b += r + "\n";
  }
  auto x = load_pretrain(write("a.smi", a)).entries;
  auto y = load_pretrain(write("b.smi", b)).entries;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  EXPECT_EQ(x, y);
}

std::vector<std::vector<int>> toy_sequences(int n, Rng& rng) {
  std::vector<std::vector<int>> seqs;
  for (int i = 0; i < n; ++i) {
    std::vector<int> s = {tok::kBos};
    const int len = 1 + static_cast<int>(rng.below(6));
    for (int j = 0; j < len; ++j) {
      s.push_back(4 + static_cast<int>(rng.below(5)));
    }
    s.push_back(tok::kEos);
    seqs.push_back(s);
  }
  return seqs;
}

TEST(Batches, SizesAndPadding) {
  Rng rng(1);
  BatchIterator it(toy_sequences(5, rng), std::vector<int>(5, 0), 2, 64, 7);
  it.start_epoch(0);
  std::vector<int> sizes;
  Batch b;
  while (it.next(b)) {
    sizes.push_back(b.batch);
    for (int r = 0; r < b.batch; ++r) {
      for (int t = 0; t < b.length; ++t) {
        const std::size_t i = static_cast<std::size_t>(r * b.length + t);
        if (b.mask[i] == 0) {
          EXPECT_EQ(b.inputs[i], tok::kPad);
          EXPECT_EQ(b.targets[i], tok::kPad);
        }
      }
    }
  }
  EXPECT_EQ(sizes, (std::vector<int>{2, 2, 1}));
}

TEST(Batches, TeacherForcingShift) {
  const std::vector<std::vector<int>> seqs = {{0, 5, 6, 7, 1}, {0, 4, 1}};
  const Batch b = make_batch(seqs, {0, 2}, {0, 1});
  ASSERT_EQ(b.length, 4);
  EXPECT_EQ(std::vector<int>(b.inputs.begin(), b.inputs.begin() + 4), (std::vector<int>{0, 5, 6, 7}));
  EXPECT_EQ(std::vector<int>(b.targets.begin(), b.targets.begin() + 4), (std::vector<int>{5, 6, 7, 1}));
  EXPECT_EQ(std::vector<int>(b.targets.begin() + 4, b.targets.end()), (std::vector<int>{4, 1, 2, 2}));
  EXPECT_EQ(std::vector<std::uint8_t>(b.mask.begin() + 4, b.mask.end()), (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(b.conditions, (std::vector<int>{0, 2}));
  // BOS is never a target; EOS ends every row.
  EXPECT_EQ(std::count(b.targets.begin(), b.targets.end(), tok::kBos), 0);
}

void expect_epoch_covers_all(bool bucket) {
  Rng rng(2);
  const auto seqs = toy_sequences(237, rng);
  BatchIterator it(seqs, std::vector<int>(seqs.size(), 0), 8, 64, 3, true, bucket);
  for (int epoch = 0; epoch < 3; ++epoch) {
    it.start_epoch(epoch);
    std::vector<std::size_t> seen;
    Batch b;
    while (it.next(b)) {
      seen.insert(seen.end(), b.rows.begin(), b.rows.end());
    }
    std::sort(seen.begin(), seen.end());
    ASSERT_EQ(seen.size(), seqs.size());
    for (std::size_t i = 0; i < seen.size(); ++i) {
      ASSERT_EQ(seen[i], i);
    }
  }
}

TEST(Batches, EveryEntryOncePerEpoch) {
  expect_epoch_covers_all(false);
  expect_epoch_covers_all(true);
}

TEST(Batches, SameSeedSameOrderAndDropsLongSequences) {
  Rng rng(3);
  auto seqs = toy_sequences(40, rng);
  seqs.push_back(std::vector<int>(20, 4));
  auto order = [&](std::uint64_t seed) {
    BatchIterator it(seqs, std::vector<int>(seqs.size(), 0), 4, 10, seed, true, true);
    it.start_epoch(1);
    std::vector<std::size_t> rows;
    Batch b;
    while (it.next(b)) {
      rows.insert(rows.end(), b.rows.begin(), b.rows.end());
    }
    EXPECT_EQ(it.dropped(), 1);
    return rows;
  };
  EXPECT_EQ(order(9), order(9));
  EXPECT_NE(order(9), order(10));
}

TEST(Batches, BucketingReducesPadding) {
  Rng rng(5);
  const auto seqs = toy_sequences(800, rng);
  auto padding = [&](bool bucket) {
    BatchIterator it(seqs, std::vector<int>(seqs.size(), 0), 16, 64, 1, true, bucket);
    it.start_epoch(0);
    std::size_t pad = 0;
    Batch b;
    while (it.next(b)) {
      pad += static_cast<std::size_t>(std::count(b.mask.begin(), b.mask.end(), 0));
    }
    return pad;
  };
  EXPECT_LT(padding(true), padding(false));
}

using Checkpoints = TempDir;

Checkpoint small_checkpoint(std::uint64_t seed, bool with_optimizer) {
  Rng rng(seed);
  const std::vector<std::string> corpus = {"CCO", "c1ccccc1"};
  Checkpoint c;
  c.vocab = tok::build_vocab(corpus);
  model::ModelConfig mc = model::test_config(c.vocab.size());
  mc.n_conditions = 2;
  c.model = std::make_shared<model::Transformer<float>>(mc, rng);
  testing::jitter(*c.model, 0.1, rng);
  c.conditions = {"none", "A"};
  c.seed = seed;
  c.effective_config = {{"note", "unit"}};
  if (with_optimizer) {
    OptimizerState s;
    s.step = 17;
    for (const auto& p : c.model->parameters()) {
      std::vector<float> m(p.tensor->numel());
      std::vector<float> v(p.tensor->numel());
      for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = static_cast<float>(rng.normal());
        v[i] = static_cast<float>(rng.uniform());
      }
      s.m.push_back(m);
      s.v.push_back(v);
    }
    c.optimizer = s;
  }
  return c;
}

TEST_F(Checkpoints, RoundTripIsBitExact) {
  const Checkpoint c = small_checkpoint(1, true);
  const fs::path p = dir_ / "model.ckpt";
  save_checkpoint(c, p);
  const Checkpoint r = load_checkpoint(p);
  EXPECT_EQ(r.vocab, c.vocab);
  EXPECT_EQ(r.conditions, c.conditions);
  EXPECT_EQ(r.seed, c.seed);
  EXPECT_EQ(r.effective_config, c.effective_config);
  ASSERT_TRUE(r.optimizer.has_value());
  EXPECT_EQ(*r.optimizer, *c.optimizer);
  EXPECT_EQ(r.model->config(), c.model->config());
  auto a = c.model->parameters();
  auto b = r.model->parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(std::memcmp(a[i].tensor->data().data(), b[i].tensor->data().data(), a[i].tensor->numel() * 4), 0);
  }
  const std::vector<int> tokens = {0, 4, 5, 6};
  const std::vector<int> cond = {1};
  tensor::NoGradGuard guard;
  const auto x = c.model->forward(tokens, 1, 4, cond);
  const auto y = r.model->forward(tokens, 1, 4, cond);
  EXPECT_EQ(std::memcmp(x.data().data(), y.data().data(), x.numel() * 4), 0);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST_F(Checkpoints, CorruptionIsDetected) {
  const fs::path p = dir_ / "model.ckpt";
  save_checkpoint(small_checkpoint(2, false), p);
  const std::string bytes = slurp(p);
  ASSERT_EQ(bytes.substr(0, 8), "MGFORGE1");

  write("truncated.ckpt", bytes.substr(0, bytes.size() - 10));
  EXPECT_EQ(error_kind([&] { load_checkpoint(dir_ / "truncated.ckpt"); }), "PayloadLengthMismatch");

  std::string magic = bytes;
  magic[0] = 'X';
  write("magic.ckpt", magic);
  EXPECT_EQ(error_kind([&] { load_checkpoint(dir_ / "magic.ckpt"); }), "CorruptHeader");

  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 4);
  nlohmann::json header = nlohmann::json::parse(bytes.substr(12, len));
  ASSERT_TRUE(header.contains("format_version"));
  header["format_version"] = kCheckpointVersion + 1;
  const std::string text = header.dump();
  const auto new_len = static_cast<std::uint32_t>(text.size());
  std::string bumped = bytes.substr(0, 8);
  bumped.append(reinterpret_cast<const char*>(&new_len), 4);
  bumped += text + bytes.substr(12 + len);
  write("version.ckpt", bumped);
  EXPECT_EQ(error_kind([&] { load_checkpoint(dir_ / "version.ckpt"); }), "VersionMismatch");

  EXPECT_EQ(error_kind([&] { load_checkpoint(dir_ / "absent.ckpt"); }), "FileNotFound");
}

TEST_F(Checkpoints, PayloadSizeIsFourBytesPerScalar) {
  const Checkpoint c = small_checkpoint(3, false);
  const fs::path p = dir_ / "model.ckpt";
  save_checkpoint(c, p);
  const std::string bytes = slurp(p);
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 4);
  EXPECT_EQ(bytes.size() - 12 - len, static_cast<std::size_t>(4 * model::count_params(c.model->config())));
}

}  // namespace
}  // namespace mgforge::store
