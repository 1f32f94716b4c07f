// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.h"
#include "mgforge/common/rng.h"
#include "mgforge/model/config.h"
#include "mgforge/model/decoder.h"
#include "mgforge/model/transformer.h"
#include "mgforge/tensor/ops.h"

namespace mgforge::model {
namespace {

using tensor::NoGradGuard;

std::vector<int> random_tokens(int n, int vocab, Rng& rng) {
  std::vector<int> t(static_cast<std::size_t>(n));
  for (int& x : t) {
    x = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab)));
  }
  return t;
}

TEST(Config, CountParamsByHand) {
  // Per layer: 2 attention blocks of 4 * 16 * 16, three layer norms, FFN.
  const std::int64_t attention = 4 * 16 * 16;
  const std::int64_t layer = 2 * attention + 3 * 2 * 16 + 16 * 64 + 64 + 64 * 16 + 16;
  EXPECT_EQ(layer, 4272);
  const ModelConfig c = test_config(10);
  EXPECT_EQ(count_params(c), 10 * 16 + 64 * 16 + 16 + 2 * layer + 16 * 10 + 10);
  EXPECT_EQ(count_params(c), 9914);

  ModelConfig e;
  e.n_layers = 0;
  e.n_heads = 1;
  e.d_model = 4;
  e.max_len = 8;
  e.vocab_size = 5;
  EXPECT_EQ(count_params(e), 5 * 4 + 8 * 4 + 1 * 1 * 4 + (4 * 5 + 5));

  ModelConfig twice = c;
  twice.n_layers = 4;
  ModelConfig none = c;
  none.n_layers = 0;
  EXPECT_EQ(count_params(twice) - count_params(none), 2 * (count_params(c) - count_params(none)));
}

TEST(Config, ParameterTensorsMatchCount) {
  Rng rng(1);
  ModelConfig c = test_config(12);
  c.n_conditions = 3;
  c.n_condition_slots = 2;
  Transformer<float> m(c, rng);
  std::int64_t total = 0;
  for (const auto& p : m.parameters()) {
    total += static_cast<std::int64_t>(p.tensor->numel());
  }
  EXPECT_EQ(total, count_params(c));
  EXPECT_TRUE(m.null_condition_is_zero());
}

TEST(Config, JsonRoundTripAndValidation) {
  ModelConfig c = test_config(20);
  c.n_condition_slots = 3;
  c.precision = Precision::kFloat64;
  EXPECT_EQ(model_config_from_json(to_json(c)), c);
  EXPECT_THROW((void)model_config_from_json(nlohmann::json{{"n_layerz", 2}}), Error);
  ModelConfig bad = c;
  bad.n_heads = 0;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_EQ(precision_from_string("fp64"), Precision::kFloat64);
  EXPECT_THROW((void)precision_from_string("fp16"), Error);
}

TEST(Forward, ShapeContract) {
  Rng rng(2);
  Transformer<float> m(test_config(40), rng);
  const std::vector<int> tokens = random_tokens(10, 40, rng);
  const std::vector<int> cond = {0, 0};
  NoGradGuard guard;
  const auto logits = m.forward(tokens, 2, 5, cond);
  EXPECT_EQ(logits.shape(), (tensor::Shape{2, 5, 40}));
}

TEST(Forward, Errors) {
  Rng rng(3);
  ModelConfig c = test_config(8);
  c.max_len = 4;
  Transformer<float> m(c, rng);
  NoGradGuard guard;
  const std::vector<int> five(5, 1);
  const std::vector<int> one = {0};
  EXPECT_THROW((void)m.forward(five, 1, 5, one), Error);
  const std::vector<int> three(3, 1);
  const std::vector<int> unknown = {1};
  EXPECT_THROW((void)m.forward(three, 1, 3, unknown), Error);
  const std::vector<int> out_of_range = {1, 8, 1};
  EXPECT_THROW((void)m.forward(out_of_range, 1, 3, one), Error);
}

TEST(Forward, ZeroConditionEqualsNoCrossSublayer) {
  Rng rng(4);
  Transformer<double> m(test_config(9), rng);
  testing::jitter(m, 0.05, rng);
  const std::vector<int> tokens = random_tokens(12, 9, rng);
  const std::vector<int> cond = {0, 0, 0};
  NoGradGuard guard;
  ForwardOptions full;
  full.skip_null_cross = false;
  const auto a = m.forward(tokens, 3, 4, cond, full);
  const auto b = testing::forward_without_cross(m, tokens, 3, 4);
  ASSERT_EQ(a.numel(), b.numel());
  for (std::size_t i = 0; i < a.numel(); ++i) {
    ASSERT_EQ(a.data()[i], b.data()[i]) << i;
  }
}

TEST(Forward, CausalGradientForm) {
  Rng rng(5);
  Transformer<double> m(test_config(9), rng);
  testing::jitter(m, 0.05, rng);
  const int length = 6;
  const std::vector<int> tokens = random_tokens(length, 9, rng);
  const std::vector<int> cond = {0};
  for (int i = 0; i < length; ++i) {
    m.zero_grad();
    const auto logits = m.forward(tokens, 1, length, cond);
    // Sum of the logits at position i only.
    std::vector<double> pick(logits.numel(), 0.0);
    std::fill_n(pick.begin() + i * 9, 9, 1.0);
    tensor::sum(tensor::mul(logits, tensor::Tensor<double>::from(logits.shape(), pick))).backward();
    const auto g = m.position_embedding().grad();
    for (int j = i + 1; j < length; ++j) {
      for (int d = 0; d < 16; ++d) {
        EXPECT_EQ(g[static_cast<std::size_t>(j * 16 + d)], 0.0) << "position " << j << " leaks into " << i;
      }
    }
    double visible = 0;
    for (int d = 0; d < 16; ++d) {
      visible += std::abs(g[static_cast<std::size_t>(i * 16 + d)]);
    }
    EXPECT_GT(visible, 0.0);
  }
}

TEST(Forward, BatchPermutationPermutesLogits) {
  Rng rng(6);
  ModelConfig c = test_config(11);
  c.n_conditions = 3;
  Transformer<double> m(c, rng);
  testing::jitter(m, 0.05, rng);
  const int b = 4;
  const int l = 5;
  const std::vector<int> tokens = random_tokens(b * l, 11, rng);
  const std::vector<int> cond = {0, 2, 1, 2};
  const std::vector<int> perm = {2, 0, 3, 1};
  std::vector<int> ptokens;
  std::vector<int> pcond;
  for (int r : perm) {
    ptokens.insert(ptokens.end(), tokens.begin() + r * l, tokens.begin() + (r + 1) * l);
    pcond.push_back(cond[static_cast<std::size_t>(r)]);
  }
  NoGradGuard guard;
  const auto a = m.forward(tokens, b, l, cond);
  const auto p = m.forward(ptokens, b, l, pcond);
  const std::size_t row = static_cast<std::size_t>(l) * 11;
  for (int i = 0; i < b; ++i) {
    const std::size_t src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]) * row;
    for (std::size_t k = 0; k < row; ++k) {
      ASSERT_NEAR(p.data()[static_cast<std::size_t>(i) * row + k], a.data()[src + k], 1e-12);
    }
  }
}

TEST(Attention, SingleHeadIdentityOutputMatchesFormula) {
  Rng rng(7);
  const int d = 4;
  const int len = 3;
  AttentionParams<double> p;
  auto rand = [&rng](const tensor::Shape& s) {
    std::vector<double> v(tensor::numel(s));
    for (double& x : v) {
      x = rng.uniform() - 0.5;
    }
    return tensor::Tensor<double>::from(s, v);
  };
  p.wq = rand({d, d});
  p.wk = rand({d, d});
  p.wv = rand({d, d});
  std::vector<double> eye(static_cast<std::size_t>(d * d), 0.0);
  for (int i = 0; i < d; ++i) {
    eye[static_cast<std::size_t>(i * d + i)] = 1.0;
  }
  p.wo = tensor::Tensor<double>::from({d, d}, eye);
  const auto x = rand({1, len, d});
  NoGradGuard guard;
  const auto out = multi_head_attention(p, x, x, 1, d, d, false);
  const auto q = tensor::matmul(x, p.wq);
  const auto k = tensor::matmul(x, p.wk);
  const auto v = tensor::matmul(x, p.wv);
  for (int i = 0; i < len; ++i) {
    std::vector<double> w(static_cast<std::size_t>(len));
    double total = 0;
    for (int j = 0; j < len; ++j) {
      double s = 0;
      for (int c = 0; c < d; ++c) {
        s += q.data()[static_cast<std::size_t>(i * d + c)] * k.data()[static_cast<std::size_t>(j * d + c)];
      }
      w[static_cast<std::size_t>(j)] = std::exp(s / std::sqrt(static_cast<double>(d)));
      total += w[static_cast<std::size_t>(j)];
    }
    for (int c = 0; c < d; ++c) {
      double o = 0;
      for (int j = 0; j < len; ++j) {
        o += w[static_cast<std::size_t>(j)] / total * v.data()[static_cast<std::size_t>(j * d + c)];
      }
      EXPECT_NEAR(out.data()[static_cast<std::size_t>(i * d + c)], o, 1e-12);
    }
  }
}

TEST(Decoder, MatchesFullForward) {
  Rng rng(8);
  ModelConfig c = test_config(13);
  c.n_conditions = 2;
  Transformer<float> m(c, rng);
  testing::jitter(m, 0.05, rng);
  const int b = 2;
  const int l = 7;
  const std::vector<int> tokens = random_tokens(b * l, 13, rng);
  const std::vector<int> cond = {1, 0};
  NoGradGuard guard;
  const auto full = m.forward(tokens, b, l, cond);
  IncrementalDecoder<float> dec(m, cond);
  for (int pos = 0; pos < l; ++pos) {
    const std::vector<int> step = {tokens[static_cast<std::size_t>(pos)], tokens[static_cast<std::size_t>(l + pos)]};
    const auto logits = dec.step(step);
    for (int r = 0; r < b; ++r) {
      for (int v = 0; v < 13; ++v) {
        const float want = full.data()[static_cast<std::size_t>((r * l + pos) * 13 + v)];
        EXPECT_NEAR(logits[static_cast<std::size_t>(r * 13 + v)], want, 1e-5);
      }
    }
  }
  EXPECT_EQ(dec.position(), l);
}

TEST(Nll, UniformAndMarginLimits) {
  const int v = 40;
  const std::vector<int> targets = {3, 7};
  const auto uniform = tensor::Tensor<double>::filled({1, 2, v}, 0.25);
  for (double x : token_nll(uniform, targets)) {
    EXPECT_NEAR(x, std::log(40.0), 1e-12);
  }
  double previous = 1e9;
  for (double margin : {1.0, 5.0, 10.0, 20.0, 40.0}) {
    std::vector<double> logits(static_cast<std::size_t>(2 * v), 0.0);
    logits[3] = margin;
    logits[static_cast<std::size_t>(v + 7)] = margin;
    const auto nll = token_nll(tensor::Tensor<double>::from({1, 2, v}, logits), targets);
    EXPECT_LT(nll[0], previous);
    previous = nll[0];
  }
  EXPECT_LT(previous, 1e-15);
}

TEST(Transformer, CastAndConditionExpansion) {
  Rng rng(9);
  Transformer<float> m(test_config(7), rng);
  const Transformer<double> d = m.cast<double>();
  EXPECT_EQ(d.config().d_model, m.config().d_model);
  for (std::size_t i = 0; i < m.token_embedding().numel(); ++i) {
    EXPECT_EQ(d.token_embedding().data()[i], static_cast<double>(m.token_embedding().data()[i]));
  }
  m.expand_conditions(3, rng);
  EXPECT_EQ(m.config().n_conditions, 3);
  EXPECT_TRUE(m.null_condition_is_zero());
}

}  // namespace
}  // namespace mgforge::model
