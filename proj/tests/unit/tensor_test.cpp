// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "mgforge/common/rng.h"
#include "mgforge/tensor/adam.h"
#include "mgforge/tensor/ops.h"
#include "mgforge/tensor/tensor.h"

namespace mgforge::tensor {
namespace {

using T64 = Tensor<double>;

T64 random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(numel(shape));
  for (double& x : v) {
    x = lo + (hi - lo) * rng.uniform();
  }
  return T64::from(shape, std::move(v), true);
}

// Central differences on every input coordinate against the tape.
void expect_gradients(std::vector<T64> inputs, const std::function<T64(const std::vector<T64>&)>& f,
                      double tol = 1e-6) {
  for (auto& in : inputs) {
    in.zero_grad();
  }
  T64 loss = f(inputs);
  loss.backward();
  const double h = 1e-6;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    std::vector<double> analytic(inputs[t].numel(), 0.0);
    if (inputs[t].has_grad()) {
      std::copy(inputs[t].grad().begin(), inputs[t].grad().end(), analytic.begin());
    }
    for (std::size_t i = 0; i < inputs[t].numel(); ++i) {
      double& x = inputs[t].data()[i];
      const double x0 = x;
      double up = 0.0;
      double down = 0.0;
      {
        NoGradGuard guard;
        x = x0 + h;
        up = f(inputs).item();
        x = x0 - h;
        down = f(inputs).item();
      }
      x = x0;
      const double fd = (up - down) / (2 * h);
      const double err = std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-3});
      EXPECT_LT(err, tol) << "input " << t << " coordinate " << i << " fd " << fd << " ad " << analytic[i];
    }
  }
}

// Random fixed projection so every output element matters.
T64 project(const T64& y, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(y.numel());
  for (double& x : w) {
    x = rng.uniform() * 2 - 1;
  }
  return sum(mul(y, T64::from(y.shape(), std::move(w))));
}

TEST(Ops, GradMatmulLinearBmm) {
  Rng rng(1);
  expect_gradients({random_tensor({2, 3, 4}, rng), random_tensor({4, 5}, rng)},
                   [](const auto& in) { return project(matmul(in[0], in[1]), 7); });
  expect_gradients({random_tensor({3, 4}, rng), random_tensor({4, 2}, rng), random_tensor({2}, rng)},
                   [](const auto& in) { return project(linear(in[0], in[1], in[2]), 8); });
  expect_gradients({random_tensor({2, 3, 4}, rng), random_tensor({2, 4, 5}, rng)},
                   [](const auto& in) { return project(bmm(in[0], in[1]), 9); });
  expect_gradients({random_tensor({2, 3, 4}, rng), random_tensor({2, 5, 4}, rng)},
                   [](const auto& in) { return project(bmm(in[0], in[1], true), 10); });
}

TEST(Ops, GradElementwiseAndShape) {
  Rng rng(2);
  expect_gradients({random_tensor({2, 3, 4}, rng), random_tensor({3, 4}, rng)},
                   [](const auto& in) { return project(add(in[0], in[1]), 11); });
  expect_gradients({random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)},
                   [](const auto& in) { return project(mul(in[0], in[1]), 12); });
  expect_gradients({random_tensor({3, 4}, rng)}, [](const auto& in) { return project(scale(in[0], 2.5), 13); });
  expect_gradients({random_tensor({2, 3, 4}, rng)},
                   [](const auto& in) { return project(transpose(in[0], 0, 2), 14); });
  expect_gradients({random_tensor({2, 3, 4}, rng)},
                   [](const auto& in) { return project(reshape(in[0], {6, 4}), 15); });
  expect_gradients({random_tensor({2, 3}, rng), random_tensor({2, 2}, rng)},
                   [](const auto& in) { return project(concat_last<double>({in[0], in[1]}), 16); });
}

TEST(Ops, GradNormalizationAndNonlinearities) {
  Rng rng(3);
  expect_gradients({random_tensor({3, 5}, rng)}, [](const auto& in) { return project(softmax_last(in[0]), 17); });
  expect_gradients({random_tensor({3, 6}, rng), random_tensor({6}, rng), random_tensor({6}, rng)},
                   [](const auto& in) { return project(layernorm_last(in[0], in[1], in[2]), 18); });
  // Values kept away from the kink at 0.
  T64 x = random_tensor({4, 5}, rng, 0.1, 1.0);
  for (std::size_t i = 0; i < x.numel(); i += 2) {
    x.data()[i] = -x.data()[i];
  }
  expect_gradients({x}, [](const auto& in) { return project(relu(in[0]), 19); });
  const std::vector<int> ids = {2, 0, 2, 1};
  expect_gradients({random_tensor({3, 4}, rng)},
                   [&ids](const auto& in) { return project(embedding(in[0], ids, {2, 2}), 20); });
}

TEST(Ops, GradCrossEntropyAndMaskedSoftmax) {
  Rng rng(4);
  const std::vector<int> targets = {1, 0, 3};
  const std::vector<double> weights = {1.0, 0.0, 2.0};
  expect_gradients({random_tensor({3, 4}, rng)},
                   [&](const auto& in) { return cross_entropy<double>(in[0], targets, weights); });
  const auto mask = causal_mask(3);
  expect_gradients({random_tensor({2, 3, 3}, rng)},
                   [&](const auto& in) { return project(softmax_last(masked_fill(in[0], mask, {3, 3})), 21); });
}

TEST(Ops, GradAttention) {
  Rng rng(5);
  for (bool causal : {false, true}) {
    expect_gradients({random_tensor({2, 3, 4}, rng), random_tensor({2, 3, 4}, rng), random_tensor({2, 3, 6}, rng)},
                     [causal](const auto& in) { return project(attention(in[0], in[1], in[2], 2, causal), 22); });
  }
  // Shared inputs: the same node feeds q, k and v.
  expect_gradients({random_tensor({1, 3, 4}, rng)},
                   [](const auto& in) { return project(attention(in[0], in[0], in[0], 2, true), 23); });
}

TEST(Ops, GradWithSharedAndReusedNodes) {
  Rng rng(6);
  expect_gradients({random_tensor({3, 3}, rng)}, [](const auto& in) { return project(matmul(in[0], in[0]), 24); });
  expect_gradients({random_tensor({3, 3}, rng)}, [](const auto& in) { return project(add(in[0], in[0]), 25); });
  expect_gradients({random_tensor({2, 3}, rng), random_tensor({3, 3}, rng), random_tensor({3}, rng)},
                   [](const auto& in) {
                     const T64 y = linear(in[0], in[1], in[2]);
                     return add(project(y, 26), project(linear(y, in[1], in[2]), 27));
                   });
}

TEST(Ops, AttentionMatchesComposedOps) {
  Rng rng(7);
  const T64 q = random_tensor({1, 4, 4}, rng);
  const T64 k = random_tensor({1, 4, 4}, rng);
  const T64 v = random_tensor({1, 4, 4}, rng);
  NoGradGuard guard;
  const T64 fused = attention(q, k, v, 1, true);
  const T64 scores = scale(bmm(q, k, true), 0.5);
  const T64 ref = bmm(softmax_last(masked_fill(scores, causal_mask(4), {4, 4})), v);
  for (std::size_t i = 0; i < ref.numel(); ++i) {
    EXPECT_NEAR(fused.data()[i], ref.data()[i], 1e-12);
  }
}

TEST(Ops, Examples) {
  NoGradGuard guard;
  const T64 s = softmax_last(T64::filled({2, 7}, 0.3));
  for (double p : s.data()) {
    EXPECT_NEAR(p, 1.0 / 7.0, 1e-15);
  }
  Rng rng(8);
  const T64 x = random_tensor({3, 9}, rng, -5, 5);
  const T64 n = layernorm_last(x, T64::filled({9}, 1.0), T64::filled({9}, 0.0), 0.0);
  for (int r = 0; r < 3; ++r) {
    double mean = 0;
    double var = 0;
    for (int j = 0; j < 9; ++j) {
      mean += n.data()[static_cast<std::size_t>(r * 9 + j)] / 9;
    }
    for (int j = 0; j < 9; ++j) {
      const double d = n.data()[static_cast<std::size_t>(r * 9 + j)] - mean;
      var += d * d / 9;
    }
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
  const std::vector<int> targets = {0, 17, 39};
  const std::vector<double> ones(3, 1.0);
  EXPECT_NEAR(cross_entropy<double>(T64::filled({3, 40}, 0.0), targets, ones).item(), std::log(40.0), 1e-12);
  EXPECT_NEAR(std::log(40.0), 3.6889, 5e-5);
}

TEST(Ops, SoftmaxRowsSumToOneAndMaskedAreZero) {
  Rng rng(9);
  NoGradGuard guard;
  const T64 x = random_tensor({5, 5}, rng, -20, 20);
  const T64 p = softmax_last(masked_fill(x, causal_mask(5), {5, 5}));
  for (int i = 0; i < 5; ++i) {
    double total = 0;
    for (int j = 0; j < 5; ++j) {
      const double v = p.data()[static_cast<std::size_t>(i * 5 + j)];
      total += v;
      if (j > i) {
        EXPECT_EQ(v, 0.0);
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Backward, QuadraticAndMaskedFlow) {
  Rng rng(10);
  T64 x = random_tensor({6}, rng);
  sum(mul(x, x)).backward();
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(x.grad()[i], 2 * x.data()[i]);
  }
  T64 s = random_tensor({3, 3}, rng);
  project(softmax_last(masked_fill(s, causal_mask(3), {3, 3})), 30).backward();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      EXPECT_EQ(s.grad()[static_cast<std::size_t>(i * 3 + j)], 0.0);
    }
  }
}

TEST(Backward, ErrorsAndUnreachedParameters) {
  Rng rng(11);
  T64 a = random_tensor({2, 2}, rng);
  T64 unused = random_tensor({2}, rng);
  EXPECT_THROW(mul(a, a).backward(), Error);
  sum(a).backward();
  EXPECT_FALSE(unused.has_grad());
  for (double g : unused.grad()) {
    EXPECT_EQ(g, 0.0);
  }
  EXPECT_THROW((void)matmul(a, random_tensor({3, 2}, rng)), Error);
}

TEST(Backward, GradientsAccumulateAcrossCalls) {
  Rng rng(12);
  T64 x = random_tensor({4}, rng);
  sum(scale(x, 3.0)).backward();
  sum(scale(x, 3.0)).backward();
  for (double g : x.grad()) {
    EXPECT_DOUBLE_EQ(g, 6.0);
  }
  x.zero_grad();
  sum(x).backward();
  for (double g : x.grad()) {
    EXPECT_DOUBLE_EQ(g, 1.0);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  T64 p = T64::from({3}, {1.0, -2.0, 0.5}, true);
  p.grad()[0] = 0.3;
  p.grad()[1] = -7.0;
  p.grad()[2] = 1e-3;
  Adam<double> adam({p}, {.lr = 0.01});
  adam.step();
  EXPECT_NEAR(p.data()[0], 1.0 - 0.01, 1e-6);
  EXPECT_NEAR(p.data()[1], -2.0 + 0.01, 1e-6);
  EXPECT_NEAR(p.data()[2], 0.5 - 0.01, 1e-4);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  T64 p = T64::from({2}, {1.5, -0.25}, true);
  Adam<double> adam({p}, {.lr = 0.1});
  for (int i = 0; i < 5; ++i) {
    p.zero_grad();
    adam.step();
  }
  EXPECT_EQ(p.data()[0], 1.5);
  EXPECT_EQ(p.data()[1], -0.25);
}

TEST(Adam, MinimizesQuadratic) {
  T64 theta = T64::from({1}, {1.0}, true);
  Adam<double> adam({theta}, {.lr = 0.1});
  for (int i = 0; i < 200; ++i) {
    theta.zero_grad();
    sum(mul(theta, theta)).backward();
    adam.step();
  }
  EXPECT_LT(std::abs(theta.data()[0]), 0.05);
}

TEST(Adam, ClipBoundsGlobalNorm) {
  Rng rng(13);
  std::vector<T64> ps = {random_tensor({5}, rng), random_tensor({3, 2}, rng)};
  for (auto& p : ps) {
    for (double& g : p.grad()) {
      g = 10 * (rng.uniform() - 0.5);
    }
  }
  const double before = grad_norm(ps);
  EXPECT_DOUBLE_EQ(clip_grad_norm(ps, 1.0), before);
  EXPECT_LE(grad_norm(ps), 1.0 + 1e-6);
  // Below the threshold nothing changes.
  const double now = grad_norm(ps);
  clip_grad_norm(ps, 5.0);
  EXPECT_DOUBLE_EQ(grad_norm(ps), now);
}

TEST(Rng, SplitMix64ReferenceAndStreams) {
  Rng r(0);
  EXPECT_EQ(r.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next(), 0x6e789e6aa1b965f4ULL);
  Rng a = Rng::stream(5, 3);
  Rng b = Rng::stream(5, 3);
  Rng c = Rng::stream(5, 4);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng::stream(5, 3).next(), c.next());
  Rng u(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_LT(u.below(7), 7U);
  }
}

}  // namespace
}  // namespace mgforge::tensor
