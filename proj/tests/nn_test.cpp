// Copyright 2026 The Sacredit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "grad_check.hpp"
#include "sacredit/nn/graph.hpp"
#include "sacredit/nn/layers.hpp"
#include "sacredit/nn/optimizer.hpp"

namespace sacredit::nn {
namespace {

using testing::max_grad_rel_error;
using testing::random_matrix;
using testing::randomize;

TEST(MlpTest, ZeroWeightsGiveZeroOutput) {
  ParamSet<double> ps;
  Mlp<double> mlp(MlpSpec::make({5, 8, 8, 3}, Activation::kRelu, Activation::kRelu), ps, "m");
  Graph<double> g(false);
  Rng rng(1);
  Var y = mlp.forward(g, ps, g.constant(random_matrix(4, 5, rng)));
  EXPECT_EQ(g.value(y).rows(), 4);
  EXPECT_EQ(g.value(y).cols(), 3);
  EXPECT_TRUE(g.value(y).isZero(0.0));
}

TEST(MlpTest, SigmoidOfZeroIsHalf) {
  ParamSet<double> ps;
  Mlp<double> mlp(MlpSpec::make({3, 1}, Activation::kRelu, Activation::kSigmoid), ps, "g");
  Graph<double> g(false);
  Var y = mlp.forward(g, ps, g.constant(Mat<double>::Constant(1, 3, 2.5)));
  EXPECT_EQ(g.scalar(y), 0.5);
}

TEST(MlpTest, InputWidthMismatchIsConfigError) {
  ParamSet<double> ps;
  Mlp<double> mlp(MlpSpec::make({3, 4}, Activation::kRelu, Activation::kIdentity), ps, "m");
  Graph<double> g;
  EXPECT_THROW(mlp.forward(g, ps, g.constant(Mat<double>::Zero(1, 2))), ConfigError);
  EXPECT_THROW(MlpSpec::make({3}, Activation::kRelu, Activation::kIdentity).validate(), ConfigError);
}

TEST(MlpTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    ParamSet<double> ps;
    Mlp<double> mlp(MlpSpec::make({4, 6, 5, 2}, Activation::kRelu, Activation::kIdentity), ps, "m");
    mlp.initialize(ps, rng);
    randomize(ps, rng, 0.8);
    // The input is a parameter too, so input gradients are checked as well.
    const std::size_t x_index = ps.add("x", 3, 4);
    ps.set(x_index, random_matrix(3, 4, rng));
    const Mat<double> target = random_matrix(3, 2, rng);
    auto build = [&](Graph<double>& g, const ParamSet<double>& p) {
      Var y = mlp.forward(g, p, g.param(p, x_index));
      return g.sum(g.square(g.sub(y, g.constant(target))));
    };
    EXPECT_LT(max_grad_rel_error(ps, build), 1e-4) << "seed " << seed;
  }
}

TEST(MlpTest, ForwardIsDeterministic) {
  Rng rng(3);
  ParamSet<float> ps;
  Mlp<float> mlp(MlpSpec::make({4, 16, 2}, Activation::kRelu, Activation::kIdentity), ps, "m");
  mlp.initialize(ps, rng);
  const Mat<float> x = random_matrix(5, 4, rng).cast<float>();
  Graph<float> a(false), b(false);
  const Mat<float> ya = a.value(mlp.forward(a, ps, a.constant(x)));
  const Mat<float> yb = b.value(mlp.forward(b, ps, b.constant(x)));
  EXPECT_EQ(std::memcmp(ya.data(), yb.data(), sizeof(float) * ya.size()), 0);
}

ConvSpec single_conv(int h, int w, int c, int out, int k, int s, Activation a) {
  ConvSpec spec;
  spec.height = h;
  spec.width = w;
  spec.channels = c;
  spec.layers.push_back({out, k, s, a});
  return spec;
}

TEST(ConvTest, IdentityKernelReproducesInput) {
  ParamSet<double> ps;
  ConvNet<double> net(single_conv(4, 5, 1, 1, 1, 1, Activation::kIdentity), ps, "c");
  ps.set(ps.find("c/conv0/w"), Mat<double>::Ones(1, 1));
  Rng rng(2);
  const Mat<double> x = random_matrix(2, 20, rng);
  Graph<double> g(false);
  EXPECT_TRUE(g.value(net.forward(g, ps, g.constant(x))).isApprox(x, 0.0));
}

TEST(ConvTest, ZeroInputGivesZeroOutput) {
  Rng rng(4);
  ParamSet<double> ps;
  ConvSpec spec = single_conv(7, 7, 1, 32, 2, 1, Activation::kRelu);
  spec.layers.push_back({64, 2, 1, Activation::kRelu});
  ConvNet<double> net(spec, ps, "c");
  net.initialize(ps, rng);
  Graph<double> g(false);
  Var y = net.forward(g, ps, g.constant(Mat<double>::Zero(1, 49)));
  EXPECT_EQ(g.value(y).cols(), 5 * 5 * 64);
  EXPECT_TRUE(g.value(y).isZero(0.0));
}

TEST(ConvTest, KernelLargerThanInputIsConfigError) {
  ParamSet<double> ps;
  EXPECT_THROW(ConvNet<double>(single_conv(3, 3, 1, 4, 4, 1, Activation::kRelu), ps, "c"), ConfigError);
  ConvSpec spec = single_conv(3, 3, 1, 4, 2, 1, Activation::kRelu);
  spec.layers.push_back({4, 3, 1, Activation::kRelu});  // 2x2 feature map, 3x3 kernel
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(ConvTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    ParamSet<double> ps;
    ConvSpec spec = single_conv(7, 7, 1, 3, 2, 1, Activation::kRelu);
    spec.layers.push_back({2, 2, 2, Activation::kIdentity});
    ConvNet<double> net(spec, ps, "c");
    net.initialize(ps, rng);
    randomize(ps, rng, 0.6);
    const std::size_t x_index = ps.add("x", 2, 49);
    ps.set(x_index, random_matrix(2, 49, rng));
    auto build = [&](Graph<double>& g, const ParamSet<double>& p) {
      Var y = net.forward(g, p, g.param(p, x_index));
      return g.sum(g.square(y));
    };
    EXPECT_LT(max_grad_rel_error(ps, build), 1e-4) << "seed " << seed;
  }
}

TEST(LstmTest, ZeroParamsKeepStateAtZero) {
  ParamSet<double> ps;
  Lstm<double> lstm(3, 4, ps, "lstm");
  Graph<double> g(false);
  Rng rng(5);
  Var h = g.constant(Mat<double>::Zero(1, 4));
  Var c = g.constant(Mat<double>::Zero(1, 4));
  auto [h1, c1] = lstm.step(g, ps, g.constant(random_matrix(1, 3, rng)), h, c);
  EXPECT_TRUE(g.value(h1).isZero(0.0));
  EXPECT_TRUE(g.value(c1).isZero(0.0));
  auto [h2, c2] = lstm.step(g, ps, g.constant(Mat<double>::Zero(1, 3)), h1, c1);
  auto [h3, c3] = lstm.step(g, ps, g.constant(Mat<double>::Zero(1, 3)), h2, c2);
  EXPECT_TRUE(g.value(h3).isZero(0.0));
  EXPECT_TRUE(g.value(c3).isZero(0.0));
}

TEST(LstmTest, WidthMismatchIsConfigError) {
  ParamSet<double> ps;
  Lstm<double> lstm(3, 4, ps, "lstm");
  Graph<double> g(false);
  Var h = g.constant(Mat<double>::Zero(1, 4));
  EXPECT_THROW(lstm.step(g, ps, g.constant(Mat<double>::Zero(1, 2)), h, h), ConfigError);
  Var bad = g.constant(Mat<double>::Zero(1, 5));
  EXPECT_THROW(lstm.step(g, ps, g.constant(Mat<double>::Zero(1, 3)), bad, bad), ConfigError);
}

TEST(LstmTest, BackpropThroughTimeMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    ParamSet<double> ps;
    Lstm<double> lstm(3, 4, ps, "lstm");
    lstm.initialize(ps, rng);
    randomize(ps, rng, 0.7);
    const std::size_t x_index = ps.add("x", 5 * 2, 3);
    ps.set(x_index, random_matrix(10, 3, rng));
    const Mat<double> h0 = random_matrix(2, 4, rng, 0.5);
    const Mat<double> c0 = random_matrix(2, 4, rng, 0.5);
    auto build = [&](Graph<double>& g, const ParamSet<double>& p) {
      Var xs = g.param(p, x_index);
      Var h = g.constant(h0), c = g.constant(c0);
      Var acc = g.constant_scalar(0.0);
      for (int t = 0; t < 5; ++t) {
        auto [nh, nc] = lstm.step(g, p, g.slice_rows(xs, 2 * t, 2), h, c);
        h = nh;
        c = nc;
        acc = g.add(acc, g.scale(g.sum(h), 1.0 + t));
      }
      return g.add(acc, g.sum(g.square(c)));
    };
    EXPECT_LT(max_grad_rel_error(ps, build), 1e-4) << "seed " << seed;
  }
}

TEST(GraphTest, CompositeOpsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(300 + seed);
    ParamSet<double> ps;
    const std::size_t a = ps.add("a", 4, 3);
    const std::size_t col = ps.add("col", 6, 1);
    randomize(ps, rng, 1.0);
    const std::vector<int> pick_index = {0, 2, 1, 2};
    const std::vector<std::pair<int, int>> ranges = {{0, 0}, {0, 3}, {2, 6}, {5, 6}};
    auto build = [&](Graph<double>& g, const ParamSet<double>& p) {
      Var A = g.param(p, a);
      Var lp = g.log_softmax(A);
      Var picked = g.pick(lp, pick_index);
      Var probs = g.softmax(A);
      Var ent = g.row_sum(g.mul(probs, lp));
      Var sums = g.range_sum(g.param(p, col), ranges);
      Var mixed = g.mul(g.add(picked, ent), g.tanh(sums));
      Var cat = g.concat_cols(mixed, g.sigmoid(sums));
      Var rows = g.concat_rows({g.slice_rows(cat, 0, 2), g.slice_rows(cat, 2, 2)});
      return g.add(g.sum(g.square(rows)), g.mean(g.exp(g.scale(g.slice_cols(A, 1, 2), 0.3))));
    };
    EXPECT_LT(max_grad_rel_error(ps, build), 1e-4) << "seed " << seed;
  }
}

TEST(StopGradientTest, BlockedBranchContributesNothing) {
  ParamSet<double> ps;
  const std::size_t p = ps.add("p", 1, 1);
  ps.set(p, Mat<double>::Constant(1, 1, 1.75));
  Graph<double> g;
  Var x = g.param(ps, p);
  Var f = g.mul(g.stop_gradient(x), x);
  g.backward(f);
  ASSERT_NE(g.grad(x), nullptr);
  EXPECT_EQ((*g.grad(x))(0, 0), 1.75);
}

TEST(StopGradientTest, LossOfOnlyStoppedValueHasZeroGradient) {
  Rng rng(7);
  ParamSet<double> ps;
  Mlp<double> b(MlpSpec::make({3, 4, 1}, Activation::kRelu, Activation::kIdentity), ps, "b");
  b.initialize(ps, rng);
  Graph<double> g;
  Var out = b.forward(g, ps, g.constant(random_matrix(2, 3, rng)));
  Var loss = g.sum(g.square(g.add_scalar(g.stop_gradient(out), -1.0)));
  g.backward(loss);
  ParamSet<double> grads = ps.zeros_like();
  g.accumulate_param_grads(ps, grads);
  EXPECT_EQ(grads.squared_norm(), 0.0);
}

TEST(StopGradientTest, ForwardValueIsBitExact) {
  Rng rng(8);
  Graph<float> g;
  const Mat<float> x = random_matrix(3, 3, rng).cast<float>();
  Var v = g.constant(x);
  const Mat<float>& y = g.value(g.stop_gradient(v));
  EXPECT_EQ(std::memcmp(x.data(), y.data(), sizeof(float) * x.size()), 0);
}

TEST(OptimizerTest, ZeroGradientLeavesParamsAndBumpsVersion) {
  for (OptimizerKind kind : {OptimizerKind::kRmsProp, OptimizerKind::kAdam}) {
    Rng rng(9);
    ParamSet<double> ps;
    ps.add("w", 3, 2);
    randomize(ps, rng);
    const Mat<double> before = ps.value(0);
    OptimizerConfig cfg;
    cfg.kind = kind;
    Optimizer<double> opt(cfg, ps);
    const auto v0 = ps.version();
    opt.step(ps, ps.zeros_like());
    EXPECT_TRUE(ps.value(0) == before);
    EXPECT_GT(ps.version(), v0);
  }
}

TEST(OptimizerTest, AdamFirstStepMovesByLearningRate) {
  ParamSet<double> ps;
  ps.add("w", 1, 1);
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kAdam;
  cfg.learning_rate = 0.1;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  cfg.epsilon = 1e-8;
  Optimizer<double> opt(cfg, ps);
  ParamSet<double> grads = ps.zeros_like();
  grads.set(0, Mat<double>::Ones(1, 1));
  opt.step(ps, grads);
  // m_hat = v_hat = 1, so the update is -lr / (1 + eps).
  EXPECT_NEAR(ps.value(0)(0, 0), -0.1 / (1.0 + 1e-8), 1e-12);
}

TEST(OptimizerTest, RmsPropConstantGradientDecreasesMonotonically) {
  ParamSet<double> ps;
  ps.add("w", 1, 1);
  OptimizerConfig cfg;
  cfg.learning_rate = 1e-3;
  Optimizer<double> opt(cfg, ps);
  ParamSet<double> grads = ps.zeros_like();
  grads.set(0, Mat<double>::Constant(1, 1, 0.3));
  double prev = ps.value(0)(0, 0);
  for (int i = 0; i < 50; ++i) {
    opt.step(ps, grads);
    EXPECT_LT(ps.value(0)(0, 0), prev);
    prev = ps.value(0)(0, 0);
  }
}

TEST(OptimizerTest, RejectsNonFiniteAndMismatchedGradients) {
  ParamSet<double> ps;
  ps.add("w", 2, 2);
  Optimizer<double> opt(OptimizerConfig{}, ps);
  ParamSet<double> grads = ps.zeros_like();
  Mat<double> bad = Mat<double>::Zero(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  grads.set(0, bad);
  const auto v0 = ps.version();
  EXPECT_THROW(opt.step(ps, grads), NumericError);
  EXPECT_EQ(ps.version(), v0);
  EXPECT_TRUE(ps.value(0).isZero(0.0));
  ParamSet<double> other;
  other.add("w", 2, 3);
  EXPECT_THROW(opt.step(ps, other), ConfigError);
}

TEST(OptimizerTest, ValidatesConfig) {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = OptimizerConfig{};
  cfg.decay = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(OptimizerTest, ClipGlobalNorm) {
  ParamSet<double> grads;
  grads.add("a", 1, 2);
  grads.set(0, (Mat<double>(1, 2) << 30.0, 40.0).finished());
  EXPECT_DOUBLE_EQ(clip_global_norm(grads, 5.0), 50.0);
  EXPECT_NEAR(std::sqrt(grads.squared_norm()), 5.0, 1e-12);
}

TEST(ParamSetTest, NamesUniqueAndShapesFrozen) {
  ParamSet<float> ps;
  ps.add("w", 2, 2);
  EXPECT_THROW(ps.add("w", 1, 1), ConfigError);
  EXPECT_THROW(ps.set(0, Mat<float>::Zero(3, 2)), ConfigError);
  const auto v = ps.version();
  ps.set(0, Mat<float>::Ones(2, 2));
  EXPECT_GT(ps.version(), v);
}

}  // namespace
}  // namespace sacredit::nn
