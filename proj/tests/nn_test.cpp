// Copyright 2026 The scenesketch Authors.
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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "scenesketch/nn/checkpoint.hpp"
#include "scenesketch/nn/gmm.hpp"
#include "scenesketch/nn/gradcheck.hpp"
#include "scenesketch/nn/layers.hpp"
#include "scenesketch/nn/optim.hpp"
#include "support/gradient_suite.hpp"

namespace scenesketch::nn {
namespace {

using testing::random_tensor;

TEST(Linear, IdentityWeightPassesInputThrough) {
  std::mt19937_64 rng(1);
  ParameterStore store;
  Linear lin(store, "lin", 3, 3, rng);
  Var w = lin.weight();
  Var b = lin.bias();
  w.mutable_value() = Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  b.mutable_value().fill(0.0);
  const Tensor x({2, 3}, {0.5, -1.0, 2.0, 3.0, 0.25, -0.125});
  EXPECT_EQ(lin(Var::constant(x)).value(), x);
}

TEST(Embedding, OneHotTimesTableIsTheRow) {
  std::mt19937_64 rng(2);
  ParameterStore store;
  Embedding emb(store, "e", 5, 4, rng);
  Tensor onehot({1, 5}, {0, 0, 1, 0, 0});
  const Tensor viamatmul = matmul(Var::constant(onehot), emb.table()).value();
  const Tensor lookup = emb({2}).value();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(viamatmul[i], lookup[i]);
}

TEST(GradientSuite, EveryOperationMatchesCentralDifferences) {
  const auto cases = testing::run_gradient_suite();
  ASSERT_FALSE(cases.empty());
  for (const auto& c : cases) {
    EXPECT_LT(c.result.max_relative_error, 1e-3)
        << c.op << " " << c.shape << " worst " << c.result.worst << " abs " << c.result.max_absolute_error;
    EXPECT_GT(c.result.entries, 0u) << c.op;
  }
}

TEST(Attention, SinglePositionAttendsToItself) {
  std::mt19937_64 rng(3);
  ParameterStore store;
  MaskedSelfAttention attn(store, "a", 8, 2, rng);
  const auto r = attn(Var::constant(random_tensor({1, 8}, rng)));
  ASSERT_EQ(r.head_weights.size(), 2u);
  for (const auto& w : r.head_weights) {
    ASSERT_EQ(w.shape(), (Shape{1, 1}));
    EXPECT_EQ(w[0], 1.0);
  }
}

TEST(Attention, RowsAreCausalSimplices) {
  std::mt19937_64 rng(4);
  ParameterStore store;
  MaskedSelfAttention attn(store, "a", 12, 3, rng);
  const auto r = attn(Var::constant(random_tensor({7, 12}, rng, -2, 2)));
  for (const auto& w : r.head_weights) {
    for (std::size_t i = 0; i < 7; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        if (j > i) EXPECT_EQ(w.at(i, j), 0.0);
        total += w.at(i, j);
      }
      EXPECT_NEAR(total, 1.0, 1e-5);
    }
  }
}

TEST(Attention, HeadsMustDivideWidth) {
  std::mt19937_64 rng(5);
  ParameterStore store;
  EXPECT_THROW(MaskedSelfAttention(store, "a", 10, 3, rng), ConfigError);
}

TEST(Attention, PermutingFuturePositionsLeavesPastUnchanged) {
  std::mt19937_64 rng(6);
  ParameterStore store;
  MaskedSelfAttention attn(store, "a", 8, 2, rng);
  Tensor x = random_tensor({6, 8}, rng);
  Tensor y = x;
  // swap rows 4 and 5, both strictly after position 3
  for (std::size_t c = 0; c < 8; ++c) std::swap(y.at(4, c), y.at(5, c));
  const Tensor a = attn(Var::constant(x)).output.value();
  const Tensor b = attn(Var::constant(y)).output.value();
  for (std::size_t i = 0; i <= 3; ++i) {
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(a.at(i, c), b.at(i, c));
  }
}

TEST(Attention, CausalityGradientProbeIsZeroForFuturePositions) {
  std::mt19937_64 rng(7);
  ParameterStore store;
  TransformerBlock block(store, "b", 8, 2, 16, rng);
  const std::size_t len = 6;
  for (std::size_t i = 0; i < len; ++i) {
    Var x = Var::leaf(random_tensor({len, 8}, rng));
    const Var out = block(x).output;
    backward(sum(slice_rows(out, i, 1)));
    for (std::size_t j = i + 1; j < len; ++j) {
      for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(x.grad().at(j, c), 0.0) << "output " << i << " input " << j;
    }
    store.zero_grad();
  }
}

TEST(TransformerBlock, PreservesShapeAndRejectsEmptyInput) {
  std::mt19937_64 rng(8);
  ParameterStore store;
  TransformerBlock block(store, "b", 16, 4, 32, rng);
  const auto r = block(Var::constant(random_tensor({5, 16}, rng)));
  EXPECT_EQ(r.output.shape(), (Shape{5, 16}));
  EXPECT_EQ(r.head_weights.size(), 4u);
  EXPECT_THROW(block(Var::constant(Tensor::matrix(0, 16))), ShapeError);
}

TEST(BiLstm, BackwardPassEqualsForwardRunOverReversedInput) {
  std::mt19937_64 rng(9);
  ParameterStore store;
  BiLstm enc(store, "enc", 3, 5, rng);
  std::vector<Var> steps;
  for (int t = 0; t < 6; ++t) steps.push_back(Var::constant(random_tensor({2, 3}, rng)));
  const BiLstmResult r = enc(steps, {6, 6});
  std::vector<Var> reversed(steps.rbegin(), steps.rend());
  const LstmState oracle = enc.backward_cell().run(reversed);
  for (std::size_t i = 0; i < r.backward_final.value().size(); ++i) {
    EXPECT_DOUBLE_EQ(r.backward_final.value()[i], oracle.h.value()[i]);
  }
  EXPECT_EQ(r.forward_final.shape(), (Shape{2, 5}));
}

TEST(BiLstm, PaddingDoesNotChangeShorterRows) {
  std::mt19937_64 rng(10);
  ParameterStore store;
  BiLstm enc(store, "enc", 3, 4, rng);
  std::vector<Var> steps;
  for (int t = 0; t < 5; ++t) steps.push_back(Var::constant(random_tensor({1, 3}, rng)));
  const BiLstmResult full = enc({steps.begin(), steps.begin() + 3}, {3});
  const BiLstmResult padded = enc(steps, {3});
  EXPECT_EQ(full.forward_final.value(), padded.forward_final.value());
  EXPECT_EQ(full.backward_final.value(), padded.backward_final.value());
}

TEST(ConvMaskEncoder, ShapeAndDeterministicBlankEmbedding) {
  std::mt19937_64 rng(11);
  ParameterStore store;
  ConvMaskEncoder enc(store, "m", 64, {4, 8, 8, 8}, 32, rng);
  const Tensor blank = Tensor::matrix(3, 64 * 64);
  const Tensor a = enc(Var::constant(blank)).value();
  const Tensor b = enc(Var::constant(blank)).value();
  EXPECT_EQ(a.shape(), (Shape{3, 32}));
  EXPECT_EQ(a, b);
  EXPECT_THROW(enc(Var::constant(Tensor::matrix(1, 100))), ShapeError);
}

// --- GMM ----------------------------------------------------------------

GMMParams single_standard(double mx = 0.0, double my = 0.0) {
  return {{1.0}, {mx}, {my}, {1.0}, {1.0}, {0.0}};
}

TEST(Gmm, StandardNormalAtMeanIsOneOverTwoPi) {
  const double ll = gmm_log_likelihood(single_standard(0.3, -0.2), {0.3, -0.2});
  EXPECT_NEAR(std::exp(ll), 1.0 / (2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(ll, -1.837877066409345, 1e-12);
}

/// Independent direct-density oracle: plain product formula, no log-sum-exp.
double direct_density(const GMMParams& p, double x, double y) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.components(); ++k) {
    const double dx = x - p.mean_x[k];
    const double dy = y - p.mean_y[k];
    const double sx = p.std_x[k];
    const double sy = p.std_y[k];
    const double r = p.rho[k];
    const double det = sx * sx * sy * sy * (1 - r * r);
    // inverse covariance quadratic form
    const double q = (sy * sy * dx * dx - 2 * r * sx * sy * dx * dy + sx * sx * dy * dy) / det;
    total += p.weights[k] * std::exp(-0.5 * q) / (2 * std::numbers::pi * std::sqrt(det));
  }
  return total;
}

TEST(Gmm, LogLikelihoodMatchesDirectDensityOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + trial % 5;
    Tensor raw({1, kGmmRawPerComponent * m});
    for (auto& v : raw.storage()) v = u(rng);
    const GMMParams p = gmm_from_raw(raw.values(), m);
    const double x = 2 * u(rng);
    const double y = 2 * u(rng);
    const double oracle = std::log(direct_density(p, x, y));
    EXPECT_NEAR(gmm_log_likelihood(p, {x, y}), oracle, 1e-9);
    // the fused training loss agrees too
    Tensor target({1, 2}, {x, y});
    EXPECT_NEAR(-gmm_nll(Var::constant(raw), target, m).item(), oracle, 1e-9);
  }
}

TEST(Gmm, WeightsFromRawFormASimplex) {
  Tensor raw({1, 18}, std::vector<double>(18, 0.3));
  const GMMParams p = gmm_from_raw(raw.values(), 3);
  double total = 0;
  for (double w : p.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NO_THROW(p.validate());
}

TEST(Gmm, RejectsInvalidParameters) {
  GMMParams p = single_standard();
  p.std_x[0] = -1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = single_standard();
  p.weights[0] = 0.5;
  EXPECT_THROW(gmm_log_likelihood(p, {0, 0}), ParameterError);
  p = single_standard();
  p.rho[0] = 1.0;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Gmm, SampleMeanWithinMonteCarloBound) {
  const GMMParams p{{0.3, 0.7}, {-1.0, 2.0}, {0.5, -0.5}, {0.4, 0.8}, {1.2, 0.3}, {0.5, -0.3}};
  std::mt19937_64 rng(13);
  const int n = 100000;
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    const Point2 s = gmm_sample(p, 1.0, rng);
    sx += s.x;
    sy += s.y;
  }
  const Point2 mean = p.mixture_mean();
  // mixture variance per axis: sum w (s^2 + mu^2) - mean^2
  double vx = 0, vy = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    vx += p.weights[k] * (p.std_x[k] * p.std_x[k] + p.mean_x[k] * p.mean_x[k]);
    vy += p.weights[k] * (p.std_y[k] * p.std_y[k] + p.mean_y[k] * p.mean_y[k]);
  }
  vx -= mean.x * mean.x;
  vy -= mean.y * mean.y;
  EXPECT_LT(std::abs(sx / n - mean.x), 3 * std::sqrt(vx / n));
  EXPECT_LT(std::abs(sy / n - mean.y), 3 * std::sqrt(vy / n));
}

TEST(Gmm, ZeroTemperatureReturnsDominantMean) {
  const GMMParams p{{0.2, 0.8}, {-1.0, 2.0}, {0.5, -0.5}, {0.4, 0.8}, {1.2, 0.3}, {0.5, -0.3}};
  std::mt19937_64 rng(14);
  for (int i = 0; i < 5; ++i) {
    const Point2 s = gmm_sample(p, 0.0, rng);
    EXPECT_EQ(s.x, 2.0);
    EXPECT_EQ(s.y, -0.5);
  }
}

// --- Optimizer and schedules --------------------------------------------------

TEST(Adam, ZeroGradientDoesNotMoveParameters) {
  ParameterStore store;
  Var p = store.add("p", Tensor({1, 3}, {0.5, -0.25, 1.0}));
  Adam adam(store, {.lr = 0.1});
  const Tensor before = p.value();
  backward(scale(sum(p), 0.0));
  adam.step();
  EXPECT_EQ(p.value(), before);
}

TEST(Adam, ClipsGlobalNormToOne) {
  ParameterStore store;
  Var a = store.add("a", Tensor({1, 1}, {0.0}));
  Var b = store.add("b", Tensor({1, 1}, {0.0}));
  backward(add(scale(a, 6.0), scale(b, 8.0)));  // gradient (6, 8), norm 10
  const double before = clip_grad_norm(store, 1.0);
  EXPECT_DOUBLE_EQ(before, 10.0);
  EXPECT_NEAR(global_grad_norm(store), 1.0, 1e-12);
  EXPECT_NEAR(a.grad()[0], 0.6, 1e-12);
  EXPECT_NEAR(b.grad()[0], 0.8, 1e-12);
}

TEST(Adam, OneStepReducesQuadratic) {
  ParameterStore store;
  Var w = store.add("w", Tensor({1, 1}, {3.0}));
  Adam adam(store, {.lr = 0.01});
  auto loss = [&] { return square(add_scalar(w, -1.0)); };  // (w-1)^2
  const double before = loss().item();
  backward(loss());
  adam.step();
  EXPECT_LT(loss().item(), before);
  // first Adam step moves by lr in the descent direction
  EXPECT_NEAR(w.value()[0], 3.0 - 0.01, 1e-6);
}

TEST(Schedule, KlWeightAndLearningRateEndpoints) {
  const ExpSchedule kl{0.01, 0.5, 0.99995, ExpSchedule::Direction::Grow};
  const ExpSchedule lr{1e-3, 1e-5, 0.9999, ExpSchedule::Direction::Decay};
  EXPECT_NEAR(schedule_value(kl, 0), 0.01, 1e-15);
  EXPECT_NEAR(schedule_value(kl, 2'000'000), 0.5, 1e-12);
  EXPECT_NEAR(schedule_value(lr, 0), 1e-3, 1e-15);
  EXPECT_NEAR(schedule_value(lr, 1'000'000), 1e-5, 1e-15);
  double prev = 0.0;
  for (std::uint64_t s = 0; s < 100000; s += 997) {
    const double v = kl.value(s);
    EXPECT_GT(v, prev);
    EXPECT_LT(v, 0.5);
    EXPECT_GT(lr.value(s), 1e-5);
    prev = v;
  }
  EXPECT_THROW((ExpSchedule{0.01, 0.5, 0.9, ExpSchedule::Direction::Decay}.validate()), ConfigError);
}

// --- Checkpoint -------------------------------------------------------------

TEST(Checkpoint, RoundTripIsExactForParametersAndOptimizer) {
  std::mt19937_64 rng(15);
  ParameterStore store;
  Linear lin(store, "lin", 4, 3, rng);
  Adam adam(store);
  backward(sum(lin(Var::constant(random_tensor({2, 4}, rng)))));
  adam.step();

  Checkpoint ck;
  ck.meta["kind"] = "test";
  add_parameters(ck, store, &adam);
  std::stringstream buf;
  write_checkpoint(buf, ck);

  const Checkpoint back = read_checkpoint(buf);
  EXPECT_EQ(back.meta["kind"], "test");
  ParameterStore other;
  std::mt19937_64 rng2(99);
  Linear lin2(other, "lin", 4, 3, rng2);
  load_parameters(back, other);
  EXPECT_EQ(lin2.weight().value(), lin.weight().value());
  EXPECT_EQ(lin2.bias().value(), lin.bias().value());
  ASSERT_TRUE(back.optimizer.has_value());
  EXPECT_EQ(back.optimizer->step, 1u);
}

TEST(Checkpoint, RejectsShapeMismatchAndBadMagic) {
  std::mt19937_64 rng(16);
  ParameterStore store;
  Linear lin(store, "lin", 4, 3, rng);
  Checkpoint ck;
  add_parameters(ck, store);
  ParameterStore other;
  Linear wrong(other, "lin", 3, 3, rng);
  EXPECT_THROW(load_parameters(ck, other), CheckpointError);
  std::stringstream junk("NOPE....");
  EXPECT_THROW(read_checkpoint(junk), CheckpointError);
}

}  // namespace
}  // namespace scenesketch::nn
