// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rootnet/gradcheck.hpp"
#include "rootnet/kernels.hpp"
#include "rootnet/ops.hpp"
#include "rootnet/optim.hpp"
#include "rootnet/reference.hpp"
#include "rootnet/tape.hpp"
#include "test_util.hpp"

namespace rootnet {
namespace {

using testing::max_rel_diff;
using testing::random_tensor;

// Independent loop oracles.

TensorD conv3x3_oracle(const TensorD& x, const TensorD& w, const TensorD& b) {
  const Shape s = x.shape();
  const std::int64_t co_n = w.shape().n;
  TensorD out(Shape{s.n, co_n, s.h, s.w});
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < co_n; ++co)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t xx = 0; xx < s.w; ++xx) {
          double acc = b.at(co, 0, 0, 0);
          for (std::int64_t ci = 0; ci < s.c; ++ci)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                const std::int64_t yy = y + dy, xs = xx + dx;
                if (yy < 0 || yy >= s.h || xs < 0 || xs >= s.w) continue;
                acc += w.at(co, ci, dy + 1, dx + 1) * x.at(n, ci, yy, xs);
              }
          out.at(n, co, y, xx) = acc;
        }
  return out;
}

TensorD conv1x1_oracle(const TensorD& x, const TensorD& w, const TensorD& b) {
  const Shape s = x.shape();
  TensorD out(Shape{s.n, w.shape().n, s.h, s.w});
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t y = 0; y < s.h; ++y)
      for (std::int64_t xx = 0; xx < s.w; ++xx)
        for (std::int64_t co = 0; co < w.shape().n; ++co) {
          double acc = b.at(co, 0, 0, 0);
          for (std::int64_t ci = 0; ci < s.c; ++ci) acc += w.at(co, ci, 0, 0) * x.at(n, ci, y, xx);
          out.at(n, co, y, xx) = acc;
        }
  return out;
}

double inner(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

TensorD zero_bias(std::int64_t c) { return TensorD(Shape{c, 1, 1, 1}); }

// conv2d

TEST(Conv2d, OnesKernelCountsPaddedNeighbours) {
  const TensorD x(Shape{1, 1, 3, 3}, 1.0);
  const TensorD w(Shape{1, 1, 3, 3}, 1.0);
  const auto y = ops::conv2d(x, w, zero_bias(1));
  EXPECT_EQ(y.at(0, 0, 1, 1), 9.0);
  EXPECT_EQ(y.at(0, 0, 0, 0), 4.0);
  EXPECT_EQ(y.at(0, 0, 0, 2), 4.0);
  EXPECT_EQ(y.at(0, 0, 2, 0), 4.0);
  EXPECT_EQ(y.at(0, 0, 2, 2), 4.0);
  EXPECT_EQ(y.at(0, 0, 0, 1), 6.0);
}

TEST(Conv2d, IdentityKernelIsExact) {
  std::mt19937_64 rng(3);
  const auto x = random_tensor(Shape{2, 3, 7, 9}, rng);
  TensorD w(Shape{3, 3, 3, 3});
  for (int c = 0; c < 3; ++c) w.at(c, c, 1, 1) = 1.0;
  EXPECT_EQ(ops::conv2d(x, w, zero_bias(3)), x);
}

TEST(Conv2d, MatchesLoopOracle) {
  std::mt19937_64 rng(11);
  const auto x = random_tensor(Shape{2, 3, 8, 8}, rng);
  const auto w = random_tensor(Shape{4, 3, 3, 3}, rng);
  const auto b = random_tensor(Shape{4, 1, 1, 1}, rng);
  const auto got = ops::conv2d(x, w, b);
  const auto want = conv3x3_oracle(x, w, b);
  EXPECT_LT(max_rel_diff(got.data(), want.data()), 1e-12);
}

TEST(Conv2d, MatchesOracleAcrossShapes) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> ext(1, 40), ch(1, 20), batch(1, 3);
  for (int trial = 0; trial < 25; ++trial) {
    const Shape s{batch(rng), ch(rng), ext(rng), ext(rng)};
    const std::int64_t cout = ch(rng);
    const auto x = random_tensor(s, rng);
    const auto w = random_tensor(Shape{cout, s.c, 3, 3}, rng);
    const auto b = random_tensor(Shape{cout, 1, 1, 1}, rng);
    const auto got = ops::conv2d(x, w, b);
    ASSERT_EQ(got.shape(), (Shape{s.n, cout, s.h, s.w})) << to_string(s);
    EXPECT_LT(max_rel_diff(got.data(), conv3x3_oracle(x, w, b).data()), 1e-12) << to_string(s);
  }
}

TEST(Conv2d, ChannelMismatchNamesBothShapes) {
  const TensorD x(Shape{1, 2, 4, 4});
  const TensorD w(Shape{3, 5, 3, 3});
  try {
    ops::conv2d(x, w, zero_bias(3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[1x2x4x4]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[3x5x3x3]"), std::string::npos) << msg;
  }
}

TEST(Conv2d, SamePaddingPreservesOddSizes) {
  std::mt19937_64 rng(5);
  for (std::int64_t h : {1, 2, 3, 5, 17, 33})
    for (std::int64_t w : {1, 4, 7, 31}) {
      const auto x = random_tensor(Shape{1, 2, h, w}, rng);
      const auto k = random_tensor(Shape{3, 2, 3, 3}, rng);
      const auto y = ops::conv2d(x, k, zero_bias(3));
      EXPECT_EQ(y.shape().h, h);
      EXPECT_EQ(y.shape().w, w);
    }
}

// conv1x1

TEST(Conv1x1, UnitWeightsSumChannels) {
  std::mt19937_64 rng(1);
  const auto x = random_tensor(Shape{1, 2, 3, 4}, rng);
  const TensorD w(Shape{1, 2, 1, 1}, 1.0);
  const auto y = ops::conv1x1(x, w, zero_bias(1));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(y.at(0, 0, i, j), x.at(0, 0, i, j) + x.at(0, 1, i, j));
}

TEST(Conv1x1, IdentityMatrix) {
  std::mt19937_64 rng(2);
  const auto x = random_tensor(Shape{2, 5, 3, 3}, rng);
  TensorD w(Shape{5, 5, 1, 1});
  for (int c = 0; c < 5; ++c) w.at(c, c, 0, 0) = 1.0;
  EXPECT_EQ(ops::conv1x1(x, w, zero_bias(5)), x);
}

TEST(Conv1x1, MatchesMatrixOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_tensor(Shape{2, 7, 5, 6}, rng);
    const auto w = random_tensor(Shape{9, 7, 1, 1}, rng);
    const auto b = random_tensor(Shape{9, 1, 1, 1}, rng);
    EXPECT_LT(max_rel_diff(ops::conv1x1(x, w, b).data(), conv1x1_oracle(x, w, b).data()), 1e-12);
  }
}

TEST(Conv1x1, ChannelMismatchThrows) {
  EXPECT_THROW(ops::conv1x1(TensorD(Shape{1, 2, 2, 2}), TensorD(Shape{1, 3, 1, 1}), zero_bias(1)),
               ShapeError);
}

// relu

TEST(Relu, Examples) {
  const TensorD x(Shape{1, 1, 1, 3}, std::vector<double>{-1.0, 0.0, 2.0});
  EXPECT_EQ(ops::relu(x), TensorD(Shape{1, 1, 1, 3}, std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(Relu, AllNegativeGivesZeroGradient) {
  TensorD x(Shape{1, 2, 3, 3}, -0.5);
  TensorD r(Shape{1, 2, 3, 3}, 1.0);
  Tape<double> tape;
  const Var v = tape.param(x);
  const Var y = tape.relu(v);
  for (double o : tape.value(y).data()) EXPECT_EQ(o, 0.0);
  tape.backward(tape.project(y, r));
  for (double g : x.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Relu, GradientAtZeroIsZero) {
  TensorD x(Shape{1, 1, 1, 1}, 0.0);
  Tape<double> tape;
  const Var y = tape.relu(tape.param(x));
  tape.backward(tape.project(y, TensorD(Shape{1, 1, 1, 1}, 1.0)));
  EXPECT_EQ(x.grad()[0], 0.0);
}

// maxpool2

TEST(MaxPool, WindowMaximumAndRouting) {
  TensorD x(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  Tape<double> tape;
  const Var y = tape.maxpool2(tape.param(x));
  EXPECT_EQ(tape.value(y).at(0, 0, 0, 0), 4.0);
  tape.backward(tape.project(y, TensorD(Shape{1, 1, 1, 1}, 1.0)));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()),
            (std::vector<double>{0, 0, 0, 1}));
}

TEST(MaxPool, TiesGoToFirstIndex) {
  TensorD x(Shape{1, 1, 4, 4}, 2.5);
  const auto r = ops::maxpool2(x);
  for (double v : r.output.data()) EXPECT_EQ(v, 2.5);
  for (auto a : r.argmax) EXPECT_EQ(a, 0);
}

TEST(MaxPool, MatchesWindowOracle) {
  std::mt19937_64 rng(8);
  TensorD x = random_tensor(Shape{1, 1, 6, 6}, rng);
  const TensorD g = random_tensor(Shape{1, 1, 3, 3}, rng);
  Tape<double> tape;
  const Var y = tape.maxpool2(tape.param(x));
  const TensorD out = tape.value(y);
  tape.backward(tape.project(y, g));
  TensorD want_grad(x.shape());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int by = 2 * i, bx = 2 * j;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if (x.at(0, 0, 2 * i + a, 2 * j + b) > x.at(0, 0, by, bx)) {
            by = 2 * i + a;
            bx = 2 * j + b;
          }
      EXPECT_EQ(out.at(0, 0, i, j), x.at(0, 0, by, bx));
      want_grad.at(0, 0, by, bx) += g.at(0, 0, i, j);
    }
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()),
            std::vector<double>(want_grad.data().begin(), want_grad.data().end()));
}

TEST(MaxPool, OddExtentThrows) {
  EXPECT_THROW(ops::maxpool2(TensorD(Shape{1, 1, 5, 4})), ShapeError);
  EXPECT_THROW(ops::maxpool2(TensorD(Shape{1, 1, 4, 3})), ShapeError);
}

// transpose_conv2

TEST(TransposeConv, SinglePixelSpreadsKernel) {
  const TensorD x(Shape{1, 1, 1, 1}, 3.0);
  const TensorD w(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  const auto y = ops::transpose_conv2(x, w, zero_bias(1));
  EXPECT_EQ(y, TensorD(Shape{1, 1, 2, 2}, std::vector<double>{3, 6, 9, 12}));
}

TEST(TransposeConv, AdjointOfStridedConvolution) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ext(1, 9), ch(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s{2, ch(rng), ext(rng), ext(rng)};
    const std::int64_t cout = ch(rng);
    const auto x = random_tensor(s, rng);
    const auto w = random_tensor(Shape{s.c, cout, 2, 2}, rng);
    const auto y = random_tensor(Shape{s.n, cout, 2 * s.h, 2 * s.w}, rng);
    const auto tx = ops::transpose_conv2(x, w, zero_bias(cout));
    TensorD sy(s);
    reference::strided_conv2<double>(y.data(), y.shape(), w.data(), s.c, sy.data());
    const double lhs = inner(tx.data(), y.data());
    const double rhs = inner(x.data(), sy.data());
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

// concat / split

TEST(Concat, EmptySecondOperandIsIdentity) {
  std::mt19937_64 rng(1);
  const auto x = random_tensor(Shape{2, 3, 4, 4}, rng);
  EXPECT_EQ(ops::concat_channels(x, TensorD(Shape{2, 0, 4, 4})), x);
}

TEST(Concat, ChannelPlacement) {
  std::mt19937_64 rng(2);
  const auto a = random_tensor(Shape{1, 2, 3, 3}, rng);
  const auto b = random_tensor(Shape{1, 4, 3, 3}, rng);
  const auto c = ops::concat_channels(a, b);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) {
      EXPECT_EQ(c.at(0, 0, y, x), a.at(0, 0, y, x));
      EXPECT_EQ(c.at(0, 2, y, x), b.at(0, 0, y, x));
    }
}

TEST(Concat, SplitRoundTrip) {
  std::mt19937_64 rng(3);
  const auto a = random_tensor(Shape{3, 2, 5, 4}, rng);
  const auto b = random_tensor(Shape{3, 5, 5, 4}, rng);
  const auto [ra, rb] = ops::split_channels(ops::concat_channels(a, b), 2);
  EXPECT_EQ(ra, a);
  EXPECT_EQ(rb, b);
}

TEST(Concat, SpatialMismatchThrows) {
  EXPECT_THROW(ops::concat_channels(TensorD(Shape{1, 1, 4, 4}), TensorD(Shape{1, 1, 4, 5})),
               ShapeError);
}

// sigmoid

TEST(Sigmoid, Examples) {
  EXPECT_EQ(ops::stable_sigmoid(0.0), 0.5);
  EXPECT_NEAR(ops::stable_sigmoid(40.0), 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(ops::stable_sigmoid(-700.0)));
  EXPECT_TRUE(std::isfinite(ops::stable_sigmoid(700.0)));
  EXPECT_TRUE(std::isfinite(ops::stable_sigmoid(-700.0f)));
  EXPECT_GT(ops::stable_sigmoid(-700.0), 0.0);
}

// weighted_bce

TEST(WeightedBce, Examples) {
  const TensorD z(Shape{1, 1, 1, 1}, 0.0);
  const TensorD t(Shape{1, 1, 1, 1}, 1.0);
  EXPECT_NEAR(ops::weighted_bce(z, t, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(ops::weighted_bce(z, t, 20.0), 20.0 * std::log(2.0), 1e-13);
  EXPECT_NEAR(ops::weighted_bce(z, t, 20.0), 13.8629, 1e-4);
}

TEST(WeightedBce, SaturatedLogitsStayFinite) {
  const TensorD z(Shape{1, 1, 1, 4}, std::vector<double>{-800, 800, -800, 800});
  const TensorD t(Shape{1, 1, 1, 4}, std::vector<double>{1, 0, 0, 1});
  const double loss = ops::weighted_bce(z, t, 2.0);
  EXPECT_NEAR(loss, (2.0 * 800 + 800) / 4.0, 1e-9);
  std::vector<double> g(4, 0.0);
  ops::weighted_bce_grad(z, t, 2.0, 1.0, std::span<double>(g));
  for (double v : g) EXPECT_TRUE(std::isfinite(v));
}

TEST(WeightedBce, NonBinaryTargetRejected) {
  const TensorD z(Shape{1, 1, 1, 2});
  const TensorD t(Shape{1, 1, 1, 2}, std::vector<double>{0.0, 0.5});
  EXPECT_THROW(ops::weighted_bce(z, t, 1.0), ValidationError);
}

TEST(WeightedBce, PositiveWeightScalesOnlyPositives) {
  const TensorD z(Shape{1, 1, 1, 2}, std::vector<double>{0.3, -1.2});
  const TensorD t(Shape{1, 1, 1, 2}, std::vector<double>{0.0, 0.0});
  EXPECT_EQ(ops::weighted_bce(z, t, 1.0), ops::weighted_bce(z, t, 20.0));
}

// sgd_momentum_step

TEST(Sgd, PlainStepSubtractsGradient) {
  Tensor p(Shape{1, 1, 1, 3}, std::vector<float>{1, 2, 3});
  auto g = p.ensure_grad();
  g[0] = 0.5f;
  g[1] = -1.0f;
  g[2] = 2.0f;
  OptState<float> st(1.0f, 0.0f);
  sgd_momentum_step(p, st);
  EXPECT_EQ(p, Tensor(Shape{1, 1, 1, 3}, std::vector<float>{0.5f, 3.0f, 1.0f}));
  EXPECT_FALSE(p.has_grad());
}

TEST(Sgd, TwoStepsClosedForm) {
  const double lr = 0.1, m = 0.8, g = 1.5;
  TensorD p(Shape{1, 1, 1, 1}, 0.0);
  OptState<double> st(lr, m);
  for (int i = 0; i < 2; ++i) {
    p.ensure_grad()[0] = g;
    sgd_momentum_step(p, st);
  }
  EXPECT_NEAR(-p.data()[0], lr * g * (2.0 + m), 1e-15);
}

TEST(Sgd, QuadraticConverges) {
  TensorD w(Shape{1, 1, 1, 1}, 1.0);
  OptState<double> st(0.1, 0.8);
  for (int i = 0; i < 50; ++i) {
    w.ensure_grad()[0] = w.data()[0];
    sgd_momentum_step(w, st);
  }
  // Scalar recurrence: v' = m v + w, w' = w - lr v'.
  double v = 0.0, x = 1.0;
  for (int i = 0; i < 50; ++i) {
    v = 0.8 * v + x;
    x -= 0.1 * v;
  }
  EXPECT_NEAR(w.data()[0], x, 1e-15);
  EXPECT_LT(std::abs(x), 0.05);
}

TEST(Sgd, MissingGradientIsUsageError) {
  Tensor p(Shape{1, 1, 1, 1});
  OptState<float> st(0.1f, 0.5f);
  EXPECT_THROW(sgd_momentum_step(p, st), UsageError);
}

TEST(Sgd, InvalidHyperparameters) {
  EXPECT_THROW(OptState<float>(0.0f, 0.5f), ValidationError);
  EXPECT_THROW(OptState<float>(0.1f, 1.0f), ValidationError);
}

// Tensor invariants

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(Tensor(Shape{1, 2, 3, 4}, std::vector<float>(23)), ShapeError);
  EXPECT_EQ(Tensor(Shape{1, 2, 3, 4}).size(), 24u);
}

TEST(Tensor, GradientMatchesShape) {
  Tensor t(Shape{2, 3, 4, 5});
  EXPECT_FALSE(t.has_grad());
  EXPECT_EQ(t.ensure_grad().size(), t.size());
}

// Kernels against the serial reference.

TEST(Kernels, AgreeWithSerialReference) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> ext(1, 24), ch(1, 19);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s{2, ch(rng), 2 * ext(rng), 2 * ext(rng)};
    const std::int64_t cout = ch(rng);
    const auto x = random_tensor(s, rng);
    const auto w3 = random_tensor(Shape{cout, s.c, 3, 3}, rng);
    const auto b = random_tensor(Shape{cout, 1, 1, 1}, rng);
    const Shape os{s.n, cout, s.h, s.w};
    const auto g = random_tensor(os, rng);

    std::vector<double> k(os.numel()), r(os.numel());
    kernels::conv3x3<double>(x.data(), s, w3.data(), b.data(), cout, k);
    reference::conv3x3<double>(x.data(), s, w3.data(), b.data(), cout, r);
    EXPECT_LT(max_rel_diff(k, r), 1e-12);

    std::vector<double> ki(s.numel()), ri(s.numel());
    kernels::conv3x3_backward_input<double>(g.data(), os, w3.data(), s.c, ki);
    reference::conv3x3_backward_input<double>(g.data(), os, w3.data(), s.c, ri);
    EXPECT_LT(max_rel_diff(ki, ri), 1e-12);

    std::vector<double> kw(w3.size()), rw(w3.size()), kb(cout), rb(cout);
    kernels::conv3x3_backward_weight<double>(x.data(), s, g.data(), cout, kw, kb);
    reference::conv3x3_backward_weight<double>(x.data(), s, g.data(), cout, rw, rb);
    EXPECT_LT(max_rel_diff(kw, rw), 1e-12);
    EXPECT_LT(max_rel_diff(kb, rb), 1e-12);

    const auto wt = random_tensor(Shape{s.c, cout, 2, 2}, rng);
    const Shape us{s.n, cout, 2 * s.h, 2 * s.w};
    std::vector<double> ku(us.numel()), ru(us.numel());
    kernels::transpose_conv2<double>(x.data(), s, wt.data(), b.data(), cout, ku);
    reference::transpose_conv2<double>(x.data(), s, wt.data(), b.data(), cout, ru);
    EXPECT_LT(max_rel_diff(ku, ru), 1e-12);

    const auto gu = random_tensor(us, rng);
    std::vector<double> kti(s.numel()), rti(s.numel());
    kernels::transpose_conv2_backward_input<double>(gu.data(), us, wt.data(), s.c, kti);
    reference::transpose_conv2_backward_input<double>(gu.data(), us, wt.data(), s.c, rti);
    EXPECT_LT(max_rel_diff(kti, rti), 1e-12);

    std::vector<double> ktw(wt.size()), rtw(wt.size()), ktb(cout), rtb(cout);
    kernels::transpose_conv2_backward_weight<double>(x.data(), s, gu.data(), cout, ktw, ktb);
    reference::transpose_conv2_backward_weight<double>(x.data(), s, gu.data(), cout, rtw, rtb);
    EXPECT_LT(max_rel_diff(ktw, rtw), 1e-12);
    EXPECT_LT(max_rel_diff(ktb, rtb), 1e-12);

    const Shape ps{s.n, s.c, s.h / 2, s.w / 2};
    std::vector<double> kp(ps.numel()), rp(ps.numel());
    std::vector<std::uint8_t> ka(ps.numel()), ra(ps.numel());
    kernels::maxpool2<double>(x.data(), s, kp, ka);
    reference::maxpool2<double>(x.data(), s, rp, ra);
    EXPECT_EQ(kp, rp);
    EXPECT_EQ(ka, ra);
  }
}

// Determinism

TEST(Determinism, ForwardIsBitIdenticalAcrossRepeatsAndThreads) {
  std::mt19937_64 rng(5);
  const auto x = random_tensor<float>(Shape{2, 16, 40, 36}, rng);
  const auto w = random_tensor<float>(Shape{24, 16, 3, 3}, rng);
  const auto b = random_tensor<float>(Shape{24, 1, 1, 1}, rng);
  const auto g = random_tensor<float>(Shape{2, 24, 40, 36}, rng);
  const int saved = omp_get_max_threads();
  std::vector<Tensor> outs;
  std::vector<std::vector<float>> wgrads;
  for (int threads : {1, 1, 3, 4}) {
    omp_set_num_threads(threads);
    outs.push_back(ops::conv2d(x, w, b));
    std::vector<float> gw(w.size()), gb(24);
    kernels::conv3x3_backward_weight<float>(x.data(), x.shape(), g.data(), 24, gw, gb);
    wgrads.push_back(gw);
  }
  omp_set_num_threads(saved);
  for (std::size_t i = 1; i < outs.size(); ++i) {
    EXPECT_EQ(outs[i], outs[0]);
    EXPECT_EQ(wgrads[i], wgrads[0]);
  }
}

// Gradient checks

GradCheckOptions check_opts(std::uint64_t seed) {
  GradCheckOptions o;
  o.seed = seed;
  o.max_coords = 40;
  return o;
}

TEST(GradCheck, Conv2dSpecExample) {
  std::mt19937_64 rng(1);
  std::vector<TensorD> in{random_tensor(Shape{1, 2, 5, 5}, rng),
                          random_tensor(Shape{3, 2, 3, 3}, rng),
                          random_tensor(Shape{3, 1, 1, 1}, rng)};
  const auto r = random_tensor(Shape{1, 3, 5, 5}, rng);
  const auto rep = grad_check(
      [&](Tape<double>& t, std::span<const Var> v) {
        return t.project(t.conv3x3(v[0], v[1], v[2]), r);
      },
      in, check_opts(1));
  EXPECT_LT(rep.max_rel_error, 1e-4) << rep.worst;
  EXPECT_GT(rep.checked, 0u);
}

class PrimitiveGradCheck : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGradCheck, MatchesFiniteDifferences) {
  const int seed = GetParam();
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  std::uniform_int_distribution<int> ext(1, 4), ch(1, 4);
  const std::int64_t n = 1 + seed % 2;
  const std::int64_t c = ch(rng), co = ch(rng);
  const std::int64_t h = 2 * ext(rng), w = 2 * ext(rng);
  const Shape s{n, c, h, w};

  auto run = [&](const char* what, std::vector<TensorD> in, const GradCheckFn& fn, double tol) {
    const auto rep = grad_check(fn, in, check_opts(static_cast<std::uint64_t>(seed)));
    EXPECT_LT(rep.max_rel_error, tol) << what << " " << to_string(s) << " " << rep.worst;
    EXPECT_GT(rep.checked, 0u) << what;
  };

  {
    const auto r = random_tensor(Shape{n, co, h, w}, rng);
    run("conv3x3",
        {random_tensor(s, rng), random_tensor(Shape{co, c, 3, 3}, rng),
         random_tensor(Shape{co, 1, 1, 1}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) {
          return t.project(t.conv3x3(v[0], v[1], v[2]), r);
        },
        1e-4);
  }
  {
    const auto r = random_tensor(Shape{n, co, h, w}, rng);
    run("conv1x1",
        {random_tensor(s, rng), random_tensor(Shape{co, c, 1, 1}, rng),
         random_tensor(Shape{co, 1, 1, 1}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) {
          return t.project(t.conv1x1(v[0], v[1], v[2]), r);
        },
        1e-4);
  }
  {
    const auto r = random_tensor(s, rng);
    run("relu", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.relu(v[0]), r); }, 1e-4);
  }
  {
    const auto r = random_tensor(Shape{n, c, h / 2, w / 2}, rng);
    run("maxpool2", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.maxpool2(v[0]), r); },
        1e-4);
  }
  {
    const auto r = random_tensor(Shape{n, co, 2 * h, 2 * w}, rng);
    run("transpose_conv2",
        {random_tensor(s, rng), random_tensor(Shape{c, co, 2, 2}, rng),
         random_tensor(Shape{co, 1, 1, 1}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) {
          return t.project(t.transpose_conv2(v[0], v[1], v[2]), r);
        },
        1e-4);
  }
  {
    const auto r = random_tensor(Shape{n, c + co, h, w}, rng);
    run("concat", {random_tensor(s, rng), random_tensor(Shape{n, co, h, w}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.concat(v[0], v[1]), r); },
        1e-4);
  }
  {
    const auto r = random_tensor(s, rng);
    run("sigmoid", {random_tensor(s, rng, -6.0, 6.0)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.sigmoid(v[0]), r); },
        1e-6);
  }
  {
    const auto r = random_tensor(Shape{n, c, h + 3, w + 1}, rng);
    run("pad_crop", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) {
          const Var p = t.pad_bottom_right(v[0], h + 5, w + 2);
          return t.project(t.crop_top_left(p, h + 3, w + 1), r);
        },
        1e-4);
  }
  {
    const auto r = random_tensor(Shape{n, c, 1, 1}, rng);
    run("global_avg_pool", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) {
          return t.project(t.global_avg_pool(v[0]), r);
        },
        1e-4);
  }
  {
    TensorD target(Shape{n, 1, h, w});
    std::bernoulli_distribution coin(0.3);
    for (double& v : target.data()) v = coin(rng) ? 1.0 : 0.0;
    const double pw = 1.0 + seed % 20;
    run("weighted_bce", {random_tensor(Shape{n, 1, h, w}, rng, -5.0, 5.0)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.weighted_bce(v[0], target, pw); },
        1e-5);
  }
  {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(rng() % static_cast<std::uint64_t>(c + 1));
    run("softmax_cross_entropy", {random_tensor(Shape{n, c + 1, 1, 1}, rng, -3.0, 3.0)},
        [&](Tape<double>& t, std::span<const Var> v) {
          return t.softmax_cross_entropy(v[0], labels);
        },
        1e-5);
  }
}

INSTANTIATE_TEST_SUITE_P(TwentyConfigs, PrimitiveGradCheck, ::testing::Range(1, 21));

TEST(Tape, BackwardRequiresScalarRoot) {
  TensorD x(Shape{1, 1, 2, 2}, 1.0);
  Tape<double> tape;
  const Var y = tape.relu(tape.param(x));
  EXPECT_THROW(tape.backward(y), UsageError);
}

TEST(Tape, ConstantsReceiveNoGradient) {
  std::mt19937_64 rng(4);
  TensorD w = random_tensor(Shape{2, 1, 3, 3}, rng);
  TensorD b(Shape{2, 1, 1, 1});
  Tape<double> tape;
  const Var x = tape.constant(random_tensor(Shape{1, 1, 4, 4}, rng));
  const Var y = tape.conv3x3(x, tape.param(w), tape.param(b));
  tape.backward(tape.project(y, random_tensor(Shape{1, 2, 4, 4}, rng)));
  EXPECT_TRUE(w.has_grad());
  EXPECT_TRUE(b.has_grad());
  EXPECT_TRUE(all_finite<double>(w.grad()));
}

}  // namespace
}  // namespace rootnet
