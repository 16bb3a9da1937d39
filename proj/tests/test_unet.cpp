// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "rootnet/gradcheck.hpp"
#include "rootnet/unet.hpp"
#include "test_util.hpp"

namespace rootnet {
namespace {

ArchSpec generic(int depth, int base, int in = 3) {
  ArchSpec s;
  s.depth = depth;
  s.base_width = base;
  s.in_channels = in;
  return s;
}

TEST(Build, FirstConvShape) {
  const ParamSet p = build(generic(4, 8), 1);
  ASSERT_NE(p.find("enc0.conv0.weight"), nullptr);
  EXPECT_EQ(p.find("enc0.conv0.weight")->tensor.shape(), (Shape{8, 3, 3, 3}));
  EXPECT_EQ(p.find("enc0.conv0.bias")->tensor.shape(), (Shape{8, 1, 1, 1}));
}

TEST(Build, Vgg13EncoderSchedule) {
  const ArchSpec s = vgg13_spec(64);
  const auto layout = param_layout(s);
  std::vector<std::int64_t> outs;
  for (const auto& [name, shape] : layout)
    if (name.starts_with("enc") && name.ends_with(".weight")) outs.push_back(shape.n);
  EXPECT_EQ(outs, (std::vector<std::int64_t>{64, 64, 128, 128, 256, 256, 512, 512, 512, 512}));
}

TEST(Build, GenericSchedule) {
  const auto layout = param_layout(generic(3, 4));
  std::map<std::string, Shape> m(layout.begin(), layout.end());
  EXPECT_EQ(m.at("enc2.conv1.weight"), (Shape{16, 16, 3, 3}));
  EXPECT_EQ(m.at("bottleneck.conv0.weight"), (Shape{32, 16, 3, 3}));
  EXPECT_EQ(m.at("dec2.up.weight"), (Shape{32, 16, 2, 2}));
  EXPECT_EQ(m.at("dec2.conv0.weight"), (Shape{16, 32, 3, 3}));
  EXPECT_EQ(m.at("dec0.conv1.weight"), (Shape{4, 4, 3, 3}));
  EXPECT_EQ(m.at("head.weight"), (Shape{1, 4, 1, 1}));
}

TEST(Build, DeterministicPerSeed) {
  const ArchSpec s = generic(3, 4);
  const ParamSet a = build(s, 7);
  const ParamSet b = build(s, 7);
  const ParamSet c = build(s, 8);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  for (const auto& p : a) {
    if (!p.name.ends_with(".bias")) continue;
    for (float v : p.tensor.data()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Build, HeScale) {
  const ParamSet p = build(vgg13_spec(16), 3);
  const Tensor& w = p.find("enc3.conv1.weight")->tensor;  // 128x128x3x3
  double ss = 0.0;
  for (float v : w.data()) ss += static_cast<double>(v) * v;
  const double var = ss / static_cast<double>(w.size());
  EXPECT_NEAR(var, 2.0 / (128.0 * 9.0), 0.1 * 2.0 / (128.0 * 9.0));
}

TEST(Build, RejectsShallowDepth) {
  EXPECT_THROW(build(generic(1, 4), 1), ConfigError);
  ArchSpec v = vgg13_spec(8);
  v.depth = 4;
  EXPECT_THROW(build(v, 1), ConfigError);
  EXPECT_THROW(parse_variant("resnet"), ConfigError);
}

TEST(CountParams, SingleConvLayer) {
  // A layer 8x3x3x3 with bias.
  EXPECT_EQ(8 * 3 * 3 * 3 + 8, 224);
  const auto layout = param_layout(generic(4, 8));
  EXPECT_EQ(layout[0].second.numel() + layout[1].second.numel(), 224u);
}

TEST(CountParams, HandCountedDepthTwoBaseOne) {
  // enc0: 1->1, 1->1        10 + 10
  // enc1: 1->2, 2->2        20 + 38
  // bottleneck: 2->4, 4->4  76 + 148
  // dec1: up 4->2 (32 + 2), 4->2 (74), 2->2 (38)
  // dec0: up 2->1 (8 + 1), 2->1 (19), 1->1 (10)
  // head: 1 + 1
  const std::int64_t hand = 20 + 58 + 224 + (34 + 74 + 38) + (9 + 19 + 10) + 2;
  EXPECT_EQ(count_params(generic(2, 1, 1)), hand);
  EXPECT_EQ(hand, 488);
}

TEST(CountParams, QuadraticInWidth) {
  auto conv_weights = [](const ArchSpec& s) {
    std::int64_t n = 0;
    for (const auto& [name, shape] : param_layout(s))
      if (name.ends_with(".weight") && name != "enc0.conv0.weight" && name != "head.weight")
        n += static_cast<std::int64_t>(shape.numel());
    return n;
  };
  const double ratio = static_cast<double>(conv_weights(generic(4, 16))) /
                       static_cast<double>(conv_weights(generic(4, 8)));
  EXPECT_DOUBLE_EQ(ratio, 4.0);
  const double total = static_cast<double>(count_params(generic(4, 16))) /
                       static_cast<double>(count_params(generic(4, 8)));
  EXPECT_GT(total, 3.9);
  EXPECT_LT(total, 4.0);
}

TEST(Partition, Examples) {
  EXPECT_EQ(partition("enc0.conv1.weight"), Partition::encoder);
  EXPECT_EQ(partition("bottleneck.conv0.bias"), Partition::encoder);
  EXPECT_EQ(partition("dec2.up.bias"), Partition::decoder);
  EXPECT_EQ(partition("dec0.conv1.weight"), Partition::decoder);
  EXPECT_EQ(partition("head.weight"), Partition::head);
  EXPECT_THROW(partition("enc0.up.weight"), FormatError);
  EXPECT_THROW(partition("head"), FormatError);
  EXPECT_THROW(partition("classifier.weight"), FormatError);
  EXPECT_THROW(partition("enc.conv0.weight"), FormatError);
}

TEST(Partition, TotalOverGeneratedNames) {
  for (const ArchSpec& s : {generic(2, 2), generic(4, 8), generic(6, 1), vgg13_spec(64)}) {
    std::set<std::string> names;
    std::size_t enc = 0, dec = 0, head = 0;
    for (const auto& [name, shape] : param_layout(s)) {
      EXPECT_TRUE(names.insert(name).second) << name;
      switch (partition(name)) {
        case Partition::encoder: ++enc; break;
        case Partition::decoder: ++dec; break;
        case Partition::head: ++head; break;
      }
    }
    EXPECT_EQ(enc + dec + head, names.size());
    EXPECT_EQ(enc, static_cast<std::size_t>(4 * s.depth + 4));
    EXPECT_EQ(dec, static_cast<std::size_t>(6 * s.depth));
    EXPECT_EQ(head, 2u);
  }
}

TEST(ParamSetTest, RejectsDuplicates) {
  std::vector<NamedParam> v{{"head.weight", Tensor(Shape{1, 1, 1, 1})},
                            {"head.weight", Tensor(Shape{1, 1, 1, 1})}};
  EXPECT_THROW(ParamSet{std::move(v)}, FormatError);
}

TEST(ParamSetTest, CheckParamsNamesMismatch) {
  const ArchSpec s = generic(2, 2);
  ParamSet p = build(s, 1);
  EXPECT_NO_THROW(check_params(s, p));
  p.find("dec1.conv0.weight")->tensor = Tensor(Shape{2, 2, 3, 3});
  try {
    check_params(s, p);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("dec1.conv0.weight"), std::string::npos);
  }
}

TEST(Pad, Record) {
  const PadRecord r = pad_record(720, 312, 5);
  EXPECT_EQ(r.padded_height, 736);
  EXPECT_EQ(r.padded_width, 320);
  EXPECT_EQ(r.bottom, 16);
  EXPECT_EQ(r.right, 8);
  EXPECT_EQ(r.top, 0);
  EXPECT_EQ(r.left, 0);
  EXPECT_TRUE(pad_record(64, 64, 6).identity());
  const PadRecord p = pad_record(760, 580, 6);
  EXPECT_EQ(p.padded_height, 768);
  EXPECT_EQ(p.padded_width, 640);
}

TEST(Pad, SmallestMultiple) {
  for (int depth = 2; depth <= 6; ++depth)
    for (std::int64_t h = 1; h <= 200; h += 7) {
      const PadRecord r = pad_record(h, h + 3, depth);
      const std::int64_t m = std::int64_t{1} << depth;
      EXPECT_EQ(r.padded_height % m, 0);
      EXPECT_GE(r.padded_height, h);
      EXPECT_LT(r.padded_height - h, m);
      EXPECT_LT(r.padded_width - (h + 3), m);
    }
}

Tensor random_batch(std::int64_t n, std::int64_t h, std::int64_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  std::vector<float> v(static_cast<std::size_t>(n * 3 * h * w));
  for (auto& x : v) x = u(rng);
  return Tensor(Shape{n, 3, h, w}, std::move(v));
}

void expect_open_unit(const Tensor& t) {
  for (float v : t.data()) {
    ASSERT_GT(v, 0.0f);
    ASSERT_LT(v, 1.0f);
  }
}

TEST(Forward, FullTubeImageSize) {
  const ArchSpec s = generic(6, 1);
  const Tensor out = forward(s, build(s, 2), random_batch(1, 760, 580, 1));
  EXPECT_EQ(out.shape(), (Shape{1, 1, 760, 580}));
  expect_open_unit(out);
}

TEST(Forward, TileSize) {
  const ArchSpec s = generic(5, 1);
  const Tensor out = forward(s, build(s, 2), random_batch(1, 720, 312, 1));
  EXPECT_EQ(out.shape(), (Shape{1, 1, 720, 312}));
}

TEST(Forward, AlreadyMultiple) {
  for (int depth = 2; depth <= 6; ++depth) {
    const ArchSpec s = generic(depth, 2);
    const Tensor out = forward(s, build(s, 2), random_batch(2, 64, 64, 3));
    EXPECT_EQ(out.shape(), (Shape{2, 1, 64, 64}));
    expect_open_unit(out);
  }
}

TEST(Forward, SameSizeProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> extent(16, 800);
  for (int trial = 0; trial < 9; ++trial) {
    const int depth = 4 + trial % 3;
    const ArchSpec s = generic(depth, 1);
    const std::int64_t h = extent(rng), w = extent(rng);
    const Tensor out = forward(s, build(s, trial), random_batch(1, h, w, trial));
    EXPECT_EQ(out.shape(), (Shape{1, 1, h, w})) << "depth " << depth;
    expect_open_unit(out);
  }
}

TEST(Forward, Vgg13SmallInput) {
  const ArchSpec s = vgg13_spec(2);
  const Tensor out = forward(s, build(s, 5), random_batch(1, 37, 50, 5));
  EXPECT_EQ(out.shape(), (Shape{1, 1, 37, 50}));
}

TEST(Forward, RejectsWrongChannels) {
  const ArchSpec s = generic(2, 2);
  EXPECT_THROW(forward(s, build(s, 1), Tensor(Shape{1, 1, 8, 8})), ShapeError);
}

TEST(Forward, TapeMatchesEager) {
  const ArchSpec s = generic(3, 2);
  ParamSet p = build(s, 4);
  const Tensor x = random_batch(2, 20, 27, 4);
  const Tensor probs = forward(s, p, x);
  Tape<float> tape;
  const Var logits = forward_logits(tape, s, p, tape.constant(x));
  const Tensor& z = tape.value(logits);
  ASSERT_EQ(z.shape(), probs.shape());
  for (std::size_t i = 0; i < z.size(); ++i)
    EXPECT_NEAR(1.0 / (1.0 + std::exp(-static_cast<double>(z.data()[i]))), probs.data()[i], 1e-6);
}

TEST(EndToEnd, DepthTwoGradCheck) {
  const ArchSpec s = generic(2, 2);
  const ParamSet p = build(s, 9);
  std::vector<TensorD> inputs;
  for (const auto& np : p) {
    TensorD t = tensor_cast<double>(np.tensor);
    // Small nonzero biases keep every bias gradient path exercised.
    if (np.name.ends_with(".bias"))
      for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = 0.01 * static_cast<double>(i + 1);
    inputs.push_back(std::move(t));
  }
  std::mt19937_64 rng(21);
  const TensorD x = testing::random_tensor<double>(Shape{1, 3, 8, 8}, rng, -0.5, 0.5);
  const TensorD r = testing::random_tensor<double>(Shape{1, 1, 8, 8}, rng, -1.0, 1.0);
  GradCheckFn fn = [&](Tape<double>& tape, std::span<const Var> vars) {
    auto param = [&](std::size_t k) { return vars[k]; };
    const Var z = unet_logits(tape, s, param, tape.constant(x));
    return tape.project(z, r);
  };
  GradCheckOptions opts;
  opts.max_coords = 12;
  opts.seed = 3;
  const GradCheckReport rep = grad_check(fn, inputs, opts);
  EXPECT_GE(rep.checked, 100u);
  EXPECT_LT(rep.max_rel_error, 1e-3) << rep.worst;
}

}  // namespace
}  // namespace rootnet
