// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "rootnet/transfer.hpp"

namespace rootnet {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rootnet_transfer_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ArchSpec small_generic() {
  ArchSpec s;
  s.depth = 3;
  s.base_width = 4;
  return s;
}

bool bit_equal(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].tensor.shape() != b[i].tensor.shape()) return false;
    const auto x = a[i].tensor.data(), y = b[i].tensor.data();
    if (std::memcmp(x.data(), y.data(), x.size_bytes()) != 0) return false;
  }
  return true;
}

TEST(Checkpoint, RoundTripBitExact) {
  const fs::path dir = scratch("rt");
  const ArchSpec s = small_generic();
  ParamSet p = build(s, 3);
  // Values whose bit patterns must survive: negative zero, denormal, NaN payload.
  p[0].tensor.data()[0] = -0.0f;
  p[0].tensor.data()[1] = 1e-40f;
  p[0].tensor.data()[2] = std::bit_cast<float>(0x7fc01234u);
  save(p, s, dir / "m.ckpt");
  auto [spec, back] = load(dir / "m.ckpt");
  EXPECT_EQ(spec.depth, 3);
  EXPECT_EQ(spec.base_width, 4);
  EXPECT_TRUE(bit_equal(p, back));
  // Re-saving yields identical bytes.
  save(back, spec, dir / "m2.ckpt");
  std::ifstream a(dir / "m.ckpt", std::ios::binary), b(dir / "m2.ckpt", std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST(Checkpoint, LayoutStartsWithMagicAndEndsWithChecksum) {
  Checkpoint c;
  c.spec = small_generic();
  c.params = build(c.spec, 1);
  const auto bytes = serialize_checkpoint(c);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "RNFCKPT1");
  std::uint64_t hlen = 0;
  for (int i = 0; i < 8; ++i) hlen |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  const std::string header(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
  EXPECT_NE(header.find("\"version\":1"), std::string::npos);
  EXPECT_NE(header.find("enc0.conv0.weight"), std::string::npos);
  std::size_t floats = 0;
  for (const auto& p : c.params) floats += p.tensor.size();
  EXPECT_EQ(bytes.size(), 16 + hlen + 4 * floats + 8);
  // First payload float, little-endian.
  const float first = c.params[0].tensor.data()[0];
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i)
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[16 + hlen + static_cast<std::size_t>(i)])) << (8 * i);
  EXPECT_EQ(std::bit_cast<float>(bits), first);
}

TEST(Checkpoint, DistinctErrors) {
  Checkpoint c;
  c.spec = small_generic();
  c.params = build(c.spec, 1);
  const auto good = serialize_checkpoint(c);

  auto corrupt = good;
  corrupt[good.size() - 20] ^= 0x01;
  EXPECT_THROW(parse_checkpoint(corrupt), ChecksumError);

  auto truncated = good;
  truncated.resize(good.size() - 5);
  EXPECT_THROW(parse_checkpoint(truncated), TruncatedError);
  truncated.resize(12);
  EXPECT_THROW(parse_checkpoint(truncated), TruncatedError);

  auto version = good;
  version[7] = '2';
  EXPECT_THROW(parse_checkpoint(version), VersionError);

  std::vector<char> junk{'h', 'e', 'l', 'l', 'o', '!', '!', '!', 0, 0, 0, 0, 0, 0, 0, 0};
  try {
    parse_checkpoint(junk);
    FAIL();
  } catch (const VersionError&) {
    FAIL() << "junk is not a version error";
  } catch (const TruncatedError&) {
    FAIL() << "junk is not truncated";
  } catch (const ChecksumError&) {
    FAIL() << "junk is not a checksum error";
  } catch (const FormatError&) {
  }
}

TEST(Checkpoint, WrongBaseWidthNamesParameter) {
  const fs::path dir = scratch("bw");
  const ArchSpec s = small_generic();
  save(build(s, 1), s, dir / "m.ckpt");
  ArchSpec other = s;
  other.base_width = 8;
  try {
    load_into(dir / "m.ckpt", other);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("enc0.conv0.weight"), std::string::npos) << e.what();
  }
}

Checkpoint unet_source(const ArchSpec& s, std::uint64_t seed) {
  Checkpoint c;
  c.spec = s;
  c.params = build(s, seed);
  return c;
}

TEST(InitModel, ScratchEqualsBuild) {
  const ArchSpec s = small_generic();
  const InitResult r = init_model(s, InitKind::scratch, nullptr, 7);
  EXPECT_TRUE(bit_equal(r.params, build(s, 7)));
  for (const auto& [name, prov] : r.provenance) EXPECT_EQ(prov, Provenance::random) << name;
}

TEST(InitModel, EncoderFromCheckpointProvenance) {
  const ArchSpec s = small_generic();
  const Checkpoint src = unet_source(s, 100);
  const InitResult r = init_model(s, InitKind::encoder_from_checkpoint, &src, 7);
  const ParamSet scratch = build(s, 7);
  ASSERT_EQ(r.provenance.size(), r.params.size());
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    const auto& name = r.params[i].name;
    const bool enc = name.starts_with("enc") || name.starts_with("bottleneck");
    EXPECT_EQ(r.provenance.at(name), enc ? Provenance::copied : Provenance::random) << name;
    // Copied values come from the source; random ones match scratch with the same seed.
    const ParamSet& ref = enc ? src.params : scratch;
    EXPECT_TRUE(r.params[i].tensor == ref[i].tensor) << name;
  }
}

TEST(InitModel, EncoderDecoderLeavesOnlyHeadRandom) {
  const ArchSpec s = small_generic();
  const Checkpoint src = unet_source(s, 100);
  const InitResult r = init_model(s, InitKind::encoder_decoder_from_checkpoint, &src, 7);
  for (const auto& [name, prov] : r.provenance)
    EXPECT_EQ(prov, name.starts_with("head.") ? Provenance::random : Provenance::copied) << name;
}

TEST(InitModel, MissingSourceAndMismatch) {
  const ArchSpec s = small_generic();
  EXPECT_THROW(init_model(s, InitKind::encoder_from_checkpoint, nullptr, 1), ConfigError);
  InitMode m;
  m.kind = InitKind::encoder_decoder_from_checkpoint;
  EXPECT_THROW(init_model(s, m, 1), ConfigError);
  ArchSpec wide = s;
  wide.base_width = 6;
  const Checkpoint src = unet_source(wide, 1);
  EXPECT_THROW(init_model(s, InitKind::encoder_from_checkpoint, &src, 1), ShapeError);
  EXPECT_EQ(parse_init_kind("encoder_from_classifier"), InitKind::encoder_from_classifier);
  EXPECT_THROW(parse_init_kind("imagenet"), ConfigError);
  EXPECT_EQ(regime_label(InitKind::encoder_decoder_from_checkpoint), "P-EnDe");
}

TEST(ClassifierMapping, CopiesTwentyTensorsInOrder) {
  ClassifierSpec cs;
  cs.base_width = 8;
  Checkpoint cls;
  cls.kind = ModelKind::classifier;
  cls.classifier = cs;
  cls.params = build_classifier(cs, 5);
  const ArchSpec target = vgg13_spec(8);
  const auto mapped = map_classifier_weights(cls, target);
  ASSERT_EQ(mapped.size(), 20u);
  for (std::size_t k = 0; k < 10; ++k) {
    const std::string enc = "enc" + std::to_string(k / 2) + ".conv" + std::to_string(k % 2);
    EXPECT_EQ(mapped[2 * k].name, enc + ".weight");
    EXPECT_EQ(mapped[2 * k + 1].name, enc + ".bias");
    EXPECT_TRUE(mapped[2 * k].tensor == cls.params[2 * k].tensor);
  }
  const InitResult r = init_model(target, InitKind::encoder_from_classifier, &cls, 3);
  int copied = 0;
  for (const auto& [name, prov] : r.provenance) {
    if (prov == Provenance::copied) {
      ++copied;
      EXPECT_TRUE(name.starts_with("enc")) << name;
    }
  }
  EXPECT_EQ(copied, 20);
  // Read back: the encoder holds the classifier's values bit for bit.
  EXPECT_TRUE(bit_equal(ParamSet({{"a", r.params.find("enc4.conv1.weight")->tensor}}),
                        ParamSet({{"a", cls.params.find("features.9.weight")->tensor}})));
  EXPECT_EQ(r.provenance.at("bottleneck.conv0.weight"), Provenance::random);
}

TEST(ClassifierMapping, WideClassifierOntoNarrowGenericFails) {
  ClassifierSpec cs;
  cs.base_width = 64;
  Checkpoint cls;
  cls.kind = ModelKind::classifier;
  cls.classifier = cs;
  cls.params = build_classifier(cs, 5);
  ArchSpec target;
  target.depth = 4;
  target.base_width = 8;
  try {
    map_classifier_weights(cls, target);
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("enc0.conv0.weight [8x3x3x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("features.0.weight [64x3x3x3]"), std::string::npos) << msg;
  }
}

TEST(Surrogate, DarkVersusBrightLearnsQuickly) {
  ClassParams p;
  p.classes = 2;
  p.per_class = 32;
  const auto patches = gen_classification_set(p);
  ClassifierTrainConfig c;
  c.spec.base_width = 4;
  c.spec.classes = 2;
  c.epochs = 20;
  const ClassifierReport r = train_surrogate_classifier(patches, c);
  EXPECT_GT(r.accuracy, 0.95);
  ASSERT_EQ(r.epoch_loss.size(), 20u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Surrogate, FourTexturesBeatChance) {
  ClassParams p;
  p.per_class = 24;
  const auto patches = gen_classification_set(p);
  ClassifierTrainConfig c;
  c.spec.base_width = 4;
  c.epochs = 15;
  const ClassifierReport r = train_surrogate_classifier(patches, c);
  EXPECT_GT(r.accuracy, 0.25);
}

TEST(Surrogate, ZeroEpochsStillMappable) {
  ClassParams p;
  p.per_class = 2;
  ClassifierTrainConfig c;
  c.spec.base_width = 4;
  c.epochs = 0;
  const ClassifierReport r = train_surrogate_classifier(gen_classification_set(p), c);
  EXPECT_TRUE(r.checkpoint.params == build_classifier(c.spec, c.seed));
  EXPECT_EQ(map_classifier_weights(r.checkpoint, vgg13_spec(4)).size(), 20u);
  const fs::path dir = scratch("cls");
  save_checkpoint(dir / "c.ckpt", r.checkpoint);
  const Checkpoint back = load_checkpoint(dir / "c.ckpt");
  EXPECT_EQ(back.kind, ModelKind::classifier);
  EXPECT_EQ(back.classifier, c.spec);
  EXPECT_TRUE(bit_equal(back.params, r.checkpoint.params));
  EXPECT_THROW(load(dir / "c.ckpt"), FormatError);
}

}  // namespace
}  // namespace rootnet
