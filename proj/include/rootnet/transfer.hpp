// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoints, weight initialization regimes and classifier weight mapping.
//
// Checkpoint layout (all integers little-endian):
//   "RNFCKPT1"                      8 bytes
//   header length                   u64
//   header                          UTF-8 JSON: version, kind, spec, params
//   payloads                        f32 per element, in header order
//   checksum                        u64 FNV-1a of every preceding byte

#ifndef ROOTNET_TRANSFER_HPP_
#define ROOTNET_TRANSFER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rootnet/synthgen.hpp"
#include "rootnet/tape.hpp"
#include "rootnet/unet.hpp"

namespace rootnet {

inline constexpr int kCheckpointVersion = 1;

/// VGG13 convolution stack, global average pool and a linear layer.
struct ClassifierSpec {
  int base_width = 64;
  int in_channels = 3;
  int classes = 4;

  void validate() const;
  friend bool operator==(const ClassifierSpec&, const ClassifierSpec&) = default;
};

enum class ModelKind { unet, classifier };

struct Checkpoint {
  ModelKind kind = ModelKind::unet;
  ArchSpec spec;               // when kind == unet
  ClassifierSpec classifier;   // when kind == classifier
  ParamSet params;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws VersionError, ChecksumError or TruncatedError (all FormatErrors).
Checkpoint load_checkpoint(const std::filesystem::path& path);

void save(const ParamSet& params, const ArchSpec& spec, const std::filesystem::path& path);
/// Loads a segmentation checkpoint.
std::pair<ArchSpec, ParamSet> load(const std::filesystem::path& path);
/// Loads and checks against `expected`; ShapeError names the first mismatch.
ParamSet load_into(const std::filesystem::path& path, const ArchSpec& expected);

std::vector<char> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::vector<char>& bytes, const std::string& origin = "checkpoint");

enum class InitKind {
  scratch,                          // S
  encoder_from_classifier,          // I
  encoder_from_checkpoint,          // P-En
  encoder_decoder_from_checkpoint,  // P-EnDe
};

std::string to_string(InitKind kind);
/// Short regime label: S, I, P-En, P-EnDe.
std::string regime_label(InitKind kind);
InitKind parse_init_kind(std::string_view text);

struct InitMode {
  InitKind kind = InitKind::scratch;
  std::filesystem::path source;
};

enum class Provenance { copied, random };

struct InitResult {
  ParamSet params;
  std::map<std::string, Provenance> provenance;
};

/// Every parameter starts from build(spec, seed); the mode then overwrites the
/// partitions it transfers, so untouched partitions match scratch exactly.
InitResult init_model(const ArchSpec& spec, InitKind kind, const Checkpoint* source,
                      std::uint64_t seed);
InitResult init_model(const ArchSpec& spec, const InitMode& mode, std::uint64_t seed);

/// Classifier conv layer i onto encoder conv layer i, weights and biases.
/// Throws ShapeError listing expected and found shapes on a schedule mismatch.
std::vector<NamedParam> map_classifier_weights(const Checkpoint& classifier, const ArchSpec& target);

std::vector<std::pair<std::string, Shape>> classifier_layout(const ClassifierSpec& spec);
ParamSet build_classifier(const ClassifierSpec& spec, std::uint64_t seed);

/// Logits [N, classes, 1, 1].
template <class Ops, class ParamFn>
typename Ops::Value classifier_logits(Ops& ops, ParamFn&& param, typename Ops::Value x) {
  std::size_t k = 0;
  for (int block = 0; block < 5; ++block) {
    for (int j = 0; j < 2; ++j) {
      auto w = param(k++);
      auto b = param(k++);
      x = ops.relu(ops.conv3x3(x, w, b));
    }
    x = ops.maxpool2(x);
  }
  x = ops.global_avg_pool(x);
  auto w = param(k++);
  auto b = param(k++);
  return ops.conv1x1(x, w, b);
}

struct ClassifierTrainConfig {
  ClassifierSpec spec;
  double lr = 0.005;
  double momentum = 0.9;
  int batch_size = 8;
  int epochs = 10;
  std::uint64_t seed = 1;
};

struct ClassifierReport {
  Checkpoint checkpoint;
  std::vector<double> epoch_loss;
  double accuracy = 0.0;
};

/// Predicted class per patch.
std::vector<int> classify(const ClassifierSpec& spec, const ParamSet& params,
                          const std::vector<LabeledPatch>& patches);
double classifier_accuracy(const ClassifierSpec& spec, const ParamSet& params,
                           const std::vector<LabeledPatch>& patches);

/// Softmax cross-entropy training; accuracy is measured on `patches`.
ClassifierReport train_surrogate_classifier(const std::vector<LabeledPatch>& patches,
                                            const ClassifierTrainConfig& config);

}  // namespace rootnet

#endif  // ROOTNET_TRANSFER_HPP_
