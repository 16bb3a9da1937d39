// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Encoder-decoder segmentation network.
//
// Parameter order (which is also forward order):
//   enc{i}.conv{0,1}.{weight,bias}         i = 0 .. depth-1
//   bottleneck.conv{0,1}.{weight,bias}
//   dec{i}.up.{weight,bias}, dec{i}.conv{0,1}.{weight,bias}   i = depth-1 .. 0
//   head.{weight,bias}
// dec{i} works at the resolution of enc{i} and concatenates its skip tensor
// (skip channels first).

#ifndef ROOTNET_UNET_HPP_
#define ROOTNET_UNET_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rootnet/tape.hpp"
#include "rootnet/tensor.hpp"

namespace rootnet {

enum class Variant { generic, vgg13 };

std::string to_string(Variant v);
/// Throws ConfigError for anything other than "generic" or "vgg13".
Variant parse_variant(std::string_view text);

struct ArchSpec {
  Variant variant = Variant::generic;
  int depth = 4;
  int base_width = 64;
  int in_channels = 3;
  int out_channels = 1;

  /// Throws ConfigError.
  void validate() const;
  /// Output channels of each encoder conv, per block.
  std::vector<std::pair<int, int>> encoder_channels() const;
  int bottleneck_channels() const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

/// The VGG13 down path at base width 64; `base_width` scales it for desk runs.
ArchSpec vgg13_spec(int base_width = 64);

enum class Partition { encoder, decoder, head };

std::string to_string(Partition p);
/// Throws FormatError for names outside the parameter grammar.
Partition partition(std::string_view name);

struct NamedParam {
  std::string name;
  Tensor tensor;
};

class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<NamedParam> params);

  std::size_t size() const { return params_.size(); }
  NamedParam& operator[](std::size_t i) { return params_[i]; }
  const NamedParam& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// nullptr when absent.
  const NamedParam* find(std::string_view name) const;
  NamedParam* find(std::string_view name);

  void clear_grads();

  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  std::vector<NamedParam> params_;
};

/// Names and shapes in forward order.
std::vector<std::pair<std::string, Shape>> param_layout(const ArchSpec& spec);

/// Throws ShapeError naming the first parameter that differs from `spec`.
void check_params(const ArchSpec& spec, const ParamSet& params);

/// He fan-in normal weights and zero biases. Each parameter draws from its own
/// stream keyed by (seed, name).
ParamSet build(const ArchSpec& spec, std::uint64_t seed);
void init_param(NamedParam& param, std::uint64_t seed);

std::int64_t count_params(const ArchSpec& spec);

struct PadRecord {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::int64_t padded_height = 0;
  std::int64_t padded_width = 0;
  std::int64_t top = 0;
  std::int64_t left = 0;
  std::int64_t bottom = 0;
  std::int64_t right = 0;

  bool identity() const { return bottom == 0 && right == 0; }
};

/// Smallest multiples of 2^depth covering (height, width), padded bottom/right.
PadRecord pad_record(std::int64_t height, std::int64_t width, int depth);

/// Logits [N, 1, H', W'] for an input already padded to a multiple of 2^depth.
/// `param(k)` yields the k-th parameter handle in layout order.
template <class Ops, class ParamFn>
typename Ops::Value unet_logits(Ops& ops, const ArchSpec& spec, ParamFn&& param,
                                typename Ops::Value x) {
  using V = typename Ops::Value;
  std::size_t k = 0;
  auto conv_block = [&](V v) {
    for (int j = 0; j < 2; ++j) {
      auto w = param(k++);
      auto b = param(k++);
      v = ops.relu(ops.conv3x3(v, w, b));
    }
    return v;
  };
  std::vector<V> skips;
  for (int i = 0; i < spec.depth; ++i) {
    x = conv_block(std::move(x));
    V pooled = ops.maxpool2(x);
    skips.push_back(std::move(x));
    x = std::move(pooled);
  }
  x = conv_block(std::move(x));
  for (int i = spec.depth - 1; i >= 0; --i) {
    auto w = param(k++);
    auto b = param(k++);
    V up = ops.transpose_conv2(x, w, b);
    x = ops.concat(skips.back(), up);
    skips.pop_back();
    x = conv_block(std::move(x));
  }
  auto w = param(k++);
  auto b = param(k++);
  return ops.conv1x1(x, w, b);
}

/// Pads, runs the network and crops back to the input extent.
template <class Ops, class ParamFn>
typename Ops::Value unet_forward_logits(Ops& ops, const ArchSpec& spec, ParamFn&& param,
                                        typename Ops::Value x) {
  const Shape s = ops.shape(x);
  const PadRecord pr = pad_record(s.h, s.w, spec.depth);
  if (!pr.identity()) x = ops.pad_bottom_right(x, pr.padded_height, pr.padded_width);
  auto logits = unet_logits(ops, spec, param, std::move(x));
  if (!pr.identity()) logits = ops.crop_top_left(logits, pr.height, pr.width);
  return logits;
}

/// Root probabilities [N, 1, H, W] for a batch [N, in_channels, H, W].
Tensor forward(const ArchSpec& spec, const ParamSet& params, const Tensor& batch);

/// Registers every parameter on `tape` and returns the cropped logits.
Var forward_logits(Tape<float>& tape, const ArchSpec& spec, ParamSet& params, Var batch);

}  // namespace rootnet

#endif  // ROOTNET_UNET_HPP_
