// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Shape-checked forward operations on whole tensors. These are the values the
// autodiff tape records; they can also be used directly for inference.
//
// Parameter layouts:
//   conv2d            weight [Cout, Cin, 3, 3]
//   conv1x1           weight [Cout, Cin, 1, 1]
//   transpose_conv2   weight [Cin, Cout, 2, 2]
//   biases            [Cout, 1, 1, 1]

#ifndef ROOTNET_OPS_HPP_
#define ROOTNET_OPS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "rootnet/tensor.hpp"

namespace rootnet::ops {

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> conv1x1(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                       const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

template <typename T>
struct PoolResult {
  BasicTensor<T> output;
  std::vector<std::uint8_t> argmax;
};

/// Throws ShapeError on odd spatial extents instead of truncating.
template <typename T>
PoolResult<T> maxpool2(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> transpose_conv2(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                               const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Splits channels [0, first) and [first, C).
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& x,
                                                         std::int64_t first);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input);

/// Zero-pads on the bottom and right up to (height, width).
template <typename T>
BasicTensor<T> pad_bottom_right(const BasicTensor<T>& input, std::int64_t height,
                                std::int64_t width);

/// Keeps the top-left (height, width) window.
template <typename T>
BasicTensor<T> crop_top_left(const BasicTensor<T>& input, std::int64_t height,
                             std::int64_t width);

/// Mean over each channel plane: [N, C, H, W] -> [N, C, 1, 1].
template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& input);

/// Mean over all pixels of
///   -[pos_weight * t * log(sigmoid(z)) + (1 - t) * log(1 - sigmoid(z))]
/// evaluated through softplus so saturated logits never hit log(0).
/// Targets must be exactly 0 or 1.
template <typename T>
double weighted_bce(const BasicTensor<T>& logits, const BasicTensor<T>& target, T pos_weight);

/// d(weighted_bce)/d(logits), scaled by `scale`.
template <typename T>
void weighted_bce_grad(const BasicTensor<T>& logits, const BasicTensor<T>& target,
                       T pos_weight, T scale, std::span<T> grad);

/// Mean softmax cross-entropy of logits [N, K, 1, 1] against class labels.
template <typename T>
double softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels);

template <typename T>
void softmax_cross_entropy_grad(const BasicTensor<T>& logits, std::span<const int> labels,
                                T scale, std::span<T> grad);

/// Numerically stable logistic function.
template <typename T>
T stable_sigmoid(T x);

}  // namespace rootnet::ops

#endif  // ROOTNET_OPS_HPP_
