// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Layer kernels on raw NCHW buffers, parallelised with OpenMP.
//
// Every output element is produced by exactly one thread with a fixed
// accumulation order (input channel major, then kernel row, then kernel
// column), so results are bit-identical for any thread count.
//
// Shapes:
//   conv3x3          weight [cout, C, 3, 3], zero padding 1, same-size output
//   conv1x1          weight [cout, C, 1, 1]
//   transpose_conv2  weight [C, cout, 2, 2], stride 2, output 2H x 2W
//   maxpool2         2x2 windows; argmax holds the row-major window slot 0..3,
//                    ties resolved to the first slot
//
// The forward kernels overwrite `out` (conv3x3 adds into it instead when
// `accumulate` is set, ignoring the bias). All *_backward_* kernels add into
// their gradient buffers. An empty bias / grad_bias span means "no bias".
// The serial oracle in reference.hpp has the same signatures.

#ifndef ROOTNET_KERNELS_HPP_
#define ROOTNET_KERNELS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include "rootnet/tensor.hpp"

namespace rootnet::kernels {

template <typename T>
void conv3x3(std::span<const T> in, Shape in_shape, std::span<const T> weight,
             std::span<const T> bias, std::int64_t cout, std::span<T> out,
             bool accumulate = false);
template <typename T>
void conv3x3_backward_input(std::span<const T> grad_out, Shape out_shape,
                            std::span<const T> weight, std::int64_t cin,
                            std::span<T> grad_in);
template <typename T>
void conv3x3_backward_weight(std::span<const T> in, Shape in_shape,
                             std::span<const T> grad_out, std::int64_t cout,
                             std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
void conv1x1(std::span<const T> in, Shape in_shape, std::span<const T> weight,
             std::span<const T> bias, std::int64_t cout, std::span<T> out);
template <typename T>
void conv1x1_backward_input(std::span<const T> grad_out, Shape out_shape,
                            std::span<const T> weight, std::int64_t cin,
                            std::span<T> grad_in);
template <typename T>
void conv1x1_backward_weight(std::span<const T> in, Shape in_shape,
                             std::span<const T> grad_out, std::int64_t cout,
                             std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
void transpose_conv2(std::span<const T> in, Shape in_shape, std::span<const T> weight,
                     std::span<const T> bias, std::int64_t cout, std::span<T> out);
template <typename T>
void transpose_conv2_backward_input(std::span<const T> grad_out, Shape out_shape,
                                    std::span<const T> weight, std::int64_t cin,
                                    std::span<T> grad_in);
template <typename T>
void transpose_conv2_backward_weight(std::span<const T> in, Shape in_shape,
                                     std::span<const T> grad_out, std::int64_t cout,
                                     std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
void maxpool2(std::span<const T> in, Shape in_shape, std::span<T> out,
              std::span<std::uint8_t> argmax);
template <typename T>
void maxpool2_backward(std::span<const T> grad_out, Shape out_shape,
                       std::span<const std::uint8_t> argmax, std::span<T> grad_in);

/// Dot product with a fixed lane-partitioned summation order.
template <typename T>
T dot(const T* a, const T* b, std::size_t n);

}  // namespace rootnet::kernels

#endif  // ROOTNET_KERNELS_HPP_
