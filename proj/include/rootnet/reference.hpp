// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Serial loop-nest versions of the kernels in kernels.hpp. They are the test
// oracle for the parallel kernels and the baseline in bench/.

#ifndef ROOTNET_REFERENCE_HPP_
#define ROOTNET_REFERENCE_HPP_

#include <cstdint>
#include <span>

#include "rootnet/tensor.hpp"

namespace rootnet::reference {

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

// Stride-2 2x2 convolution (no bias), the adjoint of transpose_conv2.
// `in` is [N, C, 2H, 2W]; weight uses the transpose_conv2 layout
// [cout, C, 2, 2]; out is [N, cout, H, W].
template <typename T>
void strided_conv2(std::span<const T> in, Shape in_shape, std::span<const T> weight,
                   std::int64_t cout, std::span<T> out);

}  // namespace rootnet::reference

#endif  // ROOTNET_REFERENCE_HPP_
