// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/reference.hpp"

namespace rootnet::reference {

namespace {

template <typename T>
T bias_or_zero(std::span<const T> bias, std::int64_t c) {
  return bias.empty() ? T{0} : bias[static_cast<std::size_t>(c)];
}

}  // namespace

template <typename T>
void conv3x3(std::span<const T> in, Shape s, std::span<const T> weight,
             std::span<const T> bias, std::int64_t cout, std::span<T> out,
             bool accumulate) {
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t x = 0; x < s.w; ++x) {
          const std::size_t o = static_cast<std::size_t>(((n * cout + co) * s.h + y) * s.w + x);
          T acc = accumulate ? out[o] : bias_or_zero(bias, co);
          for (std::int64_t ci = 0; ci < s.c; ++ci)
            for (std::int64_t dy = 0; dy < 3; ++dy)
              for (std::int64_t dx = 0; dx < 3; ++dx) {
                const std::int64_t yy = y + dy - 1;
                const std::int64_t xx = x + dx - 1;
                if (yy < 0 || yy >= s.h || xx < 0 || xx >= s.w) continue;
                acc += weight[static_cast<std::size_t>(((co * s.c + ci) * 3 + dy) * 3 + dx)] *
                       in[static_cast<std::size_t>(((n * s.c + ci) * s.h + yy) * s.w + xx)];
              }
          out[o] = acc;
        }
}

template <typename T>
void conv3x3_backward_input(std::span<const T> grad_out, Shape s,
                            std::span<const T> weight, std::int64_t cin,
                            std::span<T> grad_in) {
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < s.c; ++co)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t x = 0; x < s.w; ++x) {
          const T g = grad_out[static_cast<std::size_t>(((n * s.c + co) * s.h + y) * s.w + x)];
          for (std::int64_t ci = 0; ci < cin; ++ci)
            for (std::int64_t dy = 0; dy < 3; ++dy)
              for (std::int64_t dx = 0; dx < 3; ++dx) {
                const std::int64_t yy = y + dy - 1;
                const std::int64_t xx = x + dx - 1;
                if (yy < 0 || yy >= s.h || xx < 0 || xx >= s.w) continue;
                grad_in[static_cast<std::size_t>(((n * cin + ci) * s.h + yy) * s.w + xx)] +=
                    g * weight[static_cast<std::size_t>(((co * cin + ci) * 3 + dy) * 3 + dx)];
              }
        }
}

template <typename T>
void conv3x3_backward_weight(std::span<const T> in, Shape s, std::span<const T> grad_out,
                             std::int64_t cout, std::span<T> grad_weight,
                             std::span<T> grad_bias) {
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t x = 0; x < s.w; ++x) {
          const T g = grad_out[static_cast<std::size_t>(((n * cout + co) * s.h + y) * s.w + x)];
          if (!grad_bias.empty()) grad_bias[static_cast<std::size_t>(co)] += g;
          for (std::int64_t ci = 0; ci < s.c; ++ci)
            for (std::int64_t dy = 0; dy < 3; ++dy)
              for (std::int64_t dx = 0; dx < 3; ++dx) {
                const std::int64_t yy = y + dy - 1;
                const std::int64_t xx = x + dx - 1;
                if (yy < 0 || yy >= s.h || xx < 0 || xx >= s.w) continue;
                grad_weight[static_cast<std::size_t>(((co * s.c + ci) * 3 + dy) * 3 + dx)] +=
                    g * in[static_cast<std::size_t>(((n * s.c + ci) * s.h + yy) * s.w + xx)];
              }
        }
}

template <typename T>
void conv1x1(std::span<const T> in, Shape s, std::span<const T> weight,
             std::span<const T> bias, std::int64_t cout, std::span<T> out) {
  const std::int64_t hw = s.h * s.w;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t p = 0; p < hw; ++p) {
        T acc = bias_or_zero(bias, co);
        for (std::int64_t ci = 0; ci < s.c; ++ci)
          acc += weight[static_cast<std::size_t>(co * s.c + ci)] *
                 in[static_cast<std::size_t>((n * s.c + ci) * hw + p)];
        out[static_cast<std::size_t>((n * cout + co) * hw + p)] = acc;
      }
}

template <typename T>
void conv1x1_backward_input(std::span<const T> grad_out, Shape s,
                            std::span<const T> weight, std::int64_t cin,
                            std::span<T> grad_in) {
  const std::int64_t hw = s.h * s.w;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < s.c; ++co)
      for (std::int64_t p = 0; p < hw; ++p)
        for (std::int64_t ci = 0; ci < cin; ++ci)
          grad_in[static_cast<std::size_t>((n * cin + ci) * hw + p)] +=
              weight[static_cast<std::size_t>(co * cin + ci)] *
              grad_out[static_cast<std::size_t>((n * s.c + co) * hw + p)];
}

template <typename T>
void conv1x1_backward_weight(std::span<const T> in, Shape s, std::span<const T> grad_out,
                             std::int64_t cout, std::span<T> grad_weight,
                             std::span<T> grad_bias) {
  const std::int64_t hw = s.h * s.w;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t p = 0; p < hw; ++p) {
        const T g = grad_out[static_cast<std::size_t>((n * cout + co) * hw + p)];
        if (!grad_bias.empty()) grad_bias[static_cast<std::size_t>(co)] += g;
        for (std::int64_t ci = 0; ci < s.c; ++ci)
          grad_weight[static_cast<std::size_t>(co * s.c + ci)] +=
              g * in[static_cast<std::size_t>((n * s.c + ci) * hw + p)];
      }
}

template <typename T>
void transpose_conv2(std::span<const T> in, Shape s, std::span<const T> weight,
                     std::span<const T> bias, std::int64_t cout, std::span<T> out) {
  const std::int64_t oh = 2 * s.h;
  const std::int64_t ow = 2 * s.w;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t x = 0; x < ow; ++x) {
          T acc = bias_or_zero(bias, co);
          for (std::int64_t ci = 0; ci < s.c; ++ci)
            acc += weight[static_cast<std::size_t>(((ci * cout + co) * 2 + y % 2) * 2 + x % 2)] *
                   in[static_cast<std::size_t>(((n * s.c + ci) * s.h + y / 2) * s.w + x / 2)];
          out[static_cast<std::size_t>(((n * cout + co) * oh + y) * ow + x)] = acc;
        }
}

template <typename T>
void transpose_conv2_backward_input(std::span<const T> grad_out, Shape s,
                                    std::span<const T> weight, std::int64_t cin,
                                    std::span<T> grad_in) {
  const std::int64_t ih = s.h / 2;
  const std::int64_t iw = s.w / 2;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < s.c; ++co)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t x = 0; x < s.w; ++x) {
          const T g = grad_out[static_cast<std::size_t>(((n * s.c + co) * s.h + y) * s.w + x)];
          for (std::int64_t ci = 0; ci < cin; ++ci)
            grad_in[static_cast<std::size_t>(((n * cin + ci) * ih + y / 2) * iw + x / 2)] +=
                g * weight[static_cast<std::size_t>(((ci * s.c + co) * 2 + y % 2) * 2 + x % 2)];
        }
}

template <typename T>
void transpose_conv2_backward_weight(std::span<const T> in, Shape s,
                                     std::span<const T> grad_out, std::int64_t cout,
                                     std::span<T> grad_weight, std::span<T> grad_bias) {
  const std::int64_t oh = 2 * s.h;
  const std::int64_t ow = 2 * s.w;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t x = 0; x < ow; ++x) {
          const T g = grad_out[static_cast<std::size_t>(((n * cout + co) * oh + y) * ow + x)];
          if (!grad_bias.empty()) grad_bias[static_cast<std::size_t>(co)] += g;
          for (std::int64_t ci = 0; ci < s.c; ++ci)
            grad_weight[static_cast<std::size_t>(((ci * cout + co) * 2 + y % 2) * 2 + x % 2)] +=
                g * in[static_cast<std::size_t>(((n * s.c + ci) * s.h + y / 2) * s.w + x / 2)];
        }
}

template <typename T>
void maxpool2(std::span<const T> in, Shape s, std::span<T> out,
              std::span<std::uint8_t> argmax) {
  const std::int64_t oh = s.h / 2;
  const std::int64_t ow = s.w / 2;
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc)
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x) {
        int best = 0;
        T best_v{};
        for (int k = 0; k < 4; ++k) {
          const T v = in[static_cast<std::size_t>((nc * s.h + 2 * y + k / 2) * s.w + 2 * x + k % 2)];
          if (k == 0 || v > best_v) {
            best = k;
            best_v = v;
          }
        }
        const std::size_t o = static_cast<std::size_t>((nc * oh + y) * ow + x);
        out[o] = best_v;
        argmax[o] = static_cast<std::uint8_t>(best);
      }
}

template <typename T>
void maxpool2_backward(std::span<const T> grad_out, Shape s,
                       std::span<const std::uint8_t> argmax, std::span<T> grad_in) {
  const std::int64_t ih = 2 * s.h;
  const std::int64_t iw = 2 * s.w;
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc)
    for (std::int64_t y = 0; y < s.h; ++y)
      for (std::int64_t x = 0; x < s.w; ++x) {
        const std::size_t o = static_cast<std::size_t>((nc * s.h + y) * s.w + x);
        const int k = argmax[o];
        grad_in[static_cast<std::size_t>((nc * ih + 2 * y + k / 2) * iw + 2 * x + k % 2)] +=
            grad_out[o];
      }
}

template <typename T>
void strided_conv2(std::span<const T> in, Shape s, std::span<const T> weight,
                   std::int64_t cout, std::span<T> out) {
  const std::int64_t oh = s.h / 2;
  const std::int64_t ow = s.w / 2;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t x = 0; x < ow; ++x) {
          T acc{0};
          for (std::int64_t ci = 0; ci < s.c; ++ci)
            for (std::int64_t a = 0; a < 2; ++a)
              for (std::int64_t b = 0; b < 2; ++b)
                acc += weight[static_cast<std::size_t>(((co * s.c + ci) * 2 + a) * 2 + b)] *
                       in[static_cast<std::size_t>(((n * s.c + ci) * s.h + 2 * y + a) * s.w +
                                                   2 * x + b)];
          out[static_cast<std::size_t>(((n * cout + co) * oh + y) * ow + x)] = acc;
        }
}

#define ROOTNET_INSTANTIATE(T)                                                             \
  template void conv3x3<T>(std::span<const T>, Shape, std::span<const T>,                  \
                           std::span<const T>, std::int64_t, std::span<T>, bool);          \
  template void conv3x3_backward_input<T>(std::span<const T>, Shape, std::span<const T>,   \
                                          std::int64_t, std::span<T>);                     \
  template void conv3x3_backward_weight<T>(std::span<const T>, Shape, std::span<const T>,  \
                                           std::int64_t, std::span<T>, std::span<T>);      \
  template void conv1x1<T>(std::span<const T>, Shape, std::span<const T>,                  \
                           std::span<const T>, std::int64_t, std::span<T>);                \
  template void conv1x1_backward_input<T>(std::span<const T>, Shape, std::span<const T>,   \
                                          std::int64_t, std::span<T>);                     \
  template void conv1x1_backward_weight<T>(std::span<const T>, Shape, std::span<const T>,  \
                                           std::int64_t, std::span<T>, std::span<T>);      \
  template void transpose_conv2<T>(std::span<const T>, Shape, std::span<const T>,          \
                                   std::span<const T>, std::int64_t, std::span<T>);        \
  template void transpose_conv2_backward_input<T>(std::span<const T>, Shape,               \
                                                  std::span<const T>, std::int64_t,        \
                                                  std::span<T>);                           \
  template void transpose_conv2_backward_weight<T>(std::span<const T>, Shape,              \
                                                   std::span<const T>, std::int64_t,       \
                                                   std::span<T>, std::span<T>);            \
  template void maxpool2<T>(std::span<const T>, Shape, std::span<T>,                       \
                            std::span<std::uint8_t>);                                      \
  template void maxpool2_backward<T>(std::span<const T>, Shape,                            \
                                     std::span<const std::uint8_t>, std::span<T>);         \
  template void strided_conv2<T>(std::span<const T>, Shape, std::span<const T>,            \
                                 std::int64_t, std::span<T>);

ROOTNET_INSTANTIATE(float)
ROOTNET_INSTANTIATE(double)

#undef ROOTNET_INSTANTIATE

}  // namespace rootnet::reference
