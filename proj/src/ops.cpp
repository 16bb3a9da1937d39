// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rootnet/kernels.hpp"

namespace rootnet::ops {

namespace {

inline std::size_t idx(std::int64_t v) { return static_cast<std::size_t>(v); }

[[noreturn]] void shape_error(const std::string& op, const std::string& what, const Shape& a,
                              const Shape& b) {
  throw ShapeError(op + ": " + what + " (" + to_string(a) + " vs " + to_string(b) + ")");
}

template <typename T>
void check_bias(const char* op, const BasicTensor<T>& bias, std::int64_t cout) {
  const Shape want{cout, 1, 1, 1};
  if (bias.shape() != want) shape_error(op, "bias must be [Cout,1,1,1]", bias.shape(), want);
}

template <typename T>
T softplus(T x) {
  return std::max(x, T{0}) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias) {
  const Shape& s = input.shape();
  const Shape& ws = weight.shape();
  if (ws.h != 3 || ws.w != 3) shape_error("conv2d", "kernel must be 3x3", ws, s);
  if (ws.c != s.c) shape_error("conv2d", "input channels do not match weight", s, ws);
  check_bias("conv2d", bias, ws.n);
  BasicTensor<T> out(Shape{s.n, ws.n, s.h, s.w});
  kernels::conv3x3<T>(input.data(), s, weight.data(), bias.data(), ws.n, out.data());
  return out;
}

template <typename T>
BasicTensor<T> conv1x1(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                       const BasicTensor<T>& bias) {
  const Shape& s = input.shape();
  const Shape& ws = weight.shape();
  if (ws.h != 1 || ws.w != 1) shape_error("conv1x1", "kernel must be 1x1", ws, s);
  if (ws.c != s.c) shape_error("conv1x1", "input channels do not match weight", s, ws);
  check_bias("conv1x1", bias, ws.n);
  BasicTensor<T> out(Shape{s.n, ws.n, s.h, s.w});
  kernels::conv1x1<T>(input.data(), s, weight.data(), bias.data(), ws.n, out.data());
  return out;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  const auto in = input.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] > T{0} ? in[i] : T{0};
  return out;
}

template <typename T>
PoolResult<T> maxpool2(const BasicTensor<T>& input) {
  const Shape& s = input.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError("maxpool2: spatial extent must be even, got " + to_string(s));
  }
  PoolResult<T> r{BasicTensor<T>(Shape{s.n, s.c, s.h / 2, s.w / 2}), {}};
  r.argmax.resize(r.output.size());
  kernels::maxpool2<T>(input.data(), s, r.output.data(), r.argmax);
  return r;
}

template <typename T>
BasicTensor<T> transpose_conv2(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                               const BasicTensor<T>& bias) {
  const Shape& s = input.shape();
  const Shape& ws = weight.shape();
  if (ws.h != 2 || ws.w != 2) shape_error("transpose_conv2", "kernel must be 2x2", ws, s);
  if (ws.n != s.c) shape_error("transpose_conv2", "input channels do not match weight", s, ws);
  check_bias("transpose_conv2", bias, ws.c);
  BasicTensor<T> out(Shape{s.n, ws.c, 2 * s.h, 2 * s.w});
  kernels::transpose_conv2<T>(input.data(), s, weight.data(), bias.data(), ws.c, out.data());
  return out;
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    shape_error("concat_channels", "batch and spatial extents must match", sa, sb);
  }
  BasicTensor<T> out(Shape{sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::size_t pa = idx(sa.c) * sa.plane();
  const std::size_t pb = idx(sb.c) * sb.plane();
  for (std::int64_t n = 0; n < sa.n; ++n) {
    T* dst = out.raw() + idx(n) * (pa + pb);
    if (pa) std::memcpy(dst, a.raw() + idx(n) * pa, pa * sizeof(T));
    if (pb) std::memcpy(dst + pa, b.raw() + idx(n) * pb, pb * sizeof(T));
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& x,
                                                         std::int64_t first) {
  const Shape& s = x.shape();
  if (first < 0 || first > s.c) {
    throw ShapeError("split_channels: split point " + std::to_string(first) +
                     " outside " + to_string(s));
  }
  BasicTensor<T> a(Shape{s.n, first, s.h, s.w});
  BasicTensor<T> b(Shape{s.n, s.c - first, s.h, s.w});
  const std::size_t pa = idx(first) * s.plane();
  const std::size_t pb = idx(s.c - first) * s.plane();
  for (std::int64_t n = 0; n < s.n; ++n) {
    const T* src = x.raw() + idx(n) * (pa + pb);
    if (pa) std::memcpy(a.raw() + idx(n) * pa, src, pa * sizeof(T));
    if (pb) std::memcpy(b.raw() + idx(n) * pb, src + pa, pb * sizeof(T));
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  const auto in = input.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = stable_sigmoid(in[i]);
  return out;
}

template <typename T>
BasicTensor<T> pad_bottom_right(const BasicTensor<T>& input, std::int64_t height,
                                std::int64_t width) {
  const Shape& s = input.shape();
  if (height < s.h || width < s.w) {
    shape_error("pad_bottom_right", "target smaller than input", s, Shape{s.n, s.c, height, width});
  }
  if (height == s.h && width == s.w) return input;
  BasicTensor<T> out(Shape{s.n, s.c, height, width});
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc)
    for (std::int64_t y = 0; y < s.h; ++y)
      std::memcpy(out.raw() + idx((nc * height + y) * width), input.raw() + idx((nc * s.h + y) * s.w),
                  idx(s.w) * sizeof(T));
  return out;
}

template <typename T>
BasicTensor<T> crop_top_left(const BasicTensor<T>& input, std::int64_t height,
                             std::int64_t width) {
  const Shape& s = input.shape();
  if (height > s.h || width > s.w) {
    shape_error("crop_top_left", "window larger than input", s, Shape{s.n, s.c, height, width});
  }
  if (height == s.h && width == s.w) return input;
  BasicTensor<T> out(Shape{s.n, s.c, height, width});
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc)
    for (std::int64_t y = 0; y < height; ++y)
      std::memcpy(out.raw() + idx((nc * height + y) * width), input.raw() + idx((nc * s.h + y) * s.w),
                  idx(width) * sizeof(T));
  return out;
}

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& input) {
  const Shape& s = input.shape();
  BasicTensor<T> out(Shape{s.n, s.c, 1, 1});
  const std::size_t plane = s.plane();
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc) {
    const T* p = input.raw() + idx(nc) * plane;
    T sum{0};
    for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    out.raw()[nc] = plane ? sum / static_cast<T>(plane) : T{0};
  }
  return out;
}

namespace {
template <typename T>
void check_bce_args(const BasicTensor<T>& logits, const BasicTensor<T>& target, T pos_weight) {
  if (logits.shape() != target.shape()) {
    shape_error("weighted_bce", "logits and target differ", logits.shape(), target.shape());
  }
  if (logits.shape().c != 1) {
    throw ShapeError("weighted_bce: expected a single logit channel, got " +
                     to_string(logits.shape()));
  }
  if (!(pos_weight > T{0})) throw ValidationError("weighted_bce: pos_weight must be positive");
  for (const T t : target.data()) {
    if (t != T{0} && t != T{1}) {
      throw ValidationError("weighted_bce: target values must be 0 or 1");
    }
  }
}
}  // namespace

template <typename T>
double weighted_bce(const BasicTensor<T>& logits, const BasicTensor<T>& target, T pos_weight) {
  check_bce_args(logits, target, pos_weight);
  if (logits.size() == 0) return 0.0;
  const auto z = logits.data();
  const auto t = target.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const T l = t[i] != T{0} ? pos_weight * softplus(-z[i]) : softplus(z[i]);
    sum += static_cast<double>(l);
  }
  return sum / static_cast<double>(z.size());
}

template <typename T>
void weighted_bce_grad(const BasicTensor<T>& logits, const BasicTensor<T>& target, T pos_weight,
                       T scale, std::span<T> grad) {
  check_bce_args(logits, target, pos_weight);
  if (logits.size() == 0) return;
  const auto z = logits.data();
  const auto t = target.data();
  const T k = scale / static_cast<T>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const T d = t[i] != T{0} ? -pos_weight * stable_sigmoid(-z[i]) : stable_sigmoid(z[i]);
    grad[i] += k * d;
  }
}

namespace {
template <typename T>
void check_ce_args(const BasicTensor<T>& logits, std::span<const int> labels) {
  const Shape& s = logits.shape();
  if (s.h != 1 || s.w != 1 || idx(s.n) != labels.size()) {
    throw ShapeError("softmax_cross_entropy: logits " + to_string(s) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  for (const int l : labels) {
    if (l < 0 || l >= s.c) throw ValidationError("softmax_cross_entropy: label out of range");
  }
}

template <typename T>
std::vector<T> softmax_row(const T* z, std::int64_t k) {
  const T m = *std::max_element(z, z + k);
  std::vector<T> p(idx(k));
  T sum{0};
  for (std::int64_t i = 0; i < k; ++i) sum += p[idx(i)] = std::exp(z[i] - m);
  for (auto& v : p) v /= sum;
  return p;
}
}  // namespace

template <typename T>
double softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels) {
  check_ce_args(logits, labels);
  const std::int64_t k = logits.shape().c;
  double sum = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const T* z = logits.raw() + n * idx(k);
    const T m = *std::max_element(z, z + k);
    T acc{0};
    for (std::int64_t i = 0; i < k; ++i) acc += std::exp(z[i] - m);
    sum += static_cast<double>(m + std::log(acc) - z[labels[n]]);
  }
  return labels.empty() ? 0.0 : sum / static_cast<double>(labels.size());
}

template <typename T>
void softmax_cross_entropy_grad(const BasicTensor<T>& logits, std::span<const int> labels,
                                T scale, std::span<T> grad) {
  check_ce_args(logits, labels);
  const std::int64_t k = logits.shape().c;
  if (labels.empty()) return;
  const T s = scale / static_cast<T>(labels.size());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const auto p = softmax_row(logits.raw() + n * idx(k), k);
    for (std::int64_t i = 0; i < k; ++i) {
      grad[n * idx(k) + idx(i)] += s * (p[idx(i)] - (i == labels[n] ? T{1} : T{0}));
    }
  }
}

#define ROOTNET_INSTANTIATE(T)                                                                  \
  template T stable_sigmoid<T>(T);                                                              \
  template BasicTensor<T> conv2d<T>(const BasicTensor<T>&, const BasicTensor<T>&,               \
                                    const BasicTensor<T>&);                                     \
  template BasicTensor<T> conv1x1<T>(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                     const BasicTensor<T>&);                                    \
  template BasicTensor<T> relu<T>(const BasicTensor<T>&);                                       \
  template PoolResult<T> maxpool2<T>(const BasicTensor<T>&);                                    \
  template BasicTensor<T> transpose_conv2<T>(const BasicTensor<T>&, const BasicTensor<T>&,      \
                                             const BasicTensor<T>&);                            \
  template BasicTensor<T> concat_channels<T>(const BasicTensor<T>&, const BasicTensor<T>&);     \
  template std::pair<BasicTensor<T>, BasicTensor<T>> split_channels<T>(const BasicTensor<T>&,   \
                                                                       std::int64_t);           \
  template BasicTensor<T> sigmoid<T>(const BasicTensor<T>&);                                    \
  template BasicTensor<T> pad_bottom_right<T>(const BasicTensor<T>&, std::int64_t,              \
                                              std::int64_t);                                    \
  template BasicTensor<T> crop_top_left<T>(const BasicTensor<T>&, std::int64_t, std::int64_t);  \
  template BasicTensor<T> global_avg_pool<T>(const BasicTensor<T>&);                            \
  template double weighted_bce<T>(const BasicTensor<T>&, const BasicTensor<T>&, T);             \
  template void weighted_bce_grad<T>(const BasicTensor<T>&, const BasicTensor<T>&, T, T,        \
                                     std::span<T>);                                             \
  template double softmax_cross_entropy<T>(const BasicTensor<T>&, std::span<const int>);        \
  template void softmax_cross_entropy_grad<T>(const BasicTensor<T>&, std::span<const int>, T,   \
                                              std::span<T>);

ROOTNET_INSTANTIATE(float)
ROOTNET_INSTANTIATE(double)

#undef ROOTNET_INSTANTIATE

}  // namespace rootnet::ops
