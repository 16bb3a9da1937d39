// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// All convolution flavours are lowered onto two register-blocked
// micro-kernels that work on a "grid" layout: each input plane is copied into
// a zero-haloed buffer with row stride Wp = W + 2*pad, so that every kernel tap
// becomes a constant offset and the inner loop runs over a contiguous range.
// Output positions p = y*Wp + x with x >= W are junk and dropped on copy-out.

#include "rootnet/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <vector>

namespace rootnet::kernels {

namespace {

template <typename T>
struct Simd;
template <>
struct Simd<float> {
  typedef float type __attribute__((vector_size(64)));
  static constexpr int kLanes = 16;
};
template <>
struct Simd<double> {
  typedef double type __attribute__((vector_size(64)));
  static constexpr int kLanes = 8;
};

template <typename T>
using Vec = typename Simd<T>::type;

template <typename T>
inline Vec<T> load(const T* p) {
  Vec<T> v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

template <typename T>
inline void store(T* p, const Vec<T>& v) {
  std::memcpy(p, &v, sizeof v);
}

template <typename T>
inline T hsum(const Vec<T>& v) {
  T s{0};
  for (int i = 0; i < Simd<T>::kLanes; ++i) s += v[i];
  return s;
}

// Vectors per channel in the forward micro-kernel.
constexpr int kForwardVecs = 2;

inline std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }
inline std::size_t idx(std::int64_t v) { return static_cast<std::size_t>(v); }

// Geometry of a grid-laid-out tensor.
struct Grid {
  std::int64_t h = 0, w = 0, pad = 0;
  std::int64_t wp = 0;          // padded row stride
  std::size_t in_plane = 0;     // stride between padded input planes
  std::size_t out_len = 0;      // computed output positions, rounded to the tile
  std::size_t max_offset = 0;   // largest tap offset

  Grid(std::int64_t h_, std::int64_t w_, std::int64_t pad_, std::size_t tile)
      : h(h_), w(w_), pad(pad_), wp(w_ + 2 * pad_) {
    in_plane = idx((h + 2 * pad) * wp);
    out_len = round_up(idx(h * wp), tile);
    max_offset = idx(2 * pad * wp + 2 * pad);
  }

  // Elements of slack after the last input plane so tiles may over-read.
  std::size_t slack() const {
    const std::size_t need = out_len + max_offset;
    return need > in_plane ? need - in_plane : 0;
  }

  std::vector<std::ptrdiff_t> taps() const {
    std::vector<std::ptrdiff_t> t;
    for (std::int64_t dy = 0; dy <= 2 * pad; ++dy)
      for (std::int64_t dx = 0; dx <= 2 * pad; ++dx) t.push_back(dy * wp + dx);
    return t;
  }
};

// Copies `planes` HxW planes into zero-haloed grid planes.
template <typename T>
std::vector<T> to_input_grid(const T* src, std::int64_t planes, const Grid& g) {
  std::vector<T> dst(idx(planes) * g.in_plane + g.slack(), T{0});
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* s = src + idx(p) * idx(g.h * g.w);
    T* d = dst.data() + idx(p) * g.in_plane;
    for (std::int64_t y = 0; y < g.h; ++y) {
      std::memcpy(d + idx((y + g.pad) * g.wp + g.pad), s + idx(y * g.w), idx(g.w) * sizeof(T));
    }
  }
  return dst;
}

// Copies HxW planes onto output-grid planes (stride out_len, zero junk).
template <typename T>
std::vector<T> to_output_grid(const T* src, std::int64_t planes, const Grid& g) {
  std::vector<T> dst(idx(planes) * g.out_len, T{0});
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* s = src + idx(p) * idx(g.h * g.w);
    T* d = dst.data() + idx(p) * g.out_len;
    for (std::int64_t y = 0; y < g.h; ++y) {
      std::memcpy(d + idx(y * g.wp), s + idx(y * g.w), idx(g.w) * sizeof(T));
    }
  }
  return dst;
}

template <typename T>
void from_output_grid(const T* src, std::int64_t planes, const Grid& g, T* dst) {
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* s = src + idx(p) * g.out_len;
    T* d = dst + idx(p) * idx(g.h * g.w);
    for (std::int64_t y = 0; y < g.h; ++y) {
      std::memcpy(d + idx(y * g.w), s + idx(y * g.wp), idx(g.w) * sizeof(T));
    }
  }
}

// dst[c][p] += sum_ci sum_k wpack[ci][k][c] * src[ci][p + taps[k]] for CB
// consecutive output channels and p in [p0, p1), p1 - p0 a multiple of the tile.
template <typename T, int CB, int NT>
void tap_conv_tile(const T* __restrict src, std::size_t in_plane, std::int64_t cin,
                   const std::ptrdiff_t* taps, const T* __restrict wpack,
                   T* __restrict dst, std::size_t dst_stride, std::size_t p0, std::size_t p1) {
  constexpr int L = Simd<T>::kLanes;
  constexpr int NV = kForwardVecs;
  for (std::size_t p = p0; p < p1; p += L * NV) {
    Vec<T> acc[CB][NV];
    for (int c = 0; c < CB; ++c)
      for (int v = 0; v < NV; ++v) acc[c][v] = load(dst + c * dst_stride + p + v * L);
    for (std::int64_t ci = 0; ci < cin; ++ci) {
      const T* base = src + idx(ci) * in_plane + p;
      const T* wk = wpack + idx(ci) * NT * CB;
      for (int k = 0; k < NT; ++k) {
        const T* s = base + taps[k];
        Vec<T> x[NV];
        for (int v = 0; v < NV; ++v) x[v] = load(s + v * L);
        for (int c = 0; c < CB; ++c) {
          const T w = wk[k * CB + c];
          for (int v = 0; v < NV; ++v) acc[c][v] += w * x[v];
        }
      }
    }
    for (int c = 0; c < CB; ++c)
      for (int v = 0; v < NV; ++v) store(dst + c * dst_stride + p + v * L, acc[c][v]);
  }
}

template <typename T, int NT>
void dispatch_tile(int block, const T* src, std::size_t in_plane, std::int64_t cin,
                   const std::ptrdiff_t* taps, const T* wpack, T* dst, std::size_t stride,
                   std::size_t p0, std::size_t p1) {
  switch (block) {
    case 8: tap_conv_tile<T, 8, NT>(src, in_plane, cin, taps, wpack, dst, stride, p0, p1); break;
    case 4: tap_conv_tile<T, 4, NT>(src, in_plane, cin, taps, wpack, dst, stride, p0, p1); break;
    case 2: tap_conv_tile<T, 2, NT>(src, in_plane, cin, taps, wpack, dst, stride, p0, p1); break;
    default: tap_conv_tile<T, 1, NT>(src, in_plane, cin, taps, wpack, dst, stride, p0, p1); break;
  }
}

struct ChannelBlock {
  std::int64_t start;
  int size;
};

std::vector<ChannelBlock> channel_blocks(std::int64_t count) {
  std::vector<ChannelBlock> blocks;
  std::int64_t c = 0;
  for (int size : {8, 4, 2, 1}) {
    while (count - c >= size) {
      blocks.push_back({c, size});
      c += size;
    }
  }
  return blocks;
}

// Generic tap convolution on grids. `weight` is [cout][cin][ntaps]; the output
// grid `dst` ([n][cout][out_len]) must already hold the initial values.
template <typename T>
void tap_conv(const std::vector<T>& src, std::int64_t n_images, std::int64_t cin,
              const Grid& g, const T* weight, std::int64_t cout, T* dst) {
  const auto taps = g.taps();
  const int ntaps = static_cast<int>(taps.size());
  const auto blocks = channel_blocks(cout);

  // Pack weights per block as [ci][k][c].
  std::vector<T> wpack(idx(cout * cin * ntaps));
  for (const auto& b : blocks) {
    T* wb = wpack.data() + idx(b.start * cin * ntaps);
    for (std::int64_t ci = 0; ci < cin; ++ci)
      for (int k = 0; k < ntaps; ++k)
        for (int c = 0; c < b.size; ++c)
          wb[(idx(ci) * idx(ntaps) + idx(k)) * idx(b.size) + idx(c)] =
              weight[(idx(b.start + c) * idx(cin) + idx(ci)) * idx(ntaps) + idx(k)];
  }

  constexpr std::size_t kTile = Simd<T>::kLanes * kForwardVecs;
  const std::size_t span_len = std::min<std::size_t>(g.out_len, 16 * kTile);
  const std::int64_t nspans = static_cast<std::int64_t>((g.out_len + span_len - 1) / span_len);
  const std::int64_t nblocks = static_cast<std::int64_t>(blocks.size());
  const std::int64_t tasks = n_images * nblocks * nspans;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < tasks; ++t) {
    const std::int64_t n = t / (nblocks * nspans);
    const auto& b = blocks[idx((t / nspans) % nblocks)];
    const std::size_t p0 = idx(t % nspans) * span_len;
    const std::size_t p1 = std::min(g.out_len, p0 + span_len);
    const T* s = src.data() + idx(n * cin) * g.in_plane;
    const T* wb = wpack.data() + idx(b.start * cin * ntaps);
    T* d = dst + (idx(n * cout + b.start)) * g.out_len;
    if (ntaps == 9) {
      dispatch_tile<T, 9>(b.size, s, g.in_plane, cin, taps.data(), wb, d, g.out_len, p0, p1);
    } else {
      dispatch_tile<T, 1>(b.size, s, g.in_plane, cin, taps.data(), wb, d, g.out_len, p0, p1);
    }
  }
}

// grad_weight[co][ci][k] += sum_n sum_p gout[n][co][p] * src[n][ci][p + taps[k]]
// for CB consecutive output channels. Returns per-(c, k) sums.
template <typename T, int CB, int NT>
void tap_weight_grad_block(const T* __restrict src, std::size_t in_plane, std::int64_t cin,
                           std::int64_t n_images, const T* __restrict gout, std::int64_t cout,
                           std::size_t out_len, const std::ptrdiff_t* taps, T* result) {
  constexpr int L = Simd<T>::kLanes;
  Vec<T> acc[CB][NT];
  for (int c = 0; c < CB; ++c)
    for (int k = 0; k < NT; ++k) acc[c][k] = Vec<T>{};
  for (std::int64_t n = 0; n < n_images; ++n) {
    const T* s = src + idx(n * cin) * in_plane;
    const T* g = gout + idx(n * cout) * out_len;
    for (std::size_t p = 0; p < out_len; p += L) {
      Vec<T> gv[CB];
      for (int c = 0; c < CB; ++c) gv[c] = load(g + c * out_len + p);
      for (int k = 0; k < NT; ++k) {
        const Vec<T> x = load(s + p + taps[k]);
        for (int c = 0; c < CB; ++c) acc[c][k] += gv[c] * x;
      }
    }
  }
  for (int c = 0; c < CB; ++c)
    for (int k = 0; k < NT; ++k) result[c * NT + k] = hsum<T>(acc[c][k]);
}

// Weight gradient on grids; `gout` is an output grid [n][cout][out_len] with
// zero junk. Adds into grad_weight laid out [cout][cin][ntaps].
template <typename T>
void tap_weight_grad(const std::vector<T>& src, std::int64_t n_images, std::int64_t cin,
                     const Grid& g, const std::vector<T>& gout, std::int64_t cout,
                     T* grad_weight) {
  const auto taps = g.taps();
  const int ntaps = static_cast<int>(taps.size());
  const std::int64_t pairs = (cout + 1) / 2;
  const std::int64_t tasks = pairs * cin;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < tasks; ++t) {
    const std::int64_t co = (t / cin) * 2;
    const std::int64_t ci = t % cin;
    T result[2 * 9];
    const T* s = src.data() + idx(ci) * g.in_plane;
    const T* go = gout.data() + idx(co) * g.out_len;
    const int cb = co + 1 < cout ? 2 : 1;
    const auto* tp = taps.data();
    if (ntaps == 9) {
      if (cb == 2) tap_weight_grad_block<T, 2, 9>(s, g.in_plane, cin, n_images, go, cout, g.out_len, tp, result);
      else tap_weight_grad_block<T, 1, 9>(s, g.in_plane, cin, n_images, go, cout, g.out_len, tp, result);
    } else {
      if (cb == 2) tap_weight_grad_block<T, 2, 1>(s, g.in_plane, cin, n_images, go, cout, g.out_len, tp, result);
      else tap_weight_grad_block<T, 1, 1>(s, g.in_plane, cin, n_images, go, cout, g.out_len, tp, result);
    }
    for (int c = 0; c < cb; ++c)
      for (int k = 0; k < ntaps; ++k)
        grad_weight[(idx(co + c) * idx(cin) + idx(ci)) * idx(ntaps) + idx(k)] +=
            result[c * ntaps + k];
  }
}

template <typename T>
void bias_grad(const T* gout, std::int64_t n_images, std::int64_t channels, std::size_t plane,
               std::span<T> grad_bias) {
  if (grad_bias.empty()) return;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < channels; ++c) {
    T sum{0};
    for (std::int64_t n = 0; n < n_images; ++n) {
      const T* g = gout + (idx(n * channels + c)) * plane;
      Vec<T> acc{};
      std::size_t p = 0;
      constexpr int L = Simd<T>::kLanes;
      for (; p + L <= plane; p += L) acc += load(g + p);
      T tail{0};
      for (; p < plane; ++p) tail += g[p];
      sum += hsum<T>(acc) + tail;
    }
    grad_bias[idx(c)] += sum;
  }
}

template <typename T>
void fill_bias(T* dst, std::int64_t n_images, std::int64_t channels, std::size_t stride,
               std::span<const T> bias) {
  for (std::int64_t n = 0; n < n_images; ++n)
    for (std::int64_t c = 0; c < channels; ++c)
      std::fill_n(dst + idx(n * channels + c) * stride, stride,
                  bias.empty() ? T{0} : bias[idx(c)]);
}

void check(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  constexpr int L = Simd<T>::kLanes;
  Vec<T> acc{};
  std::size_t i = 0;
  for (; i + L <= n; i += L) acc += load(a + i) * load(b + i);
  T tail{0};
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum<T>(acc) + tail;
}

template <typename T>
void conv3x3(std::span<const T> in, Shape s, std::span<const T> weight,
             std::span<const T> bias, std::int64_t cout, std::span<T> out, bool accumulate) {
  check(in.size() == s.numel(), "conv3x3: input buffer does not match shape");
  check(weight.size() == idx(cout * s.c * 9), "conv3x3: weight buffer does not match shape");
  check(out.size() == idx(s.n * cout * s.h * s.w), "conv3x3: output buffer does not match shape");
  if (s.numel() == 0 && out.empty()) return;
  const Grid g(s.h, s.w, 1, Simd<T>::kLanes * kForwardVecs);
  const auto src = to_input_grid(in.data(), s.n * s.c, g);
  std::vector<T> dst;
  if (accumulate) {
    dst = to_output_grid<T>(out.data(), s.n * cout, g);
  } else {
    dst.resize(idx(s.n * cout) * g.out_len);
    fill_bias(dst.data(), s.n, cout, g.out_len, bias);
  }
  tap_conv(src, s.n, s.c, g, weight.data(), cout, dst.data());
  from_output_grid(dst.data(), s.n * cout, g, out.data());
}

template <typename T>
void conv3x3_backward_input(std::span<const T> grad_out, Shape s, std::span<const T> weight,
                            std::int64_t cin, std::span<T> grad_in) {
  check(weight.size() == idx(s.c * cin * 9), "conv3x3_backward_input: weight mismatch");
  // Correlation with the spatially flipped, channel-transposed kernel.
  std::vector<T> flipped(weight.size());
  for (std::int64_t co = 0; co < s.c; ++co)
    for (std::int64_t ci = 0; ci < cin; ++ci)
      for (int k = 0; k < 9; ++k)
        flipped[(idx(ci) * idx(s.c) + idx(co)) * 9 + idx(k)] =
            weight[(idx(co) * idx(cin) + idx(ci)) * 9 + idx(8 - k)];
  conv3x3<T>(grad_out, s, flipped, {}, cin, grad_in, true);
}

template <typename T>
void conv3x3_backward_weight(std::span<const T> in, Shape s, std::span<const T> grad_out,
                             std::int64_t cout, std::span<T> grad_weight,
                             std::span<T> grad_bias) {
  check(grad_out.size() == idx(s.n * cout * s.h * s.w), "conv3x3_backward_weight: grad mismatch");
  check(grad_weight.size() == idx(cout * s.c * 9), "conv3x3_backward_weight: weight mismatch");
  const Grid g(s.h, s.w, 1, Simd<T>::kLanes);
  const auto src = to_input_grid(in.data(), s.n * s.c, g);
  const auto gout = to_output_grid(grad_out.data(), s.n * cout, g);
  tap_weight_grad(src, s.n, s.c, g, gout, cout, grad_weight.data());
  bias_grad(grad_out.data(), s.n, cout, s.plane(), grad_bias);
}

template <typename T>
void conv1x1(std::span<const T> in, Shape s, std::span<const T> weight,
             std::span<const T> bias, std::int64_t cout, std::span<T> out) {
  check(in.size() == s.numel(), "conv1x1: input buffer does not match shape");
  check(weight.size() == idx(cout * s.c), "conv1x1: weight buffer does not match shape");
  check(out.size() == idx(s.n * cout) * s.plane(), "conv1x1: output buffer does not match shape");
  const Grid g(s.h, s.w, 0, Simd<T>::kLanes * kForwardVecs);
  const auto src = to_input_grid(in.data(), s.n * s.c, g);
  std::vector<T> dst(idx(s.n * cout) * g.out_len);
  fill_bias(dst.data(), s.n, cout, g.out_len, bias);
  tap_conv(src, s.n, s.c, g, weight.data(), cout, dst.data());
  from_output_grid(dst.data(), s.n * cout, g, out.data());
}

template <typename T>
void conv1x1_backward_input(std::span<const T> grad_out, Shape s, std::span<const T> weight,
                            std::int64_t cin, std::span<T> grad_in) {
  check(weight.size() == idx(s.c * cin), "conv1x1_backward_input: weight mismatch");
  std::vector<T> wt(weight.size());
  for (std::int64_t co = 0; co < s.c; ++co)
    for (std::int64_t ci = 0; ci < cin; ++ci) wt[idx(ci * s.c + co)] = weight[idx(co * cin + ci)];
  const Grid g(s.h, s.w, 0, Simd<T>::kLanes * kForwardVecs);
  const auto src = to_input_grid(grad_out.data(), s.n * s.c, g);
  auto dst = to_output_grid<T>(grad_in.data(), s.n * cin, g);
  tap_conv(src, s.n, s.c, g, wt.data(), cin, dst.data());
  from_output_grid(dst.data(), s.n * cin, g, grad_in.data());
}

template <typename T>
void conv1x1_backward_weight(std::span<const T> in, Shape s, std::span<const T> grad_out,
                             std::int64_t cout, std::span<T> grad_weight,
                             std::span<T> grad_bias) {
  check(grad_weight.size() == idx(cout * s.c), "conv1x1_backward_weight: weight mismatch");
  const Grid g(s.h, s.w, 0, Simd<T>::kLanes);
  const auto src = to_input_grid(in.data(), s.n * s.c, g);
  const auto gout = to_output_grid(grad_out.data(), s.n * cout, g);
  tap_weight_grad(src, s.n, s.c, g, gout, cout, grad_weight.data());
  bias_grad(grad_out.data(), s.n, cout, s.plane(), grad_bias);
}

// The transpose convolution is a 1x1 convolution to 4*cout "phase" planes
// (co, a, b) followed by interleaving phase (a, b) into pixel (2i+a, 2j+b).
template <typename T>
void transpose_conv2(std::span<const T> in, Shape s, std::span<const T> weight,
                     std::span<const T> bias, std::int64_t cout, std::span<T> out) {
  check(weight.size() == idx(s.c * cout * 4), "transpose_conv2: weight mismatch");
  check(out.size() == idx(s.n * cout * 4) * s.plane(), "transpose_conv2: output mismatch");
  const std::int64_t phases = cout * 4;
  std::vector<T> wph(weight.size());
  for (std::int64_t ci = 0; ci < s.c; ++ci)
    for (std::int64_t q = 0; q < phases; ++q) wph[idx(q * s.c + ci)] = weight[idx(ci * phases + q)];
  std::vector<T> bph;
  if (!bias.empty()) {
    bph.resize(idx(phases));
    for (std::int64_t q = 0; q < phases; ++q) bph[idx(q)] = bias[idx(q / 4)];
  }
  std::vector<T> planes(idx(s.n * phases) * s.plane());
  conv1x1<T>(in, s, wph, bph, phases, planes);
  const std::int64_t ow = 2 * s.w;
#pragma omp parallel for schedule(static)
  for (std::int64_t nc = 0; nc < s.n * cout; ++nc) {
    T* o = out.data() + idx(nc) * 4 * s.plane();
    for (int ab = 0; ab < 4; ++ab) {
      const T* src = planes.data() + (idx(nc) * 4 + idx(ab)) * s.plane();
      const int a = ab / 2, b = ab % 2;
      for (std::int64_t i = 0; i < s.h; ++i)
        for (std::int64_t j = 0; j < s.w; ++j)
          o[idx((2 * i + a) * ow + 2 * j + b)] = src[idx(i * s.w + j)];
    }
  }
}

namespace {
template <typename T>
std::vector<T> deinterleave(std::span<const T> grad_out, Shape s) {
  const std::int64_t ih = s.h / 2, iw = s.w / 2;
  const std::size_t plane = idx(ih * iw);
  std::vector<T> planes(idx(s.n * s.c * 4) * plane);
#pragma omp parallel for schedule(static)
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc) {
    const T* g = grad_out.data() + idx(nc) * 4 * plane;
    for (int ab = 0; ab < 4; ++ab) {
      T* d = planes.data() + (idx(nc) * 4 + idx(ab)) * plane;
      const int a = ab / 2, b = ab % 2;
      for (std::int64_t i = 0; i < ih; ++i)
        for (std::int64_t j = 0; j < iw; ++j) d[idx(i * iw + j)] = g[idx((2 * i + a) * s.w + 2 * j + b)];
    }
  }
  return planes;
}
}  // namespace

template <typename T>
void transpose_conv2_backward_input(std::span<const T> grad_out, Shape s,
                                    std::span<const T> weight, std::int64_t cin,
                                    std::span<T> grad_in) {
  check(s.h % 2 == 0 && s.w % 2 == 0, "transpose_conv2_backward_input: odd output extent");
  check(weight.size() == idx(cin * s.c * 4), "transpose_conv2_backward_input: weight mismatch");
  const auto planes = deinterleave(grad_out, s);
  const Shape ps{s.n, s.c * 4, s.h / 2, s.w / 2};
  // Phase-plane 1x1 weight is [q][ci] = weight[ci][q]; its input-gradient
  // uses the transpose, i.e. the original [ci][q] layout.
  std::vector<T> wph(weight.size());
  for (std::int64_t ci = 0; ci < cin; ++ci)
    for (std::int64_t q = 0; q < ps.c; ++q) wph[idx(q * cin + ci)] = weight[idx(ci * ps.c + q)];
  conv1x1_backward_input<T>(planes, ps, wph, cin, grad_in);
}

template <typename T>
void transpose_conv2_backward_weight(std::span<const T> in, Shape s,
                                     std::span<const T> grad_out, std::int64_t cout,
                                     std::span<T> grad_weight, std::span<T> grad_bias) {
  check(grad_weight.size() == idx(s.c * cout * 4), "transpose_conv2_backward_weight: mismatch");
  const Shape os{s.n, cout, 2 * s.h, 2 * s.w};
  const auto planes = deinterleave(grad_out, os);
  const std::int64_t phases = cout * 4;
  std::vector<T> gph(idx(phases * s.c), T{0});
  conv1x1_backward_weight<T>(in, s, planes, phases, gph, {});
  for (std::int64_t ci = 0; ci < s.c; ++ci)
    for (std::int64_t q = 0; q < phases; ++q) grad_weight[idx(ci * phases + q)] += gph[idx(q * s.c + ci)];
  bias_grad(grad_out.data(), s.n, cout, os.plane(), grad_bias);
}

template <typename T>
void maxpool2(std::span<const T> in, Shape s, std::span<T> out, std::span<std::uint8_t> argmax) {
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError("maxpool2: spatial extent must be even, got " + to_string(s));
  }
  const std::int64_t oh = s.h / 2, ow = s.w / 2;
  check(out.size() == idx(s.n * s.c * oh * ow) && argmax.size() == out.size(),
        "maxpool2: output buffer mismatch");
#pragma omp parallel for schedule(static)
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc) {
    const T* src = in.data() + idx(nc) * s.plane();
    for (std::int64_t y = 0; y < oh; ++y) {
      const T* r0 = src + idx(2 * y * s.w);
      const T* r1 = r0 + s.w;
      for (std::int64_t x = 0; x < ow; ++x) {
        const T v[4] = {r0[2 * x], r0[2 * x + 1], r1[2 * x], r1[2 * x + 1]};
        int best = 0;
        for (int k = 1; k < 4; ++k)
          if (v[k] > v[best]) best = k;
        const std::size_t o = idx((nc * oh + y) * ow + x);
        out[o] = v[best];
        argmax[o] = static_cast<std::uint8_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool2_backward(std::span<const T> grad_out, Shape s, std::span<const std::uint8_t> argmax,
                       std::span<T> grad_in) {
  const std::int64_t iw = 2 * s.w;
#pragma omp parallel for schedule(static)
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc) {
    T* gi = grad_in.data() + idx(nc) * 4 * s.plane();
    for (std::int64_t y = 0; y < s.h; ++y)
      for (std::int64_t x = 0; x < s.w; ++x) {
        const std::size_t o = idx((nc * s.h + y) * s.w + x);
        const int k = argmax[o];
        gi[idx((2 * y + k / 2) * iw + 2 * x + k % 2)] += grad_out[o];
      }
  }
}

#define ROOTNET_INSTANTIATE(T)                                                             \
  template T dot<T>(const T*, const T*, std::size_t);                                      \
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
                                     std::span<const std::uint8_t>, std::span<T>);

ROOTNET_INSTANTIATE(float)
ROOTNET_INSTANTIATE(double)

#undef ROOTNET_INSTANTIATE

}  // namespace rootnet::kernels
