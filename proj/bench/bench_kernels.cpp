// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Parallel kernels versus the serial reference loops. Run with
// OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rootnet/kernels.hpp"
#include "rootnet/metrics.hpp"
#include "rootnet/reference.hpp"

namespace {

using rootnet::Shape;

std::vector<float> random_buffer(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Args: cin, cout, side.
void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({3, 8, 192})->Args({8, 8, 192})->Args({16, 16, 96})->Args({64, 64, 24})
      ->Args({128, 128, 12});
}

template <bool Parallel>
void BM_Conv3x3Forward(benchmark::State& state) {
  const Shape s{2, state.range(0), state.range(2), state.range(2)};
  const std::int64_t cout = state.range(1);
  const auto in = random_buffer(s.numel(), 1);
  const auto w = random_buffer(static_cast<std::size_t>(cout * s.c * 9), 2);
  const auto b = random_buffer(static_cast<std::size_t>(cout), 3);
  std::vector<float> out(static_cast<std::size_t>(s.n * cout) * s.plane());
  for (auto _ : state) {
    if constexpr (Parallel) {
      rootnet::kernels::conv3x3<float>(in, s, w, b, cout, out);
    } else {
      rootnet::reference::conv3x3<float>(in, s, w, b, cout, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  const double flops = 2.0 * static_cast<double>(s.n * cout * s.c * 9) * static_cast<double>(s.plane());
  state.counters["GFLOPS"] = benchmark::Counter(flops * 1e-9, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3x3Forward<true>)->Apply(conv_args)->Name("conv3x3_forward/omp");
BENCHMARK(BM_Conv3x3Forward<false>)->Apply(conv_args)->Name("conv3x3_forward/serial_ref");

template <bool Parallel>
void BM_Conv3x3BackwardWeight(benchmark::State& state) {
  const Shape s{2, state.range(0), state.range(2), state.range(2)};
  const std::int64_t cout = state.range(1);
  const auto in = random_buffer(s.numel(), 1);
  const auto g = random_buffer(static_cast<std::size_t>(s.n * cout) * s.plane(), 2);
  std::vector<float> gw(static_cast<std::size_t>(cout * s.c * 9));
  std::vector<float> gb(static_cast<std::size_t>(cout));
  for (auto _ : state) {
    if constexpr (Parallel) {
      rootnet::kernels::conv3x3_backward_weight<float>(in, s, g, cout, gw, gb);
    } else {
      rootnet::reference::conv3x3_backward_weight<float>(in, s, g, cout, gw, gb);
    }
    benchmark::DoNotOptimize(gw.data());
  }
  const double flops = 2.0 * static_cast<double>(s.n * cout * s.c * 9) * static_cast<double>(s.plane());
  state.counters["GFLOPS"] = benchmark::Counter(flops * 1e-9, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3x3BackwardWeight<true>)->Apply(conv_args)->Name("conv3x3_backward_weight/omp");
BENCHMARK(BM_Conv3x3BackwardWeight<false>)->Apply(conv_args)->Name("conv3x3_backward_weight/serial_ref");

template <bool Parallel>
void BM_Conv3x3BackwardInput(benchmark::State& state) {
  const Shape in_shape{2, state.range(0), state.range(2), state.range(2)};
  const std::int64_t cout = state.range(1);
  const Shape s{in_shape.n, cout, in_shape.h, in_shape.w};
  const auto g = random_buffer(s.numel(), 1);
  const auto w = random_buffer(static_cast<std::size_t>(cout * in_shape.c * 9), 2);
  std::vector<float> gi(in_shape.numel());
  for (auto _ : state) {
    if constexpr (Parallel) {
      rootnet::kernels::conv3x3_backward_input<float>(g, s, w, in_shape.c, gi);
    } else {
      rootnet::reference::conv3x3_backward_input<float>(g, s, w, in_shape.c, gi);
    }
    benchmark::DoNotOptimize(gi.data());
  }
  const double flops = 2.0 * static_cast<double>(s.n * cout * in_shape.c * 9) * static_cast<double>(s.plane());
  state.counters["GFLOPS"] = benchmark::Counter(flops * 1e-9, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3x3BackwardInput<true>)->Apply(conv_args)->Name("conv3x3_backward_input/omp");
BENCHMARK(BM_Conv3x3BackwardInput<false>)->Apply(conv_args)->Name("conv3x3_backward_input/serial_ref");

template <bool Parallel>
void BM_TransposeConv2(benchmark::State& state) {
  const Shape s{2, state.range(0), state.range(2), state.range(2)};
  const std::int64_t cout = state.range(1);
  const auto in = random_buffer(s.numel(), 1);
  const auto w = random_buffer(static_cast<std::size_t>(s.c * cout * 4), 2);
  const auto b = random_buffer(static_cast<std::size_t>(cout), 3);
  std::vector<float> out(static_cast<std::size_t>(s.n * cout * 4) * s.plane());
  for (auto _ : state) {
    if constexpr (Parallel) {
      rootnet::kernels::transpose_conv2<float>(in, s, w, b, cout, out);
    } else {
      rootnet::reference::transpose_conv2<float>(in, s, w, b, cout, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_TransposeConv2<true>)->Args({16, 8, 96})->Args({128, 64, 12})->Name("transpose_conv2/omp");
BENCHMARK(BM_TransposeConv2<false>)->Args({16, 8, 96})->Args({128, 64, 12})->Name("transpose_conv2/serial_ref");

void BM_HistogramAccumulate(benchmark::State& state) {
  const std::size_t n = 1 << 22;
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(rng);
    labels[i] = u(rng) < 0.05f;
  }
  rootnet::ScoreHistogram h(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    h.accumulate(scores, labels);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_HistogramAccumulate)->Arg(4096)->Arg(65536)->Name("histogram_accumulate");

}  // namespace

BENCHMARK_MAIN();
