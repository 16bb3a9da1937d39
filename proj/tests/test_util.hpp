// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_TESTS_TEST_UTIL_HPP_
#define ROOTNET_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <random>

#include "rootnet/tensor.hpp"

namespace rootnet::testing {

template <typename T = double>
BasicTensor<T> random_tensor(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(s.numel());
  for (auto& x : v) x = static_cast<T>(u(rng));
  return BasicTensor<T>(s, std::move(v));
}

/// max|a - b| / max|b|, the normwise relative difference.
template <typename A, typename B>
double max_rel_diff(const A& a, const B& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    scale = std::max(scale, std::abs(static_cast<double>(b[i])));
  }
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace rootnet::testing

#endif  // ROOTNET_TESTS_TEST_UTIL_HPP_
