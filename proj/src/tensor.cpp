// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/tensor.hpp"

#include <cmath>

namespace rootnet {

std::string to_string(const Shape& s) {
  return "[" + std::to_string(s.n) + "x" + std::to_string(s.c) + "x" + std::to_string(s.h) +
         "x" + std::to_string(s.w) + "]";
}

template <typename T>
bool all_finite(std::span<const T> v) {
  for (const T x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

template bool all_finite<float>(std::span<const float>);
template bool all_finite<double>(std::span<const double>);

}  // namespace rootnet
