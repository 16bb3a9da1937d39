// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_OPTIM_HPP_
#define ROOTNET_OPTIM_HPP_

#include <vector>

#include "rootnet/tensor.hpp"

namespace rootnet {

/// Classical momentum buffer for one parameter.
template <typename T>
struct OptState {
  std::vector<T> velocity;
  T lr{};
  T momentum{};

  OptState(T lr_, T momentum_);
};

/// v <- momentum * v + grad; param <- param - lr * v; then clears the grad.
/// Throws UsageError when the parameter carries no gradient.
template <typename T>
void sgd_momentum_step(BasicTensor<T>& param, OptState<T>& state);

}  // namespace rootnet

#endif  // ROOTNET_OPTIM_HPP_
