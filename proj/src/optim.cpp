// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/optim.hpp"

#include <cmath>

namespace rootnet {

template <typename T>
OptState<T>::OptState(T lr_, T momentum_) : lr(lr_), momentum(momentum_) {
  if (!(lr > T{0}) || !std::isfinite(lr)) throw ValidationError("optimizer: lr must be positive");
  if (!(momentum >= T{0} && momentum < T{1})) {
    throw ValidationError("optimizer: momentum must lie in [0, 1)");
  }
}

template <typename T>
void sgd_momentum_step(BasicTensor<T>& param, OptState<T>& state) {
  if (!param.has_grad()) throw UsageError("sgd_momentum_step: parameter has no gradient");
  if (state.velocity.empty()) state.velocity.assign(param.size(), T{0});
  if (state.velocity.size() != param.size()) {
    throw UsageError("sgd_momentum_step: velocity does not match parameter " +
                     to_string(param.shape()));
  }
  const auto g = param.grad();
  auto p = param.data();
  T* v = state.velocity.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = state.momentum * v[i] + g[i];
    p[i] -= state.lr * v[i];
  }
  param.clear_grad();
}

template struct OptState<float>;
template struct OptState<double>;
template void sgd_momentum_step<float>(BasicTensor<float>&, OptState<float>&);
template void sgd_momentum_step<double>(BasicTensor<double>&, OptState<double>&);

}  // namespace rootnet
