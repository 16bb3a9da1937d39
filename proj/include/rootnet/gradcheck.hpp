// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_GRADCHECK_HPP_
#define ROOTNET_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rootnet/tape.hpp"

namespace rootnet {

struct GradCheckOptions {
  double eps = 1e-4;
  /// Coordinates sampled per input; inputs at most this large are checked in full.
  std::size_t max_coords = 64;
  std::uint64_t seed = 1;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose perturbation moved a ReLU or pooling decision.
  std::size_t skipped = 0;
  std::string worst;
};

/// Builds a scalar from the registered inputs.
using GradCheckFn = std::function<Var(Tape<double>&, std::span<const Var>)>;

/// Central differences against the tape's analytic gradient. Relative error
/// is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const GradCheckFn& fn, std::vector<TensorD>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace rootnet

#endif  // ROOTNET_GRADCHECK_HPP_
