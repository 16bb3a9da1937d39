// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rootnet {

namespace {

struct Eval {
  double value;
  std::uint64_t kinks;
};

Eval evaluate(const GradCheckFn& fn, std::vector<TensorD>& inputs) {
  Tape<double> tape(true);
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (auto& in : inputs) vars.push_back(tape.param(in));
  const Var root = fn(tape, vars);
  return {tape.scalar(root), tape.kink_signature()};
}

}  // namespace

GradCheckReport grad_check(const GradCheckFn& fn, std::vector<TensorD>& inputs,
                           const GradCheckOptions& options) {
  for (auto& in : inputs) in.clear_grad();
  std::uint64_t base_kinks = 0;
  {
    Tape<double> tape(true);
    std::vector<Var> vars;
    for (auto& in : inputs) vars.push_back(tape.param(in));
    const Var root = fn(tape, vars);
    base_kinks = tape.kink_signature();
    tape.backward(root);
  }
  std::vector<std::vector<double>> analytic;
  for (auto& in : inputs) {
    analytic.emplace_back(in.size(), 0.0);
    if (in.has_grad()) std::copy(in.grad().begin(), in.grad().end(), analytic.back().begin());
    in.clear_grad();
  }

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<std::size_t> coords(inputs[k].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords);
    }
    for (const std::size_t i : coords) {
      double& x = inputs[k].data()[i];
      const double saved = x;
      x = saved + options.eps;
      const Eval plus = evaluate(fn, inputs);
      x = saved - options.eps;
      const Eval minus = evaluate(fn, inputs);
      x = saved;
      if (plus.kinks != base_kinks || minus.kinks != base_kinks) {
        ++report.skipped;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * options.eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = "input " + std::to_string(k) + " index " + std::to_string(i) +
                       ": analytic " + std::to_string(a) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return report;
}

}  // namespace rootnet
