// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiation over the ops in ops.hpp.
//
// A Tape records every value produced during a forward pass. Parameters are
// registered as leaves that alias caller-owned tensors; their gradients are
// accumulated straight into the tensor's grad slot. backward() walks the tape
// in reverse and releases each intermediate as soon as it can no longer be
// read.
//
// Eager runs the same op surface without recording, for inference.

#ifndef ROOTNET_TAPE_HPP_
#define ROOTNET_TAPE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rootnet/ops.hpp"
#include "rootnet/tensor.hpp"

namespace rootnet {

struct Var {
  std::int32_t id = -1;
};

template <typename T>
class Tape {
 public:
  using Value = Var;
  using Param = Var;

  /// With `track_kinks`, ReLU sign patterns and pooling argmax choices are
  /// folded into kink_signature().
  explicit Tape(bool track_kinks = false) : track_kinks_(track_kinks) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf aliasing `p`. `p` must outlive the tape.
  Var param(BasicTensor<T>& p);
  /// Leaf without gradient.
  Var constant(BasicTensor<T> v);

  Var conv3x3(Var x, Var weight, Var bias);
  Var conv1x1(Var x, Var weight, Var bias);
  Var relu(Var x);
  Var maxpool2(Var x);
  Var transpose_conv2(Var x, Var weight, Var bias);
  Var concat(Var a, Var b);
  Var sigmoid(Var x);
  Var pad_bottom_right(Var x, std::int64_t height, std::int64_t width);
  Var crop_top_left(Var x, std::int64_t height, std::int64_t width);
  Var global_avg_pool(Var x);

  /// Scalar losses, shape [1,1,1,1].
  Var weighted_bce(Var logits, const BasicTensor<T>& target, T pos_weight);
  Var softmax_cross_entropy(Var logits, std::vector<int> labels);
  /// <x, r>: a scalar probe used by gradient checks.
  Var project(Var x, const BasicTensor<T>& r);

  const BasicTensor<T>& value(Var v) const;
  Shape shape(Var v) const { return value(v).shape(); }
  /// Value of a scalar node in double precision, as computed by the loss.
  double scalar(Var v) const;

  /// Seeds d(root)/d(root) = 1 and propagates to every parameter leaf.
  /// Intermediate values are released; only scalar() stays readable.
  void backward(Var root);

  /// Hash of every ReLU sign pattern and pooling argmax recorded so far.
  std::uint64_t kink_signature() const { return kinks_; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    BasicTensor<T> value;
    BasicTensor<T>* param = nullptr;
    std::vector<T> grad;
    bool needs_grad = false;
    double scalar = 0.0;
    bool is_scalar = false;
    std::function<void(Tape&, Node&)> backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(BasicTensor<T> value, bool needs_grad, std::function<void(Tape&, Node&)> bw);
  bool needs(Var v) const { return node(v).needs_grad; }
  /// Gradient buffer of an input, allocated as zeros on first use.
  std::span<T> grad_of(Var v);
  void mix(std::span<const std::uint8_t> bytes);

  std::vector<Node> nodes_;
  bool track_kinks_;
  std::uint64_t kinks_ = 1469598103934665603ULL;  // FNV offset basis
};

/// Forward-only executor sharing the Tape op surface.
template <typename T>
class Eager {
 public:
  using Value = BasicTensor<T>;
  using Param = const BasicTensor<T>*;

  Param param(const BasicTensor<T>& p) const { return &p; }
  Shape shape(const Value& v) const { return v.shape(); }

  Value conv3x3(const Value& x, Param w, Param b) const { return ops::conv2d(x, *w, *b); }
  Value conv1x1(const Value& x, Param w, Param b) const { return ops::conv1x1(x, *w, *b); }
  Value relu(Value x) const;
  Value maxpool2(const Value& x) const { return ops::maxpool2(x).output; }
  Value transpose_conv2(const Value& x, Param w, Param b) const {
    return ops::transpose_conv2(x, *w, *b);
  }
  Value concat(const Value& a, const Value& b) const { return ops::concat_channels(a, b); }
  Value sigmoid(Value x) const;
  Value pad_bottom_right(const Value& x, std::int64_t h, std::int64_t w) const {
    return ops::pad_bottom_right(x, h, w);
  }
  Value crop_top_left(const Value& x, std::int64_t h, std::int64_t w) const {
    return ops::crop_top_left(x, h, w);
  }
  Value global_avg_pool(const Value& x) const { return ops::global_avg_pool(x); }
};

}  // namespace rootnet

#endif  // ROOTNET_TAPE_HPP_
