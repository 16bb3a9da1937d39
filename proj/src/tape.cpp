// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/tape.hpp"

#include <algorithm>
#include <utility>

#include "rootnet/hash.hpp"
#include "rootnet/kernels.hpp"

namespace rootnet {

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw UsageError("tape: variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw UsageError("tape: variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
Var Tape<T>::push(BasicTensor<T> value, bool needs_grad,
                  std::function<void(Tape&, Node&)> bw) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(bw);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
std::span<T> Tape<T>::grad_of(Var v) {
  Node& n = node(v);
  if (n.param) return n.param->ensure_grad();
  if (n.grad.empty()) n.grad.assign(n.value.size(), T{0});
  return n.grad;
}

template <typename T>
void Tape<T>::mix(std::span<const std::uint8_t> bytes) {
  for (const std::uint8_t b : bytes) kinks_ = (kinks_ ^ b) * kFnvPrime;
  kinks_ = (kinks_ ^ 0xffu) * kFnvPrime;
}

template <typename T>
const BasicTensor<T>& Tape<T>::value(Var v) const {
  const Node& n = node(v);
  return n.param ? *n.param : n.value;
}

template <typename T>
double Tape<T>::scalar(Var v) const {
  const Node& n = node(v);
  if (!n.is_scalar) throw UsageError("tape: scalar() on a non-scalar node");
  return n.scalar;
}

template <typename T>
Var Tape<T>::param(BasicTensor<T>& p) {
  Node n;
  n.param = &p;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::constant(BasicTensor<T> v) {
  return push(std::move(v), false, {});
}

template <typename T>
Var Tape<T>::conv3x3(Var x, Var w, Var b) {
  auto out = ops::conv2d(value(x), value(w), value(b));
  const bool g = needs(x) || needs(w) || needs(b);
  return push(std::move(out), g, [x, w, b](Tape& t, Node& self) {
    const BasicTensor<T>& in = t.value(x);
    const BasicTensor<T>& wt = t.value(w);
    const Shape os = self.value.shape();
    if (t.needs(w) || t.needs(b)) {
      std::span<T> gb = t.needs(b) ? t.grad_of(b) : std::span<T>{};
      std::span<T> gw = t.grad_of(w);
      kernels::conv3x3_backward_weight<T>(in.data(), in.shape(), self.grad, os.c, gw, gb);
    }
    if (t.needs(x)) {
      kernels::conv3x3_backward_input<T>(self.grad, os, wt.data(), in.shape().c, t.grad_of(x));
    }
  });
}

template <typename T>
Var Tape<T>::conv1x1(Var x, Var w, Var b) {
  auto out = ops::conv1x1(value(x), value(w), value(b));
  const bool g = needs(x) || needs(w) || needs(b);
  return push(std::move(out), g, [x, w, b](Tape& t, Node& self) {
    const BasicTensor<T>& in = t.value(x);
    const BasicTensor<T>& wt = t.value(w);
    const Shape os = self.value.shape();
    if (t.needs(w) || t.needs(b)) {
      std::span<T> gb = t.needs(b) ? t.grad_of(b) : std::span<T>{};
      std::span<T> gw = t.grad_of(w);
      kernels::conv1x1_backward_weight<T>(in.data(), in.shape(), self.grad, os.c, gw, gb);
    }
    if (t.needs(x)) {
      kernels::conv1x1_backward_input<T>(self.grad, os, wt.data(), in.shape().c, t.grad_of(x));
    }
  });
}

template <typename T>
Var Tape<T>::relu(Var x) {
  auto out = ops::relu(value(x));
  if (track_kinks_) {
    std::vector<std::uint8_t> sign(out.size());
    const auto in = value(x).data();
    for (std::size_t i = 0; i < sign.size(); ++i) sign[i] = in[i] > T{0};
    mix(sign);
  }
  return push(std::move(out), needs(x), [x](Tape& t, Node& self) {
    auto gi = t.grad_of(x);
    const auto o = self.value.data();
    for (std::size_t i = 0; i < gi.size(); ++i)
      if (o[i] > T{0}) gi[i] += self.grad[i];
  });
}

template <typename T>
Var Tape<T>::maxpool2(Var x) {
  auto r = ops::maxpool2(value(x));
  if (track_kinks_) mix(r.argmax);
  return push(std::move(r.output), needs(x),
              [x, argmax = std::move(r.argmax)](Tape& t, Node& self) {
                kernels::maxpool2_backward<T>(self.grad, self.value.shape(), argmax,
                                              t.grad_of(x));
              });
}

template <typename T>
Var Tape<T>::transpose_conv2(Var x, Var w, Var b) {
  auto out = ops::transpose_conv2(value(x), value(w), value(b));
  const bool g = needs(x) || needs(w) || needs(b);
  return push(std::move(out), g, [x, w, b](Tape& t, Node& self) {
    const BasicTensor<T>& in = t.value(x);
    const BasicTensor<T>& wt = t.value(w);
    const Shape os = self.value.shape();
    if (t.needs(w) || t.needs(b)) {
      std::span<T> gb = t.needs(b) ? t.grad_of(b) : std::span<T>{};
      std::span<T> gw = t.grad_of(w);
      kernels::transpose_conv2_backward_weight<T>(in.data(), in.shape(), self.grad, os.c, gw, gb);
    }
    if (t.needs(x)) {
      kernels::transpose_conv2_backward_input<T>(self.grad, os, wt.data(), in.shape().c,
                                                 t.grad_of(x));
    }
  });
}

template <typename T>
Var Tape<T>::concat(Var a, Var b) {
  auto out = ops::concat_channels(value(a), value(b));
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, Node& self) {
    const Shape sa = t.value(a).shape();
    const Shape sb = t.value(b).shape();
    const std::size_t pa = static_cast<std::size_t>(sa.c) * sa.plane();
    const std::size_t pb = static_cast<std::size_t>(sb.c) * sb.plane();
    const T* g = self.grad.data();
    for (std::int64_t n = 0; n < sa.n; ++n) {
      const T* src = g + static_cast<std::size_t>(n) * (pa + pb);
      if (t.needs(a)) {
        T* d = t.grad_of(a).data() + static_cast<std::size_t>(n) * pa;
        for (std::size_t i = 0; i < pa; ++i) d[i] += src[i];
      }
      if (t.needs(b)) {
        T* d = t.grad_of(b).data() + static_cast<std::size_t>(n) * pb;
        for (std::size_t i = 0; i < pb; ++i) d[i] += src[pa + i];
      }
    }
  });
}

template <typename T>
Var Tape<T>::sigmoid(Var x) {
  auto out = ops::sigmoid(value(x));
  return push(std::move(out), needs(x), [x](Tape& t, Node& self) {
    auto gi = t.grad_of(x);
    const auto s = self.value.data();
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += self.grad[i] * s[i] * (T{1} - s[i]);
  });
}

template <typename T>
Var Tape<T>::pad_bottom_right(Var x, std::int64_t height, std::int64_t width) {
  auto out = ops::pad_bottom_right(value(x), height, width);
  return push(std::move(out), needs(x), [x](Tape& t, Node& self) {
    const Shape s = t.value(x).shape();
    const Shape ps = self.value.shape();
    auto gi = t.grad_of(x);
    for (std::int64_t nc = 0; nc < s.n * s.c; ++nc)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t xx = 0; xx < s.w; ++xx)
          gi[static_cast<std::size_t>((nc * s.h + y) * s.w + xx)] +=
              self.grad[static_cast<std::size_t>((nc * ps.h + y) * ps.w + xx)];
  });
}

template <typename T>
Var Tape<T>::crop_top_left(Var x, std::int64_t height, std::int64_t width) {
  auto out = ops::crop_top_left(value(x), height, width);
  return push(std::move(out), needs(x), [x](Tape& t, Node& self) {
    const Shape s = t.value(x).shape();
    const Shape cs = self.value.shape();
    auto gi = t.grad_of(x);
    for (std::int64_t nc = 0; nc < s.n * s.c; ++nc)
      for (std::int64_t y = 0; y < cs.h; ++y)
        for (std::int64_t xx = 0; xx < cs.w; ++xx)
          gi[static_cast<std::size_t>((nc * s.h + y) * s.w + xx)] +=
              self.grad[static_cast<std::size_t>((nc * cs.h + y) * cs.w + xx)];
  });
}

template <typename T>
Var Tape<T>::global_avg_pool(Var x) {
  auto out = ops::global_avg_pool(value(x));
  return push(std::move(out), needs(x), [x](Tape& t, Node& self) {
    const Shape s = t.value(x).shape();
    const std::size_t plane = s.plane();
    if (plane == 0) return;
    auto gi = t.grad_of(x);
    for (std::int64_t nc = 0; nc < s.n * s.c; ++nc) {
      const T g = self.grad[static_cast<std::size_t>(nc)] / static_cast<T>(plane);
      T* d = gi.data() + static_cast<std::size_t>(nc) * plane;
      for (std::size_t i = 0; i < plane; ++i) d[i] += g;
    }
  });
}

template <typename T>
Var Tape<T>::weighted_bce(Var logits, const BasicTensor<T>& target, T pos_weight) {
  const double loss = ops::weighted_bce(value(logits), target, pos_weight);
  Var v = push(BasicTensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(loss)), needs(logits),
               [logits, target, pos_weight](Tape& t, Node& self) {
                 ops::weighted_bce_grad(t.value(logits), target, pos_weight, self.grad[0],
                                        t.grad_of(logits));
               });
  node(v).scalar = loss;
  node(v).is_scalar = true;
  return v;
}

template <typename T>
Var Tape<T>::softmax_cross_entropy(Var logits, std::vector<int> labels) {
  const double loss = ops::softmax_cross_entropy<T>(value(logits), labels);
  Var v = push(BasicTensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(loss)), needs(logits),
               [logits, labels = std::move(labels)](Tape& t, Node& self) {
                 ops::softmax_cross_entropy_grad<T>(t.value(logits), labels, self.grad[0],
                                                    t.grad_of(logits));
               });
  node(v).scalar = loss;
  node(v).is_scalar = true;
  return v;
}

template <typename T>
Var Tape<T>::project(Var x, const BasicTensor<T>& r) {
  const BasicTensor<T>& xv = value(x);
  if (xv.shape() != r.shape()) {
    throw ShapeError("project: " + to_string(xv.shape()) + " vs " + to_string(r.shape()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    acc += static_cast<double>(xv.data()[i]) * static_cast<double>(r.data()[i]);
  }
  Var v = push(BasicTensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(acc)), needs(x),
               [x, r](Tape& t, Node& self) {
                 auto gi = t.grad_of(x);
                 for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += self.grad[0] * r.data()[i];
               });
  node(v).scalar = acc;
  node(v).is_scalar = true;
  return v;
}

template <typename T>
void Tape<T>::backward(Var root) {
  Node& r = node(root);
  if (!r.is_scalar) throw UsageError("backward: root must be a scalar loss");
  if (!r.needs_grad) return;
  r.grad.assign(1, T{1});
  for (std::size_t i = static_cast<std::size_t>(root.id) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, n);
    // Every later node has already run, so nothing can read this one again.
    if (!n.param) {
      n.value = BasicTensor<T>();
      n.grad.clear();
      n.grad.shrink_to_fit();
    }
    n.backward = nullptr;
  }
}

template <typename T>
typename Eager<T>::Value Eager<T>::relu(Value x) const {
  for (T& v : x.data()) v = v > T{0} ? v : T{0};
  return x;
}

template <typename T>
typename Eager<T>::Value Eager<T>::sigmoid(Value x) const {
  for (T& v : x.data()) v = ops::stable_sigmoid(v);
  return x;
}

template class Tape<float>;
template class Tape<double>;
template class Eager<float>;
template class Eager<double>;

}  // namespace rootnet
