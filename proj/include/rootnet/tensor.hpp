// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_TENSOR_HPP_
#define ROOTNET_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rootnet/errors.hpp"

namespace rootnet {

/// NCHW extent of a dense tensor.
struct Shape {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  constexpr std::size_t numel() const {
    return static_cast<std::size_t>(n * c * h * w);
  }
  constexpr std::size_t plane() const { return static_cast<std::size_t>(h * w); }

  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense row-major N x C x H x W array with an optional gradient slot.
///
/// The gradient is absent until first requested through `grad()` or
/// `ensure_grad()`, and is released by `clear_grad()`.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{0})
      : shape_(validated(shape)), data_(shape.numel(), fill) {}
  BasicTensor(Shape shape, std::vector<T> data)
      : shape_(validated(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) {
    return data_[offset(n, c, y, x)];
  }
  const T& at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
    return data_[offset(n, c, y, x)];
  }

  bool has_grad() const { return has_grad_; }
  /// Allocates a zero gradient if none is present.
  std::span<T> ensure_grad() {
    if (!has_grad_) {
      grad_.assign(data_.size(), T{0});
      has_grad_ = true;
    }
    return grad_;
  }
  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }
  void clear_grad() {
    grad_.clear();
    grad_.shrink_to_fit();
    has_grad_ = false;
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static Shape validated(Shape s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
      throw ShapeError("negative tensor extent " + to_string(s));
    }
    return s;
  }
  std::size_t offset(std::int64_t n, std::int64_t c, std::int64_t y,
                     std::int64_t x) const {
    return static_cast<std::size_t>(((n * shape_.c + c) * shape_.h + y) * shape_.w + x);
  }

  Shape shape_{};
  std::vector<T> data_;
  std::vector<T> grad_;
  bool has_grad_ = false;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Element-type conversion; the gradient is not carried over.
template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& src) {
  std::vector<To> out(src.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<To>(src.data()[i]);
  return BasicTensor<To>(src.shape(), std::move(out));
}

/// True when every element is finite.
template <typename T>
bool all_finite(std::span<const T> v);

}  // namespace rootnet

#endif  // ROOTNET_TENSOR_HPP_
