// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_IMAGE_HPP_
#define ROOTNET_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rootnet/tensor.hpp"

namespace rootnet {

/// 8-bit raster, interleaved channels (row-major, HWC).
struct Image {
  std::int64_t height = 0;
  std::int64_t width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(std::int64_t h, std::int64_t w, int c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h * w * c), fill) {}

  std::size_t pixels() const { return static_cast<std::size_t>(height * width); }
  std::uint8_t& at(std::int64_t y, std::int64_t x, int c = 0) {
    return data[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  std::uint8_t at(std::int64_t y, std::int64_t x, int c = 0) const {
    return data[static_cast<std::size_t>((y * width + x) * channels + c)];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Reads any 8/16-bit PNG and returns 8-bit gray (1 channel) or RGB
/// (3 channels). Alpha is dropped; palettes are expanded.
Image read_png(const std::filesystem::path& path);
/// Writes 1-channel images as gray and 3-channel images as RGB.
void write_png(const std::filesystem::path& path, const Image& image);

/// 16-bit grayscale, used for superpixel label maps.
void write_png16(const std::filesystem::path& path, std::int64_t height, std::int64_t width,
                 const std::vector<std::uint16_t>& values);
std::vector<std::uint16_t> read_png16(const std::filesystem::path& path, std::int64_t& height,
                                      std::int64_t& width);

/// RGB image to a [1, 3, H, W] network input, value / 255 - 0.5.
Tensor image_to_tensor(const Image& rgb);
/// Writes one RGB image into slot `n` of a [N, 3, H, W] batch.
void image_into_batch(const Image& rgb, Tensor& batch, std::int64_t n);

}  // namespace rootnet

#endif  // ROOTNET_IMAGE_HPP_
