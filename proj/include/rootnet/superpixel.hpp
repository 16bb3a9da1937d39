// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// SLIC superpixels and superpixel-level mask rasterization.

#ifndef ROOTNET_SUPERPIXEL_HPP_
#define ROOTNET_SUPERPIXEL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rootnet/image.hpp"

namespace rootnet {

struct SlicParams {
  int target_size = 100;
  double compactness = 10.0;
  int iterations = 10;

  /// Throws ConfigError.
  void validate() const;
};

struct SuperpixelStats {
  std::int64_t pixels = 0;
  double cx = 0.0;  // pixel-centre coordinates, x + 0.5
  double cy = 0.0;
  std::array<double, 3> color{};  // mean RGB; zero until attach_colors
};

struct SuperpixelMap {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::int32_t count = 0;
  std::vector<std::int32_t> labels;  // row-major, 0..count-1
  std::vector<SuperpixelStats> stats;

  std::int32_t at(std::int64_t y, std::int64_t x) const {
    return labels[static_cast<std::size_t>(y * width + x)];
  }
};

/// Compacts arbitrary labels (first appearance in raster order gets id 0) and
/// fills pixel counts and centroids.
SuperpixelMap make_superpixel_map(std::int64_t height, std::int64_t width,
                                  const std::vector<std::int32_t>& labels);
void attach_colors(SuperpixelMap& map, const Image& image);

/// sRGB (0..255) to CIE L*a*b* under D65.
std::array<double, 3> rgb_to_lab(double r, double g, double b);

SuperpixelMap slic(const Image& image, const SlicParams& params = {});

/// Splits every id into its 4-connected components, then merges components
/// smaller than `min_size` into their largest neighbour.
SuperpixelMap enforce_connectivity(const SuperpixelMap& map, std::int64_t min_size = 0);

/// Root iff at least half of the superpixel's pixels are nonzero in `mask`.
Image snap_mask(const Image& mask, const SuperpixelMap& map);

/// 16-bit PNG when count <= 65535, else the raw format below. Returns the
/// path written, which gets a ".rnlabels" extension in the raw case.
std::filesystem::path save_label_map(const std::filesystem::path& path, const SuperpixelMap& map);
/// Raw: "RNLABEL1", u64 height, u64 width, then u32 labels, all little-endian.
void save_label_map_raw(const std::filesystem::path& path, const SuperpixelMap& map);
/// Detects the format from the file's magic bytes.
SuperpixelMap load_label_map(const std::filesystem::path& path);

}  // namespace rootnet

#endif  // ROOTNET_SUPERPIXEL_HPP_
