// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Labeled image collections: on-disk layout, stratified splits, tiling and
// class-imbalance weighting.
//
// Layout of a sample-set directory:
//   images/<id>.png   8-bit RGB
//   masks/<id>.png    8-bit gray, 0 = soil, 255 = root
//   strata.csv        id,date,tube,depth

#ifndef ROOTNET_DATASET_HPP_
#define ROOTNET_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rootnet/image.hpp"

namespace rootnet {

struct SampleRecord {
  std::string id;
  Image image;  // RGB
  Image mask;   // one channel, values 0/1
  std::string date;
  std::string tube;
  std::string depth;

  std::string stratum() const { return date + '\x1f' + tube + '\x1f' + depth; }
  /// Throws ValidationError unless image and mask agree and the mask is binary.
  void validate() const;
};

using SampleSet = std::vector<SampleRecord>;

SampleSet load_sample_set(const std::filesystem::path& dir);
void save_sample_set(const std::filesystem::path& dir, const SampleSet& set);

struct Split {
  SampleSet train;
  SampleSet test;
};

/// Within each stratum, ceil(train_frac * n) samples go to train. Strata are
/// visited in order of first appearance; members are drawn by a seeded shuffle
/// and keep their input order within each side.
Split stratified_split(const SampleSet& samples, double train_frac, std::uint64_t seed);

/// Non-overlapping row-major tiles named <id>_r<r>c<c>. Throws ValidationError
/// when the extent is not divisible by the grid.
SampleSet tile_image(const SampleRecord& sample, int grid_rows = 5, int grid_cols = 3);

struct PosWeight {
  double value = 0.0;
  std::size_t used = 0;
  /// Masks without root pixels, left out of the median.
  std::size_t excluded = 0;
};

/// Median over masks of (soil pixels / root pixels).
PosWeight compute_pos_weight(const std::vector<const Image*>& masks);
PosWeight compute_pos_weight(const SampleSet& set);

/// Stacks samples [begin, end) into a [n, 3, H, W] input and [n, 1, H, W]
/// target. Throws ShapeError when extents differ.
void make_batch(const SampleSet& set, const std::vector<std::size_t>& order, std::size_t begin,
                std::size_t end, Tensor& input, Tensor& target);

}  // namespace rootnet

#endif  // ROOTNET_DATASET_HPP_
