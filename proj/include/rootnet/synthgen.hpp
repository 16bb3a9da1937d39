// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Procedural minirhizotron-like imagery with exact ground truth.

#ifndef ROOTNET_SYNTHGEN_HPP_
#define ROOTNET_SYNTHGEN_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "rootnet/dataset.hpp"
#include "rootnet/image.hpp"

namespace rootnet {

using Rgb = std::array<double, 3>;

struct GenParams {
  std::int64_t height = 192;
  std::int64_t width = 192;
  int min_roots = 2;
  int max_roots = 5;
  double min_diameter = 3.0;
  double max_diameter = 7.0;
  /// Relative amplitude of the along-root diameter wobble.
  double diameter_variation = 0.2;
  /// Standard deviation of the heading change per pixel step, radians.
  double curvature = 0.05;
  /// Chance that a root gets one soil patch drawn over it.
  double occlusion_prob = 0.15;
  /// Expected bubbles per 10^4 pixels.
  double bubble_density = 1.0;
  /// Fraction of root pixels the generator aims for.
  double target_density = 1.0 / 21.0;
  Rgb soil_color{105.0, 80.0, 58.0};
  Rgb root_color{222.0, 206.0, 178.0};
  /// Lattice spacing of the coarsest soil-texture octave, pixels.
  double texture_scale = 12.0;
  double texture_amplitude = 28.0;
  double pixel_noise = 6.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError on degenerate ranges.
  void validate() const;
};

struct GeneratedImage {
  Image image;  // RGB
  Image mask;   // one channel, 0/1
};

GeneratedImage gen_root_image(const GenParams& params);

/// One thin-line skeleton pixel per root cross-section (0/1 raster).
Image skeletonize(const Image& mask);

struct Rect {
  double cx, cy;       // centre
  double ux, uy;       // unit axis
  double half_length;
  double half_width;
};

struct DegradeOptions {
  /// Half the gap left at each bend along the skeleton, pixels.
  double gap = 0.75;
  /// Polyline simplification tolerance, pixels.
  double tolerance = 1.5;
};

struct Degraded {
  Image mask;
  std::vector<Rect> rects;
};

/// Annotation-tool style labels: each root skeleton is covered by a chain of
/// constant-width rectangles, one per straight run, with gaps at bends.
Degraded degrade_with_rects(const Image& mask, const DegradeOptions& options = {});
Image degrade_to_winrhizo(const Image& mask, const DegradeOptions& options = {});

double iou(const Image& a, const Image& b);

struct LabeledPatch {
  Image image;  // RGB
  int label = 0;
};

struct ClassParams {
  /// Texture families, 2 to 4: dark soil, bright bubble field, root tubes, stripes.
  int classes = 4;
  int per_class = 64;
  std::int64_t patch = 64;
  std::uint64_t seed = 1;
};

/// Balanced, deterministic patch set ordered class-interleaved.
std::vector<LabeledPatch> gen_classification_set(const ClassParams& params);

struct DomainPairOptions {
  int source_count = 200;
  int target_count = 28;
  int target_train = 21;
  std::int64_t size = 192;
};

/// Background colour shift of the target family relative to the source.
inline constexpr Rgb kDomainColorOffset{-38.0, -30.0, -14.0};

/// Faint roots under heavy texture, noise and bubbles. The target family adds
/// the colour offset and a finer soil texture.
GenParams source_family(std::uint64_t seed, std::int64_t size = 192);
GenParams target_family(std::uint64_t seed, std::int64_t size = 192);

struct DomainPair {
  SampleSet source;
  SampleSet target;
  SampleSet target_train;
  SampleSet target_eval;
};

DomainPair gen_domain_pair(std::uint64_t seed_a, std::uint64_t seed_b,
                           const DomainPairOptions& options = {});

/// `count` images from `base` with per-image seeds derived from base.seed.
SampleSet gen_sample_set(const GenParams& base, int count, const std::string& prefix);

}  // namespace rootnet

#endif  // ROOTNET_SYNTHGEN_HPP_
