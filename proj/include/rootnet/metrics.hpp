// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Streaming pixel-level ROC/PR evaluation.
//
// Bin b of a histogram with B bins holds scores in [b/B, (b+1)/B); the last
// bin also holds 1.0. Thresholds live on bin edges: edge b (0 <= b < B) is
// b/B, and edge B is the smallest double above 1.0. A pixel is predicted
// positive at edge b iff its score >= edge b, which is exactly "its bin >= b".

#ifndef ROOTNET_METRICS_HPP_
#define ROOTNET_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rootnet {

inline constexpr std::size_t kDefaultBins = 65536;

class ScoreHistogram {
 public:
  explicit ScoreHistogram(std::size_t bins = kDefaultBins);

  std::size_t bins() const { return bins_; }

  /// Scores must lie in [0, 1] and labels in {0, 1}; throws ValidationError
  /// before touching any counter otherwise.
  void accumulate(std::span<const float> scores, std::span<const std::uint8_t> labels);
  void accumulate(std::span<const float> scores, std::span<const float> labels);
  void add(double score, bool positive);

  std::size_t bin_of(double score) const;
  /// Threshold value of edge b, 0 <= b <= B.
  double edge(std::size_t b) const;

  std::uint64_t pos(std::size_t b) const { return counts_[2 * b + 1]; }
  std::uint64_t neg(std::size_t b) const { return counts_[2 * b]; }
  std::uint64_t total_pos() const;
  std::uint64_t total_neg() const;

  friend bool operator==(const ScoreHistogram&, const ScoreHistogram&) = default;
  friend ScoreHistogram merge(const ScoreHistogram& a, const ScoreHistogram& b);

 private:
  std::size_t bins_;
  bool pow2_;
  float scale_;
  // Interleaved (neg, pos) per bin so one pixel touches one cache line.
  std::vector<std::uint64_t> counts_;
};

/// Elementwise counter sums. Throws ValidationError on a bin-count mismatch.
ScoreHistogram merge(const ScoreHistogram& a, const ScoreHistogram& b);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  double tpr() const;
  double fpr() const;
  double precision() const;
  double recall() const { return tpr(); }
};

struct CurvePoint {
  double threshold;
  double x;  // FPR for ROC, recall for PR
  double y;  // TPR for ROC, precision for PR
};

struct CurveSummary {
  std::vector<CurvePoint> points;
  double auc = 0.0;
};

/// Points from the strictest edge to edge 0; edges whose bin is empty are
/// folded into their neighbour. Throws ValidationError naming an empty class.
CurveSummary roc_curve(const ScoreHistogram& h);
/// Starts at (recall 0, precision of the first non-empty bin).
CurveSummary pr_curve(const ScoreHistogram& h);

struct FprThreshold {
  double threshold;
  std::size_t edge;
  double realized_fpr;
  double realized_tpr;
};

/// The loosest bin-edge threshold whose FPR is at most `target`.
FprThreshold threshold_at_fpr(const ScoreHistogram& h, double target = 0.01);

struct ConfusionAt {
  ConfusionCounts counts;
  double edge_threshold;
  bool snapped;
};

/// Counts at `threshold`, snapped down to the nearest bin edge.
ConfusionAt confusion_at(const ScoreHistogram& h, double threshold);

struct ExactAuc {
  double roc_auc;
  double pr_auc;
};

/// Sort-based oracle with midpoint tie handling; same PR convention as pr_curve.
ExactAuc exact_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// threshold,fpr,tpr
void write_roc_csv(const std::filesystem::path& path, const CurveSummary& roc);
/// threshold,recall,precision
void write_pr_csv(const std::filesystem::path& path, const CurveSummary& pr);
void write_curve_svg(const std::filesystem::path& path, const CurveSummary& curve,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label);

}  // namespace rootnet

#endif  // ROOTNET_METRICS_HPP_
