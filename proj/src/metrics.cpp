// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/metrics.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rootnet/errors.hpp"

namespace rootnet {

namespace {

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void require_classes(const ScoreHistogram& h, bool need_negative, const char* what) {
  if (h.total_pos() == 0) {
    throw ValidationError(std::string(what) + ": no positive pixels accumulated");
  }
  if (need_negative && h.total_neg() == 0) {
    throw ValidationError(std::string(what) + ": no negative pixels accumulated");
  }
}

double trapezoid(const std::vector<CurvePoint>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].x - pts[i - 1].x) * (pts[i].y + pts[i - 1].y) * 0.5;
  }
  return area;
}

}  // namespace

ScoreHistogram::ScoreHistogram(std::size_t bins)
    : bins_(bins), pow2_(is_pow2(bins)), scale_(static_cast<float>(bins)) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  if (bins > (std::size_t{1} << 30)) throw ValidationError("histogram bin count too large");
  counts_.assign(2 * bins, 0);
}

std::size_t ScoreHistogram::bin_of(double score) const {
  if (!(score >= 0.0)) return 0;
  if (score >= 1.0) return bins_ - 1;
  auto b = static_cast<std::size_t>(score * static_cast<double>(bins_));
  b = std::min(b, bins_ - 1);
  // Keep the bin consistent with the edge comparison when score * B rounds.
  if (b > 0 && score < edge(b)) --b;
  if (b + 1 < bins_ && score >= edge(b + 1)) ++b;
  return b;
}

double ScoreHistogram::edge(std::size_t b) const {
  if (b >= bins_) return std::nextafter(1.0, 2.0);
  return static_cast<double>(b) / static_cast<double>(bins_);
}

void ScoreHistogram::add(double score, bool positive) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError("score " + std::to_string(score) + " outside [0, 1]");
  }
  ++counts_[2 * bin_of(score) + (positive ? 1 : 0)];
}

void ScoreHistogram::accumulate(std::span<const float> scores,
                                std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("accumulate: " + std::to_string(scores.size()) + " scores vs " +
                          std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = scores.size();
  bool bad_score = false;
  std::uint8_t label_or = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const float s = scores[i];
    bad_score |= !(s >= 0.0f && s <= 1.0f);
    label_or |= labels[i];
  }
  if (bad_score) throw ValidationError("accumulate: score outside [0, 1]");
  if (label_or > 1) throw ValidationError("accumulate: labels must be 0 or 1");

  std::uint64_t* c = counts_.data();
  if (pow2_) {
    // s * B is exact for a power-of-two B, so truncation is the floor.
    const auto last = static_cast<std::uint32_t>(bins_ - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = std::min(static_cast<std::uint32_t>(scores[i] * scale_), last);
      ++c[2 * b + labels[i]];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) ++c[2 * bin_of(scores[i]) + labels[i]];
  }
}

void ScoreHistogram::accumulate(std::span<const float> scores, std::span<const float> labels) {
  std::vector<std::uint8_t> l(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0f && labels[i] != 1.0f) {
      throw ValidationError("accumulate: labels must be 0 or 1");
    }
    l[i] = labels[i] != 0.0f ? 1 : 0;
  }
  accumulate(scores, l);
}

std::uint64_t ScoreHistogram::total_pos() const {
  std::uint64_t t = 0;
  for (std::size_t b = 0; b < bins_; ++b) t += pos(b);
  return t;
}

std::uint64_t ScoreHistogram::total_neg() const {
  std::uint64_t t = 0;
  for (std::size_t b = 0; b < bins_; ++b) t += neg(b);
  return t;
}

ScoreHistogram merge(const ScoreHistogram& a, const ScoreHistogram& b) {
  if (a.bins_ != b.bins_) {
    throw ValidationError("merge: bin counts differ (" + std::to_string(a.bins_) + " vs " +
                          std::to_string(b.bins_) + ")");
  }
  ScoreHistogram out = a;
  for (std::size_t i = 0; i < out.counts_.size(); ++i) out.counts_[i] += b.counts_[i];
  return out;
}

double ConfusionCounts::tpr() const {
  const std::uint64_t p = tp + fn;
  return p ? static_cast<double>(tp) / static_cast<double>(p) : 0.0;
}

double ConfusionCounts::fpr() const {
  const std::uint64_t n = fp + tn;
  return n ? static_cast<double>(fp) / static_cast<double>(n) : 0.0;
}

double ConfusionCounts::precision() const {
  const std::uint64_t d = tp + fp;
  return d ? static_cast<double>(tp) / static_cast<double>(d) : 0.0;
}

CurveSummary roc_curve(const ScoreHistogram& h) {
  require_classes(h, true, "roc_curve");
  const double p = static_cast<double>(h.total_pos());
  const double n = static_cast<double>(h.total_neg());
  CurveSummary out;
  out.points.push_back({h.edge(h.bins()), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area, in count units
  for (std::size_t b = h.bins(); b-- > 0;) {
    const std::uint64_t dp = h.pos(b), dn = h.neg(b);
    area2 += static_cast<double>(dn) * static_cast<double>(2 * tp + dp);
    tp += dp;
    fp += dn;
    if (dp + dn > 0 || b == 0) {
      out.points.push_back({h.edge(b), static_cast<double>(fp) / n, static_cast<double>(tp) / p});
    }
  }
  out.auc = area2 / (2.0 * p * n);
  return out;
}

CurveSummary pr_curve(const ScoreHistogram& h) {
  require_classes(h, false, "pr_curve");
  const double p = static_cast<double>(h.total_pos());
  CurveSummary out;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t b = h.bins(); b-- > 0;) {
    const std::uint64_t dp = h.pos(b), dn = h.neg(b);
    if (dp + dn == 0) continue;
    tp += dp;
    fp += dn;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (out.points.empty()) out.points.push_back({h.edge(b), 0.0, precision});
    out.points.push_back({h.edge(b), static_cast<double>(tp) / p, precision});
  }
  out.auc = trapezoid(out.points);
  return out;
}

FprThreshold threshold_at_fpr(const ScoreHistogram& h, double target) {
  if (!(target >= 0.0 && target <= 1.0)) {
    throw ValidationError("threshold_at_fpr: target must lie in [0, 1]");
  }
  const std::uint64_t n = h.total_neg();
  if (n == 0) throw ValidationError("threshold_at_fpr: no negative pixels accumulated");
  const std::uint64_t p = h.total_pos();
  std::size_t edge = h.bins();
  std::uint64_t fp = 0, tp = 0;
  while (edge > 0) {
    const std::uint64_t next_fp = fp + h.neg(edge - 1);
    if (static_cast<double>(next_fp) / static_cast<double>(n) > target) break;
    fp = next_fp;
    tp += h.pos(edge - 1);
    --edge;
  }
  return {h.edge(edge), edge, static_cast<double>(fp) / static_cast<double>(n),
          p ? static_cast<double>(tp) / static_cast<double>(p) : 0.0};
}

ConfusionAt confusion_at(const ScoreHistogram& h, double threshold) {
  std::size_t e;
  if (threshold <= 0.0) {
    e = 0;
  } else if (threshold > 1.0) {
    e = h.bins();
  } else {
    e = h.bin_of(threshold);
  }
  ConfusionAt out{};
  out.edge_threshold = h.edge(e);
  out.snapped = out.edge_threshold != threshold && !(threshold > 1.0) && !(threshold < 0.0);
  for (std::size_t b = 0; b < h.bins(); ++b) {
    if (b >= e) {
      out.counts.tp += h.pos(b);
      out.counts.fp += h.neg(b);
    } else {
      out.counts.fn += h.pos(b);
      out.counts.tn += h.neg(b);
    }
  }
  return out;
}

ExactAuc exact_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("exact_auc: size mismatch");
  std::uint64_t p = 0;
  for (auto l : labels) {
    if (l > 1) throw ValidationError("exact_auc: labels must be 0 or 1");
    p += l;
  }
  const std::uint64_t n = labels.size() - p;
  if (p == 0) throw ValidationError("exact_auc: no positive samples");
  if (n == 0) throw ValidationError("exact_auc: no negative samples");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  });
  double area2 = 0.0;
  std::uint64_t tp = 0, fp = 0;
  std::vector<CurvePoint> pr;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t dp = 0, dn = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? dp : dn) += 1;
      ++j;
    }
    area2 += static_cast<double>(dn) * static_cast<double>(2 * tp + dp);
    tp += dp;
    fp += dn;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (pr.empty()) pr.push_back({scores[order[i]], 0.0, precision});
    pr.push_back({scores[order[i]], static_cast<double>(tp) / static_cast<double>(p), precision});
    i = j;
  }
  return {area2 / (2.0 * static_cast<double>(p) * static_cast<double>(n)), trapezoid(pr)};
}

namespace {

void write_curve_csv(const std::filesystem::path& path, const CurveSummary& c,
                     const char* header) {
  try {
    auto out = fmt::output_file(path.string());
    out.print("{}\n", header);
    for (const auto& pt : c.points) out.print("{:.9g},{:.9g},{:.9g}\n", pt.threshold, pt.x, pt.y);
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

}  // namespace

void write_roc_csv(const std::filesystem::path& path, const CurveSummary& roc) {
  write_curve_csv(path, roc, "threshold,fpr,tpr");
}

void write_pr_csv(const std::filesystem::path& path, const CurveSummary& pr) {
  write_curve_csv(path, pr, "threshold,recall,precision");
}

void write_curve_svg(const std::filesystem::path& path, const CurveSummary& curve,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label) {
  constexpr double kSize = 360.0, kMargin = 50.0;
  std::string poly;
  for (const auto& pt : curve.points) {
    poly += fmt::format("{:.2f},{:.2f} ", kMargin + pt.x * kSize, kMargin + (1.0 - pt.y) * kSize);
  }
  try {
    auto out = fmt::output_file(path.string());
    const double full = kSize + 2 * kMargin;
    out.print(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        full);
    out.print("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{1}\" fill=\"none\" "
              "stroke=\"#444\"/>\n",
              kMargin, kSize);
    out.print("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} (AUC {:.4f})</text>\n", full / 2,
              kMargin / 2, title, curve.auc);
    out.print("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", full / 2,
              full - kMargin / 3, x_label);
    out.print("<text x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" "
              "transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
              kMargin / 3, full / 2, y_label);
    out.print("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>\n",
              poly);
    out.print("</svg>\n");
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

}  // namespace rootnet
