// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "rootnet/errors.hpp"
#include "rootnet/metrics.hpp"

namespace rootnet {
namespace {

struct Draw {
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
};

// Positives score higher on average so the curves are non-trivial.
Draw informative_draw(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pos(0.3);
  std::normal_distribution<double> noise(0.0, 0.18);
  Draw d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = pos(rng);
    const double s = std::clamp((p ? 0.6 : 0.4) + noise(rng), 0.0, 1.0);
    d.scores.push_back(static_cast<float>(s));
    d.labels.push_back(p ? 1 : 0);
  }
  return d;
}

std::vector<double> as_double(const std::vector<float>& v) { return {v.begin(), v.end()}; }

TEST(Histogram, SinglePixelTwoBins) {
  ScoreHistogram h(2);
  h.add(0.5, true);
  EXPECT_EQ(h.pos(0), 0u);
  EXPECT_EQ(h.pos(1), 1u);
}

TEST(Histogram, ScoreOneLandsInLastBin) {
  ScoreHistogram h(10);
  const std::vector<float> s{1.0f};
  const std::vector<std::uint8_t> l{0};
  h.accumulate(s, l);
  EXPECT_EQ(h.neg(9), 1u);
  ScoreHistogram big;
  big.accumulate(s, l);
  EXPECT_EQ(big.neg(kDefaultBins - 1), 1u);
}

TEST(Histogram, TotalsMatchInputSize) {
  const auto d = informative_draw(1'000'000, 1);
  ScoreHistogram h;
  h.accumulate(d.scores, d.labels);
  EXPECT_EQ(h.total_pos() + h.total_neg(), 1'000'000u);
  std::uint64_t p = 0;
  for (auto l : d.labels) p += l;
  EXPECT_EQ(h.total_pos(), p);
}

TEST(Histogram, RejectsOutOfRange) {
  ScoreHistogram h(16);
  const std::vector<std::uint8_t> l{0, 1};
  EXPECT_THROW(h.accumulate(std::vector<float>{0.2f, 1.5f}, l), ValidationError);
  EXPECT_THROW(h.accumulate(std::vector<float>{0.2f, std::nanf("")}, l), ValidationError);
  EXPECT_THROW(h.accumulate(std::vector<float>{0.2f, 0.3f}, std::vector<std::uint8_t>{0, 2}),
               ValidationError);
  EXPECT_EQ(h.total_pos() + h.total_neg(), 0u);
}

TEST(Histogram, BinsAgreeWithEdgeComparison) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t bins : {7u, 10u, 1000u, 65536u}) {
    ScoreHistogram h(bins);
    for (int i = 0; i < 20000; ++i) {
      const double s = u(rng);
      const std::size_t b = h.bin_of(s);
      EXPECT_GE(s, h.edge(b));
      if (b + 1 < bins) {
        EXPECT_LT(s, h.edge(b + 1));
      }
    }
    for (std::size_t b = 0; b < bins; b += std::max<std::size_t>(1, bins / 50)) {
      EXPECT_EQ(h.bin_of(h.edge(b)), b);
    }
  }
}

TEST(Merge, EmptyIsIdentityAndCommutes) {
  const auto d1 = informative_draw(5000, 2);
  const auto d2 = informative_draw(7000, 3);
  ScoreHistogram a, b;
  a.accumulate(d1.scores, d1.labels);
  b.accumulate(d2.scores, d2.labels);
  EXPECT_EQ(merge(a, ScoreHistogram()), a);
  EXPECT_EQ(merge(a, b), merge(b, a));
}

TEST(Merge, ShardedEqualsSinglePass) {
  const auto d = informative_draw(400'000, 4);
  ScoreHistogram single;
  single.accumulate(d.scores, d.labels);
  ScoreHistogram merged;
  const std::size_t shard = d.scores.size() / 8;
  for (int k = 0; k < 8; ++k) {
    const std::size_t lo = k * shard, hi = k == 7 ? d.scores.size() : lo + shard;
    ScoreHistogram part;
    part.accumulate(std::span<const float>(d.scores).subspan(lo, hi - lo),
                    std::span<const std::uint8_t>(d.labels).subspan(lo, hi - lo));
    merged = merge(merged, part);
  }
  EXPECT_EQ(merged, single);
}

TEST(Merge, BinMismatchThrows) {
  EXPECT_THROW(merge(ScoreHistogram(4), ScoreHistogram(8)), ValidationError);
}

TEST(Curves, PerfectSeparation) {
  ScoreHistogram h;
  for (int i = 0; i < 50; ++i) h.add(0.9, true);
  for (int i = 0; i < 70; ++i) h.add(0.1, false);
  EXPECT_DOUBLE_EQ(roc_curve(h).auc, 1.0);
  EXPECT_DOUBLE_EQ(pr_curve(h).auc, 1.0);
}

TEST(Curves, ConstantScoreIsChance) {
  ScoreHistogram h;
  for (int i = 0; i < 30; ++i) h.add(0.37, i % 3 == 0);
  EXPECT_EQ(roc_curve(h).auc, 0.5);
}

TEST(Curves, IndependentLabelsNearChance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::bernoulli_distribution coin(0.5);
  std::vector<float> s(1'000'000);
  std::vector<std::uint8_t> l(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    l[i] = coin(rng);
  }
  ScoreHistogram h;
  h.accumulate(s, l);
  const double auc = roc_curve(h).auc;
  EXPECT_NEAR(auc, 0.5, 0.01);
  const auto exact = exact_auc(as_double(s), l);
  EXPECT_NEAR(auc, exact.roc_auc, 2e-4);
}

TEST(Curves, DegenerateClassesNamed) {
  ScoreHistogram only_neg;
  only_neg.add(0.2, false);
  try {
    roc_curve(only_neg);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("positive"), std::string::npos);
  }
  ScoreHistogram only_pos;
  only_pos.add(0.2, true);
  try {
    roc_curve(only_pos);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("negative"), std::string::npos);
  }
  EXPECT_NO_THROW(pr_curve(only_pos));
  EXPECT_THROW(pr_curve(only_neg), ValidationError);
}

TEST(Curves, RocPointsMonotone) {
  const auto d = informative_draw(100'000, 5);
  ScoreHistogram h;
  h.accumulate(d.scores, d.labels);
  const auto roc = roc_curve(h);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_GE(roc.points[i].x, roc.points[i - 1].x);
    EXPECT_GE(roc.points[i].y, roc.points[i - 1].y);
    EXPECT_LT(roc.points[i].threshold, roc.points[i - 1].threshold);
  }
  EXPECT_EQ(roc.points.front().x, 0.0);
  EXPECT_EQ(roc.points.back().x, 1.0);
  EXPECT_EQ(roc.points.back().y, 1.0);
  EXPECT_LE(roc.points.size(), h.bins() + 1);
}

TEST(Curves, HistogramAgreesWithExactOracle) {
  const auto d = informative_draw(1'000'000, 6);
  ScoreHistogram h;
  h.accumulate(d.scores, d.labels);
  const auto exact = exact_auc(as_double(d.scores), d.labels);
  EXPECT_NEAR(roc_curve(h).auc, exact.roc_auc, 2e-4);
  EXPECT_NEAR(pr_curve(h).auc, exact.pr_auc, 2e-4);
}

TEST(Curves, MonotoneTransformInvariance) {
  const auto d = informative_draw(200'000, 7);
  std::vector<float> squared(d.scores.size());
  for (std::size_t i = 0; i < squared.size(); ++i) squared[i] = d.scores[i] * d.scores[i];
  ScoreHistogram a, b;
  a.accumulate(d.scores, d.labels);
  b.accumulate(squared, d.labels);
  EXPECT_NEAR(roc_curve(a).auc, roc_curve(b).auc, 1e-3);
}

TEST(Curves, ComplementSymmetry) {
  const auto d = informative_draw(200'000, 8);
  std::vector<float> flipped(d.scores.size());
  std::vector<std::uint8_t> labels(d.labels.size());
  for (std::size_t i = 0; i < flipped.size(); ++i) {
    flipped[i] = 1.0f - d.scores[i];
    labels[i] = 1 - d.labels[i];
  }
  ScoreHistogram a, b;
  a.accumulate(d.scores, d.labels);
  b.accumulate(flipped, labels);
  EXPECT_NEAR(roc_curve(a).auc, roc_curve(b).auc, 2.0 / kDefaultBins);
}

TEST(ExactAuc, SmallCases) {
  EXPECT_EQ(exact_auc(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}).roc_auc, 1.0);
  EXPECT_EQ(exact_auc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<std::uint8_t>{1, 0, 1}).roc_auc,
            0.5);
}

TEST(ExactAuc, AgreesWithHistogramOnTenThousand) {
  const auto d = informative_draw(10'000, 10);
  ScoreHistogram h;
  h.accumulate(d.scores, d.labels);
  EXPECT_NEAR(roc_curve(h).auc, exact_auc(as_double(d.scores), d.labels).roc_auc, 2e-4);
}

TEST(ThresholdAtFpr, AllNegativesAtOneScore) {
  ScoreHistogram h;
  for (int i = 0; i < 100; ++i) h.add(0.1, false);
  const auto t = threshold_at_fpr(h, 0.01);
  EXPECT_EQ(t.realized_fpr, 0.0);
  EXPECT_GT(t.threshold, 0.1);
  EXPECT_EQ(t.edge, h.bin_of(0.1) + 1);
  EXPECT_LE(h.edge(t.edge - 1), 0.1);
}

TEST(ThresholdAtFpr, UniformNegativesQuantile) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> s(200'000);
  for (auto& v : s) v = u(rng);
  std::vector<std::uint8_t> l(s.size(), 0);
  ScoreHistogram h;
  h.accumulate(s, l);
  const auto t = threshold_at_fpr(h, 0.01);
  EXPECT_NEAR(t.threshold, 0.99, 2e-3);
  std::size_t fp = 0;
  for (float v : s) fp += v >= t.threshold;
  EXPECT_EQ(static_cast<double>(fp) / s.size(), t.realized_fpr);
  EXPECT_LE(t.realized_fpr, 0.01);
}

TEST(ThresholdAtFpr, TargetOneAllowsEverything) {
  ScoreHistogram h;
  h.add(0.3, false);
  h.add(0.7, true);
  const auto t = threshold_at_fpr(h, 1.0);
  EXPECT_EQ(t.threshold, 0.0);
  EXPECT_EQ(t.edge, 0u);
}

TEST(ThresholdAtFpr, TopBinTooDenseReturnsAboveOne) {
  ScoreHistogram h(4);
  for (int i = 0; i < 10; ++i) h.add(1.0, false);
  const auto t = threshold_at_fpr(h, 0.01);
  EXPECT_GT(t.threshold, 1.0);
  EXPECT_EQ(t.realized_fpr, 0.0);
}

TEST(ConfusionAt, Extremes) {
  const auto d = informative_draw(10'000, 13);
  ScoreHistogram h;
  h.accumulate(d.scores, d.labels);
  const auto zero = confusion_at(h, 0.0);
  EXPECT_EQ(zero.counts.fn, 0u);
  EXPECT_EQ(zero.counts.tn, 0u);
  const auto top = confusion_at(h, 1.5);
  EXPECT_EQ(top.counts.tp, 0u);
  EXPECT_EQ(top.counts.fp, 0u);
  EXPECT_EQ(top.counts.tp + top.counts.fn, h.total_pos());
}

TEST(ConfusionAt, MatchesDirectCountingAndReportsSnap) {
  const auto d = informative_draw(50'000, 14);
  ScoreHistogram h(1000);
  h.accumulate(d.scores, d.labels);
  for (double thr : {0.1, 0.4, 0.4004, 0.77}) {
    const auto c = confusion_at(h, thr);
    EXPECT_LE(c.edge_threshold, thr);
    ConfusionCounts want;
    for (std::size_t i = 0; i < d.scores.size(); ++i) {
      const bool pred = d.scores[i] >= c.edge_threshold;
      if (d.labels[i]) (pred ? want.tp : want.fn)++;
      else (pred ? want.fp : want.tn)++;
    }
    EXPECT_EQ(c.counts.tp, want.tp);
    EXPECT_EQ(c.counts.fp, want.fp);
    EXPECT_EQ(c.counts.tn, want.tn);
    EXPECT_EQ(c.counts.fn, want.fn);
  }
  EXPECT_FALSE(confusion_at(h, 0.4).snapped);
  EXPECT_TRUE(confusion_at(h, 0.4004).snapped);
}

TEST(Throughput, AccumulateIsFast) {
  const auto d = informative_draw(4'000'000, 15);
  ScoreHistogram h;
  h.accumulate(d.scores, d.labels);
  double best = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    h.accumulate(d.scores, d.labels);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::max(best, static_cast<double>(d.scores.size()) / s);
  }
  RecordProperty("pixels_per_second", std::to_string(best));
  EXPECT_GE(best, 1e8);
}

}  // namespace
}  // namespace rootnet
