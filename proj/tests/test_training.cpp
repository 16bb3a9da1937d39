// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <omp.h>

#include <filesystem>
#include <fstream>

#include "rootnet/synthgen.hpp"
#include "rootnet/training.hpp"

namespace rootnet {
namespace {

namespace fs = std::filesystem;

SampleSet tiny_set(int n, std::int64_t size = 16, std::uint64_t seed = 4) {
  GenParams g;
  g.height = g.width = size;
  g.min_diameter = 2.0;
  g.max_diameter = 3.0;
  g.target_density = 0.2;
  g.seed = seed;
  return gen_sample_set(g, n, "t");
}

TrainConfig tiny_config(int epochs) {
  TrainConfig c;
  c.arch.depth = 2;
  c.arch.base_width = 2;
  c.lr = 0.05;
  c.momentum = 0.9;
  c.batch_size = 2;
  c.epochs = epochs;
  c.seed = 3;
  c.bins = 1024;
  return c;
}

TEST(Recipes, PublishedSettings) {
  const TrainConfig p = peanut_recipe(6);
  EXPECT_EQ(p.arch.depth, 6);
  EXPECT_DOUBLE_EQ(p.lr, 1e-4);
  EXPECT_DOUBLE_EQ(p.momentum, 0.8);
  EXPECT_EQ(p.batch_size, 2);
  EXPECT_EQ(p.epochs, 100);
  EXPECT_DOUBLE_EQ(p.pos_weight, 1.0);
  const TrainConfig s = switchgrass_recipe(false);
  EXPECT_EQ(s.arch.variant, Variant::vgg13);
  EXPECT_DOUBLE_EQ(s.lr, 5e-5);
  EXPECT_EQ(s.epochs, 300);
  EXPECT_DOUBLE_EQ(s.pos_weight, 20.0);
  EXPECT_DOUBLE_EQ(switchgrass_recipe(true).lr, 1e-5);
}

TEST(Config, Validation) {
  TrainConfig c = tiny_config(1);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(1);
  c.lr = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(1);
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(1);
  c.pos_weight = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, ZeroEpochsKeepsInitialisation) {
  const SampleSet set = tiny_set(3);
  const TrainConfig c = tiny_config(0);
  const TrialReport r = train(c, set, set);
  EXPECT_TRUE(r.epoch_loss.empty());
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.snapshots[0].epoch, 0);
  EXPECT_TRUE(r.params == build(c.arch, c.seed));
}

TEST(Train, SnapshotCadence) {
  const SampleSet set = tiny_set(3);
  TrainConfig c = tiny_config(5);
  c.eval_every = 2;
  const TrialReport r = train(c, set, set);
  std::vector<int> epochs;
  for (const auto& s : r.snapshots) {
    epochs.push_back(s.epoch);
    EXPECT_GE(s.roc_auc, 0.0);
    EXPECT_LE(s.roc_auc, 1.0);
    EXPECT_GE(s.pr_auc, 0.0);
    EXPECT_LE(s.pr_auc, 1.0);
  }
  EXPECT_EQ(epochs, (std::vector<int>{0, 2, 4, 5}));
  EXPECT_EQ(r.epoch_loss.size(), 5u);
}

TEST(Train, StopHook) {
  const SampleSet set = tiny_set(3);
  TrainHooks h;
  h.after_epoch = [](const TrialReport& r, const ParamSet&) { return r.epoch_loss.size() == 2; };
  const TrialReport r = train(tiny_config(10), set, set, h);
  EXPECT_EQ(r.epoch_loss.size(), 2u);
  EXPECT_EQ(r.final_snapshot().epoch, 2);
}

TEST(Train, DivergenceReportsPosition) {
  const SampleSet set = tiny_set(4);
  TrainConfig c = tiny_config(5);
  c.lr = 1e12;
  try {
    train(c, set, set);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.epoch(), 1);
    EXPECT_GE(e.batch(), 0);
  }
}

TEST(Train, RejectsEmptySets) {
  const SampleSet set = tiny_set(2);
  EXPECT_THROW(train(tiny_config(1), {}, set), ValidationError);
  EXPECT_THROW(train(tiny_config(1), set, {}), ValidationError);
}

TEST(Train, BitIdenticalRuns) {
  const SampleSet set = tiny_set(5);
  const TrialReport a = train(tiny_config(3), set, set);
  const TrialReport b = train(tiny_config(3), set, set);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Train, IndependentOfThreadCount) {
  const SampleSet set = tiny_set(4, 24);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const TrialReport a = train(tiny_config(2), set, set);
  omp_set_num_threads(4);
  const TrialReport b = train(tiny_config(2), set, set);
  omp_set_num_threads(saved);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Train, LabelSwapSymmetry) {
  // With unit pos_weight, flipping every label and negating the head gives a
  // mirrored trajectory: identical body, negated head.
  const SampleSet set = tiny_set(4);
  SampleSet flipped = set;
  for (auto& r : flipped)
    for (auto& v : r.mask.data) v = 1 - v;
  const TrainConfig c = tiny_config(2);
  const ParamSet p = build(c.arch, c.seed);
  ParamSet q = p;
  for (auto& np : q)
    if (np.name.starts_with("head."))
      for (auto& v : np.tensor.data()) v = -v;
  const TrialReport a = train(c, p, set, set);
  const TrialReport b = train(c, q, flipped, flipped);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const bool head = a.params[i].name.starts_with("head.");
    const auto x = a.params[i].tensor.data(), y = b.params[i].tensor.data();
    for (std::size_t k = 0; k < x.size(); ++k) ASSERT_EQ(x[k], head ? -y[k] : y[k]) << a.params[i].name;
  }
}

TEST(Train, OverfitProbe) {
  GenParams g;
  g.height = g.width = 96;
  g.seed = 42;
  const SampleSet set = gen_sample_set(g, 8, "o");
  TrainConfig c;
  c.arch.depth = 4;
  c.arch.base_width = 8;
  c.lr = 1e-3;
  c.momentum = 0.95;
  c.batch_size = 1;
  c.epochs = 200;
  c.eval_every = 200;
  c.seed = 1;
  const TrialReport r = train(c, set, set);
  EXPECT_LT(r.epoch_loss.back(), 0.02);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
  EXPECT_GT(r.final_snapshot().roc_auc, 0.995);
}

TEST(Trials, SeedsAndSummary) {
  const SampleSet set = tiny_set(3);
  const TrialsResult one = run_trials(tiny_config(1), 1, set, set);
  ASSERT_EQ(one.reports.size(), 1u);
  EXPECT_TRUE(one.summary.single_trial);
  EXPECT_EQ(one.summary.std_roc_auc, 0.0);
  const TrialsResult three = run_trials(tiny_config(1), 3, set, set);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(three.reports[t].seed, 3 + t);
  EXPECT_FALSE(three.summary.single_trial);
  EXPECT_THROW(run_trials(tiny_config(1), 0, set, set), ConfigError);
}

TEST(Trials, IdenticalReportsHaveZeroDeviation) {
  TrialReport r;
  r.snapshots.push_back({3, 0.91, 0.42});
  const TrialSummary s = summarize({r, r, r, r, r});
  EXPECT_EQ(s.std_roc_auc, 0.0);
  EXPECT_EQ(s.std_pr_auc, 0.0);
  EXPECT_DOUBLE_EQ(s.mean_roc_auc, 0.91);
}

TEST(Trials, SampleStandardDeviation) {
  std::vector<TrialReport> rs(3);
  const double v[3] = {0.8, 0.9, 1.0};
  for (int i = 0; i < 3; ++i) rs[static_cast<std::size_t>(i)].snapshots.push_back({1, v[i], v[i]});
  const TrialSummary s = summarize(rs);
  EXPECT_NEAR(s.mean_roc_auc, 0.9, 1e-15);
  EXPECT_NEAR(s.std_roc_auc, 0.1, 1e-15);
}

TEST(Binarize, Examples) {
  const std::vector<float> half(10, 0.5f);
  for (auto v : binarize(half, 0.4)) EXPECT_EQ(v, 1);
  const std::vector<float> edge{0.39f, 0.40f, 0.41f};
  EXPECT_EQ(binarize(edge, 0.4f), (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_THROW(binarize(edge, 0.0), ValidationError);
  EXPECT_THROW(binarize(edge, 1.0), ValidationError);
}

TEST(Binarize, AtOnePercentFprRecount) {
  const SampleSet set = tiny_set(6, 32);
  const TrainConfig c = tiny_config(2);
  const TrialReport r = train(c, set, set);
  ScoreHistogram h;
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& s : set) {
    const Tensor p = forward(c.arch, r.params, image_to_tensor(s.image));
    scores.insert(scores.end(), p.data().begin(), p.data().end());
    labels.insert(labels.end(), s.mask.data.begin(), s.mask.data.end());
  }
  h.accumulate(scores, std::span<const std::uint8_t>(labels));
  const FprThreshold t = threshold_at_fpr(h, 0.01);
  std::vector<std::uint8_t> mask;
  if (t.threshold > 0.0 && t.threshold < 1.0) {
    mask = binarize(scores, t.threshold);
  } else {
    mask.assign(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) mask[i] = scores[i] >= t.threshold;
  }
  std::size_t fp = 0, neg = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!labels[i]) {
      ++neg;
      fp += mask[i];
    }
  EXPECT_LE(static_cast<double>(fp) / static_cast<double>(neg), 0.01);
}

TEST(Batches, MixedExtentsRejected) {
  SampleSet set = tiny_set(1, 16);
  const SampleSet other = tiny_set(1, 24);
  set.push_back(other[0]);
  Tensor in, tgt;
  EXPECT_THROW(make_batch(set, {0, 1}, 0, 2, in, tgt), ShapeError);
  make_batch(set, {1, 0}, 0, 1, in, tgt);
  EXPECT_EQ(in.shape(), (Shape{1, 3, 24, 24}));
  EXPECT_EQ(tgt.shape(), (Shape{1, 1, 24, 24}));
}

TEST(Reports, CsvLayouts) {
  const fs::path dir = fs::temp_directory_path() / "rootnet_test_reports";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const SampleSet set = tiny_set(3);
  TrainConfig c = tiny_config(3);
  c.eval_every = 2;
  const TrialsResult res = run_trials(c, 2, set, set);
  write_metrics_csv(dir / "metrics.csv", res.reports);
  std::ifstream in(dir / "metrics.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial,epoch,loss,roc_auc,pr_auc");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_TRUE(rows[0].starts_with("0,0,,0."));
  EXPECT_TRUE(rows[1].ends_with(",,"));
  EXPECT_TRUE(rows[4].starts_with("1,0,,"));

  write_summary_csv(dir / "summary.csv", {{"S", res.summary}});
  std::ifstream sin(dir / "summary.csv");
  std::getline(sin, line);
  EXPECT_EQ(line, "model,mean_roc_auc,std_roc_auc,mean_pr_auc,std_pr_auc");
  std::getline(sin, line);
  EXPECT_TRUE(line.starts_with("S,"));

  TrialSummary t1;
  t1.mean_roc_auc = 0.9904;
  t1.std_roc_auc = 0.005;
  const std::string table = format_summary_table({{"Depth 6", t1}});
  EXPECT_NE(table.find("Depth 6  0.9904 ± 0.0050"), std::string::npos) << table;
}

}  // namespace
}  // namespace rootnet
