// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_TRAINING_HPP_
#define ROOTNET_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rootnet/dataset.hpp"
#include "rootnet/metrics.hpp"
#include "rootnet/unet.hpp"

namespace rootnet {

struct TrainConfig {
  ArchSpec arch;
  double lr = 1e-4;
  double momentum = 0.8;
  int batch_size = 2;
  int epochs = 100;
  double pos_weight = 1.0;
  std::uint64_t seed = 1;
  /// Epochs between evaluation snapshots; the last epoch is always evaluated.
  int eval_every = 1;
  std::size_t bins = kDefaultBins;

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Depth study recipe: lr 1e-4, momentum 0.8, batch 2, 100 epochs, no weighting.
TrainConfig peanut_recipe(int depth, int base_width = 64);
/// Transfer study recipe on the VGG13 variant: 300 epochs, pos_weight 20,
/// lr 5e-5 from scratch and 1e-5 from pre-trained weights.
TrainConfig switchgrass_recipe(bool pretrained, int base_width = 64);

struct Snapshot {
  int epoch = 0;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
};

struct TrialReport {
  std::uint64_t seed = 0;
  /// Mean training loss of epochs 1..E.
  std::vector<double> epoch_loss;
  /// Starts with epoch 0 (before any update).
  std::vector<Snapshot> snapshots;
  ParamSet params;

  const Snapshot& final_snapshot() const { return snapshots.back(); }
};

struct TrainHooks {
  /// Called after every epoch with the report so far and the current
  /// parameters; returning true stops training after that epoch.
  std::function<bool(const TrialReport&, const ParamSet&)> after_epoch;
};

/// Scores every pixel of `set` into a histogram.
ScoreHistogram evaluate(const ArchSpec& spec, const ParamSet& params, const SampleSet& set,
                        std::size_t bins = kDefaultBins);
Snapshot summarize_histogram(const ScoreHistogram& h, int epoch);

/// Trains `params` in place of a fresh model. Throws DivergenceError on a
/// non-finite loss.
TrialReport train(const TrainConfig& config, ParamSet params, const SampleSet& train_set,
                  const SampleSet& eval_set, const TrainHooks& hooks = {});
/// Scratch initialization from config.seed.
TrialReport train(const TrainConfig& config, const SampleSet& train_set, const SampleSet& eval_set,
                  const TrainHooks& hooks = {});

struct TrialSummary {
  double mean_roc_auc = 0.0;
  double std_roc_auc = 0.0;
  double mean_pr_auc = 0.0;
  double std_pr_auc = 0.0;
  std::size_t trials = 0;
  bool single_trial = false;
};

/// Mean and sample standard deviation of the final snapshots.
TrialSummary summarize(const std::vector<TrialReport>& reports);

using InitFn = std::function<ParamSet(std::uint64_t seed)>;

struct TrialsResult {
  std::vector<TrialReport> reports;
  TrialSummary summary;
};

/// Trial t trains with seed config.seed + t; `init` defaults to build().
TrialsResult run_trials(const TrainConfig& config, int n_trials, const SampleSet& train_set,
                        const SampleSet& eval_set, const InitFn& init = {},
                        const TrainHooks& hooks = {});

/// 1 where probability >= threshold. Throws ValidationError unless
/// 0 < threshold < 1.
std::vector<std::uint8_t> binarize(std::span<const float> probs, double threshold);

/// trial,epoch,loss,roc_auc,pr_auc with one row per epoch 0..E; fields that
/// do not apply to an epoch are left empty.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<TrialReport>& reports);

struct ModelSummary {
  std::string model;
  TrialSummary summary;
};
/// model,mean_roc_auc,std_roc_auc,mean_pr_auc,std_pr_auc
void write_summary_csv(const std::filesystem::path& path, const std::vector<ModelSummary>& rows);
/// Text table with "mean ± std" cells.
std::string format_summary_table(const std::vector<ModelSummary>& rows);

}  // namespace rootnet

#endif  // ROOTNET_TRAINING_HPP_
