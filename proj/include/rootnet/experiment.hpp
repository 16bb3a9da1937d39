// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Transfer-learning comparison: S, I, P-En and P-EnDe regimes on one target set.

#ifndef ROOTNET_EXPERIMENT_HPP_
#define ROOTNET_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rootnet/synthgen.hpp"
#include "rootnet/training.hpp"
#include "rootnet/transfer.hpp"

namespace rootnet {

struct TransferExperimentConfig {
  int base_width = 8;
  int trials = 5;
  std::vector<InitKind> regimes{InitKind::scratch, InitKind::encoder_from_classifier,
                                InitKind::encoder_from_checkpoint,
                                InitKind::encoder_decoder_from_checkpoint};

  // Fine-tuning on the target set. Learning rates are the 5e-5 / 1e-5 pair
  // multiplied by lr_scale.
  double scratch_lr = 5e-5;
  double pretrained_lr = 1e-5;
  double lr_scale = 6.0;
  double momentum = 0.8;
  int batch_size = 2;
  int epochs = 30;
  double pos_weight = 20.0;
  std::uint64_t seed = 1;
  std::size_t bins = 4096;

  // Segmentation pre-training on the source set, skipped when
  // source_checkpoint is given.
  std::filesystem::path source_checkpoint;
  double source_lr = 1e-3;
  double source_momentum = 0.9;
  int source_epochs = 40;
  double source_pos_weight = 20.0;
  double source_train_fraction = 0.9;
  std::uint64_t source_split_seed = 1;
  std::uint64_t source_seed = 100;

  // Surrogate classifier for the I regime, skipped when classifier_checkpoint
  // is given.
  std::filesystem::path classifier_checkpoint;
  ClassParams classifier_data{4, 64, 64, 7};
  ClassifierTrainConfig classifier;

  /// Throws ConfigError.
  void validate() const;
  /// Fine-tuning recipe for one regime.
  TrainConfig target_config(InitKind kind) const;
  TrainConfig source_config() const;
  bool needs(InitKind kind) const;
};

struct RegimeResult {
  InitKind kind;
  TrialsResult trials;
};

struct TransferExperimentResult {
  std::optional<TrialReport> source;
  std::optional<ClassifierReport> classifier;
  Checkpoint source_checkpoint;
  Checkpoint classifier_checkpoint;
  std::vector<RegimeResult> regimes;

  /// nullptr when the regime was not run.
  const RegimeResult* find(InitKind kind) const;
};

using ProgressFn = std::function<void(const std::string&)>;

TransferExperimentResult run_transfer_experiment(const TransferExperimentConfig& config,
                                                 const SampleSet& source_set,
                                                 const SampleSet& target_train,
                                                 const SampleSet& target_eval,
                                                 const ProgressFn& progress = {});
TransferExperimentResult run_transfer_experiment(const TransferExperimentConfig& config,
                                                 const DomainPair& pair,
                                                 const ProgressFn& progress = {});

/// "S-model", "I-model", "P-En-model", "P-EnDe-model".
std::string model_label(InitKind kind);

/// Rows in S, I, P-En, P-EnDe order for the regimes that ran.
std::vector<ModelSummary> transfer_summary(const TransferExperimentResult& result);

struct GroupOrdering {
  int trial = 0;
  double scratch = 0.0;
  double encoder = 0.0;
  double encoder_decoder = 0.0;
  /// First epoch at which P-EnDe matched the S trial's final ROC-AUC, or -1.
  int reach_epoch = -1;
  bool ordered = false;
  bool fast = false;
};

struct OrderingReport {
  std::vector<GroupOrdering> groups;
  double mean_scratch = 0.0;
  double mean_encoder = 0.0;
  double mean_encoder_decoder = 0.0;
  int epochs = 0;
  /// First epoch at which the trial-mean P-EnDe curve matched the mean S final.
  int mean_reach_epoch = -1;
  bool means_ordered = false;
  bool means_fast = false;
  int groups_ok = 0;

  bool pass(int min_groups) const { return means_ordered && means_fast && groups_ok >= min_groups; }
};

/// Final ROC-AUC ordering P-EnDe >= P-En >= S and the half-schedule
/// convergence of P-EnDe, per seed group and on trial means. Needs the S,
/// P-En and P-EnDe regimes with equal trial counts; throws ConfigError.
OrderingReport check_transfer_ordering(const TransferExperimentResult& result);
std::string format_ordering(const OrderingReport& report);

/// regime,trial,epoch,roc_auc,pr_auc
void write_transfer_curves_csv(const std::filesystem::path& path,
                               const TransferExperimentResult& result);
/// Trial-mean PR-AUC (or ROC-AUC) per epoch, one line per regime.
void write_transfer_curves_svg(const std::filesystem::path& path,
                               const TransferExperimentResult& result, bool pr);

}  // namespace rootnet

#endif  // ROOTNET_EXPERIMENT_HPP_
