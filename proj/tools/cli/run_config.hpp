// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// INI run configuration shared by every rootnet command.

#ifndef ROOTNET_TOOLS_CLI_RUN_CONFIG_HPP_
#define ROOTNET_TOOLS_CLI_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "rootnet/experiment.hpp"
#include "rootnet/superpixel.hpp"
#include "rootnet/synthgen.hpp"
#include "rootnet/training.hpp"
#include "rootnet/transfer.hpp"

namespace rootnet::cli {

enum class Command { synth, train, eval, segment, slic, transfer_experiment };

std::string to_string(Command c);
Command parse_command(std::string_view name);

struct SynthSection {
  bool present = false;
  /// default, source or target.
  std::string family = "default";
  GenParams params;
  int count = 28;
  bool pair = false;
  DomainPairOptions pair_options;
  /// Domain-pair generator seeds; default to run.seed and run.seed + 1.
  std::uint64_t source_seed = 0;
  std::uint64_t target_seed = 0;
};

struct DataSection {
  std::filesystem::path dataset;
  std::filesystem::path eval_dataset;
  std::filesystem::path source_dataset;
  std::filesystem::path target_dataset;
  double train_fraction = 0.9;
  int tile_rows = 1;
  int tile_cols = 1;
};

struct MetricsSection {
  std::size_t bins = kDefaultBins;
  double fpr_target = 0.01;
  double threshold = 0.4;
};

struct EvalSection {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
};

struct SegmentSection {
  std::filesystem::path checkpoint;
  std::filesystem::path images;
  std::optional<double> threshold;
  std::optional<double> at_fpr;
  std::filesystem::path calibration;
};

struct SlicSection {
  std::filesystem::path images;
  std::filesystem::path masks;
  SlicParams params;
};

struct RunConfig {
  Command command = Command::train;
  std::string experiment = "run";
  std::filesystem::path out = "runs";
  std::uint64_t seed = 1;
  int threads = 1;
  int trials = 1;
  bool svg = false;

  TrainConfig train;
  /// Median background/root ratio of the training tiles.
  bool auto_pos_weight = false;
  InitMode init;

  SynthSection synth;
  DataSection data;
  MetricsSection metrics;
  EvalSection eval;
  SegmentSection segment;
  SlicSection slic;
  TransferExperimentConfig transfer;

  /// Resolved key/value tree, echoed into the run directory.
  boost::property_tree::ptree tree;
};

/// `key=value` overrides use "section.key" names.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  bool svg = false;
  bool pair = false;
  std::optional<double> at_fpr;
  std::vector<std::string> assignments;
};

/// Parses, applies overrides and validates everything the command needs,
/// including that referenced paths exist. Throws ConfigError.
RunConfig load_run_config(Command command, const std::string& ini_text, const Overrides& overrides = {});
RunConfig load_run_config_file(Command command, const std::filesystem::path& path,
                               const Overrides& overrides = {});

}  // namespace rootnet::cli

#endif  // ROOTNET_TOOLS_CLI_RUN_CONFIG_HPP_
