// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli/app.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <omp.h>

#include "cli/commands.hpp"
#include "rootnet/errors.hpp"

namespace rootnet::cli {

namespace {

std::string read_config_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Root segmentation with U-Net models: data synthesis, training, evaluation and transfer studies",
               "rootnet"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<double> at_fpr;
  bool svg = false;
  bool pair = false;
  std::vector<std::string> assignments;

  app.add_option("--config", config_path, "INI run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Overrides run.seed");
  app.add_option("--out", out_dir, "Overrides run.out");
  app.add_option("--threads", threads, "Overrides run.threads")->check(CLI::PositiveNumber);
  app.add_flag("--svg", svg, "Also write SVG plots");
  app.add_flag("--pair", pair, "synth: write a source/target domain pair");
  app.add_option("--at-fpr", at_fpr, "segment: threshold at this calibration FPR")->check(CLI::Range(0.0, 1.0));
  app.add_option("--set", assignments, "Overrides any key, as section.key=value")->take_all();

  const char* names[] = {"synth", "train", "eval", "segment", "slic", "transfer-experiment"};
  const char* help[] = {"Generate a synthetic dataset",
                        "Train one or more models",
                        "Evaluate a checkpoint: ROC/PR curves and AUCs",
                        "Write binary root masks",
                        "Compute SLIC superpixel maps",
                        "Compare S, I, P-En and P-EnDe initializations"};
  for (int i = 0; i < 6; ++i) app.add_subcommand(names[i], help[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }

  try {
    const Command command = parse_command(app.get_subcommands().front()->get_name());
    Overrides ov;
    ov.seed = seed;
    if (out_dir) ov.out = *out_dir;
    ov.threads = threads;
    ov.svg = svg;
    ov.pair = pair;
    ov.at_fpr = at_fpr;
    ov.assignments = assignments;
    const std::string text = read_config_text(config_path);
    const RunConfig config = load_run_config(command, text, ov);
    omp_set_num_threads(config.threads);
    const auto dir = make_run_dir(config);
    err << "run directory: " << dir.string() << '\n';
    run_command(config, text, dir, out, err);
    return 0;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "error: " << e.what() << '\n';
    return code;
  }
}

}  // namespace rootnet::cli
