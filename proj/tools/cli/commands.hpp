// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_TOOLS_CLI_COMMANDS_HPP_
#define ROOTNET_TOOLS_CLI_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/run_config.hpp"

namespace rootnet::cli {

/// Creates out/<experiment>-<command>-YYYYmmdd-HHMMSS, adding -1, -2, ...
/// when the name is taken.
std::filesystem::path make_run_dir(const RunConfig& config);

/// Runs one command inside `run_dir`. `config_text` is echoed as config.ini.
/// Reports go to `out`, progress to `log`.
void run_command(const RunConfig& config, const std::string& config_text,
                 const std::filesystem::path& run_dir, std::ostream& out, std::ostream& log);

/// A single PNG, or the sorted PNGs of a directory (its images/ subdirectory
/// when present).
std::vector<std::filesystem::path> collect_pngs(const std::filesystem::path& path);

/// 0 success, 2 config, 3 data, 4 divergence, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace rootnet::cli

#endif  // ROOTNET_TOOLS_CLI_COMMANDS_HPP_
