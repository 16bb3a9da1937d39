// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_TOOLS_CLI_APP_HPP_
#define ROOTNET_TOOLS_CLI_APP_HPP_

#include <iosfwd>

namespace rootnet::cli {

/// Parses the command line, runs one command and returns the process exit code.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rootnet::cli

#endif  // ROOTNET_TOOLS_CLI_APP_HPP_
