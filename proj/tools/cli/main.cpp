// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli/app.hpp"

int main(int argc, char** argv) { return rootnet::cli::run_app(argc, argv, std::cout, std::cerr); }
