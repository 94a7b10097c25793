// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return edl::cli::run(args, std::cout, std::cerr);
}
