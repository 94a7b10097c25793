// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace edl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the command line `args` (args[0] is the program name). Output that
/// would go to stdout/stderr is written to `out`/`err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edl::cli
