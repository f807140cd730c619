// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Entry point of the dsor command line tool, separated from main() so tests
// can drive it in-process.

#ifndef DSOR_TOOLS_CLI_HPP_
#define DSOR_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace dsor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the tool with args[0] as the program name. Report paths go to `out`,
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsor::cli

#endif  // DSOR_TOOLS_CLI_HPP_
