// SPDX-License-Identifier: MIT
/**
 * @file cli.hpp
 * @brief Batch front-end shared by the `pqvar` executable and the tests.
 *
 * Every command owns a table of typed parameters with defaults. The
 * effective configuration is built as defaults < config file < flags and is
 * echoed into every artifact, so a run is a pure function of it.
 *
 * Exit codes: 0 success, 1 input error (including unknown commands and
 * malformed configs), 2 refusal because a hypothesis check failed.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pqvar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitHypothesis = 2;

/// Runs one command. `args` excludes the program name, e.g.
/// {"condition-check", "--p", "1.4", "--q", "1"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Names of the supported commands.
std::vector<std::string> command_names();

}  // namespace pqvar::cli
