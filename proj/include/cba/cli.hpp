// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <string>
#include <vector>

namespace cba {

/// Parse argv[1:] and run one subcommand (run | sweep | coin-test | verify).
/// Returns the process exit status: 0 on success (and on --help), nonzero on
/// parse errors, invalid parameter combinations, unwritable outputs, or
/// failed assertions in coin-test/verify. Every flag can also be supplied
/// through a flat key=value config file (--config); command-line values take
/// precedence, and the effective configuration is echoed into the output
/// header.
int parse_and_dispatch(std::vector<std::string> args);

} // namespace cba
