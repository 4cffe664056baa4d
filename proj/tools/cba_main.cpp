// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include <string>
#include <vector>

#include "cba/cli.hpp"

int main(int argc, char** argv) {
    return cba::parse_and_dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
