// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

// Benchmarks the parallel kernels against their serial reference
// implementations and insists the outputs are bit-identical. Run with
// --smoke for a fast correctness-only pass.

#include <chrono>
#include <cstdio>
#include <string>

#include "cba/common_coin.hpp"
#include "cba/sim.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const char* kernel, double serial_s, double parallel_s, bool identical) {
    std::printf("%-14s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   identical %s\n",
                kernel, serial_s, parallel_s,
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0,
                identical ? "yes" : "NO");
}

} // namespace

int main(int argc, char** argv) {
    const bool smoke = argc > 1 && std::string(argv[1]) == "--smoke";
    int mismatches = 0;

    {
        cba::CoinTrialSetup setup{256, 248, 8};
        const std::uint64_t trials = smoke ? 200000 : 5000000;
        auto start = Clock::now();
        cba::CoinGuarantee serial =
            cba::estimate_coin_guarantee_serial(setup, cba::AdversaryShift::worst(),
                                                trials, 42);
        double serial_s = seconds_since(start);
        start = Clock::now();
        cba::CoinGuarantee parallel =
            cba::estimate_coin_guarantee(setup, cba::AdversaryShift::worst(), trials, 42);
        double parallel_s = seconds_since(start);
        bool same = serial.delta == parallel.delta && serial.epsilon == parallel.epsilon &&
                    serial.empirical_delta == parallel.empirical_delta &&
                    serial.empirical_eps0 == parallel.empirical_eps0 &&
                    serial.p_pos == parallel.p_pos && serial.p_neg == parallel.p_neg &&
                    serial.trials == parallel.trials;
        mismatches += !same;
        report("coin-estimate", serial_s, parallel_s, same);
    }

    {
        cba::TrialConfig base;
        base.params = cba::ProtocolParams{64, 21, 1.0, 1.0, 2.0, true};
        base.adversary = "coinkiller";
        base.inputs = cba::InputMode::Random;
        base.seed = 7;
        base.max_phases = 4 * cba::committee_count(base.params).c;
        const std::uint64_t trials = smoke ? 200 : 2000;
        auto start = Clock::now();
        std::vector<cba::TrialResult> serial = cba::run_batch_serial(base, trials);
        double serial_s = seconds_since(start);
        start = Clock::now();
        std::vector<cba::TrialResult> parallel = cba::run_batch(base, trials);
        double parallel_s = seconds_since(start);
        bool same = serial == parallel;
        mismatches += !same;
        report("trial-batch", serial_s, parallel_s, same);
    }

    return mismatches ? 1 : 0;
}
