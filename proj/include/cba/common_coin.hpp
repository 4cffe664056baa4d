// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cba/rng.hpp"

namespace cba {

using NodeId = std::uint32_t; // nodes are numbered 1..n

// One coin flip broadcast by a designated (committee) node.
struct CoinContribution {
    NodeId sender = 0;
    int value = 0; // exactly -1 or +1
    bool operator==(const CoinContribution&) const = default;
};

// Scalar model of one committee coin round: g honest contributors, f
// adversary-controlled ones, n = g + f contributors total. Every observer's
// delivered sum lies in [X-f, X+f] where X is the honest sum.
struct CoinTrialSetup {
    std::uint32_t n = 0;
    std::uint32_t g = 0;
    std::uint32_t f = 0;
};

// Measured (and, where available, analytic) quality of the coin:
//   delta    — lower bound on Pr(all honest observers agree)
//   epsilon  — two-sided bias bound: epsilon <= Pr(0 | agree) <= 1 - epsilon
// When f <= floor(sqrt(n)/2) the analytic floors from pz_bound are attached;
// otherwise delta/epsilon just repeat the empirical point estimates.
struct CoinGuarantee {
    double delta = 0.0;
    double epsilon = 0.0;
    double empirical_delta = 0.0; // Pr(no admissible shift can split observers)
    double empirical_eps0 = 0.0;  // Pr(outcome = 0 | that event)
    double p_pos = 0.0;           // one-sided Pr(X > f)
    double p_neg = 0.0;           // one-sided Pr(X < -f)
    std::uint64_t trials = 0;
};

// Adversary influence on the scalar sum. Worst case: after seeing the honest
// sum X, add -sign(X)*f. A fixed shift models a non-adaptive adversary that
// cannot equivocate (all observers see the same shifted sum).
struct AdversaryShift {
    bool worst_case = true;
    int fixed = 0;
    static AdversaryShift worst() { return {true, 0}; }
    static AdversaryShift exactly(int s) { return {false, s}; }
};

/// One fair coin flip: +1 on stream bit 1, -1 on bit 0.
int sample_contribution(Rng& rng);

/// Sum the contributions of designated senders and take the sign, ties to 1.
/// Non-designated senders are discarded; a designated sender with no
/// contribution counts as 0 (crash). A sender appearing more than once is an
/// equivocator: all its copies are dropped (0) and it is reported through
/// `equivocators` when given.
int aggregate_coin(std::span<const CoinContribution> contributions,
                   std::span<const NodeId> designated,
                   std::vector<NodeId>* equivocators = nullptr);

/// Same, with the designated set given as the inclusive ID range [lo, hi]
/// (committees are contiguous); this is the allocation-free path the
/// simulator uses.
int aggregate_coin_range(std::span<const CoinContribution> contributions,
                         NodeId lo, NodeId hi,
                         std::vector<NodeId>* equivocators = nullptr);

/// Paley-Zygmund lower bound on Pr(X > sqrt(n)/2) for the honest sum X of g
/// fair +-1 values, applied to X^2 with theta = n/(4g):
///   (1-theta)^2 * E[X^2]^2 / E[X^4] = (1-theta)^2 * g^2 / (3g^2 - 2g).
/// Returns 0 when theta >= 1. Throws std::invalid_argument when g = 0.
/// https://en.wikipedia.org/wiki/Paley%E2%80%93Zygmund_inequality
double pz_bound(const CoinTrialSetup& setup);

/// Exact E[X^power] for X a sum of g fair +-1 values, by exhaustive
/// enumeration of all 2^g sign vectors. power must be 2 or 4 and 1 <= g <= 20
/// (the result is integral for these powers). Serves as the oracle for the
/// closed forms E[X^2] = g and E[X^4] = 3g^2 - 2g.
std::int64_t exact_moment(int g, int power);

/// Monte Carlo estimate of the coin guarantee under the scalar shift model.
/// Worst-case mode: the agreement event is "no shift in [-f, f] can make two
/// observers output differently", i.e. X >= f (all sums >= 0, output 1) or
/// X < -f (all sums < 0, output 0); conditioned on it the outcome is forced.
/// Fixed-shift mode: all observers see X+shift, so they always agree and
/// empirical_eps0 = Pr(X + shift < 0). One-sided tallies Pr(X > f) and
/// Pr(X < -f) are always recorded. Deterministic in (setup, shift, seed).
CoinGuarantee estimate_coin_guarantee(const CoinTrialSetup& setup,
                                      AdversaryShift shift,
                                      std::uint64_t trials,
                                      std::uint64_t seed,
                                      int threads = 0);

/// Serial reference for the estimator; bit-identical results by construction
/// (per-trial counter-derived streams).
CoinGuarantee estimate_coin_guarantee_serial(const CoinTrialSetup& setup,
                                             AdversaryShift shift,
                                             std::uint64_t trials,
                                             std::uint64_t seed);

} // namespace cba
