// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/common_coin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cba {

int sample_contribution(Rng& rng) {
    return rng.bit() ? +1 : -1;
}

namespace {

// Shared tail of both aggregate variants once contributions are known to be
// sorted by sender: equivocators (adjacent duplicates) contribute 0.
template <typename InRange>
int aggregate_sorted(std::span<const CoinContribution> contributions,
                     InRange designated, std::vector<NodeId>* equivocators) {
    long long sum = 0;
    std::size_t i = 0;
    while (i < contributions.size()) {
        std::size_t j = i + 1;
        while (j < contributions.size() && contributions[j].sender == contributions[i].sender)
            ++j;
        if (designated(contributions[i].sender)) {
            if (j - i > 1) {
                if (equivocators) equivocators->push_back(contributions[i].sender);
            } else {
                sum += contributions[i].value;
            }
        }
        i = j;
    }
    return sum >= 0 ? 1 : 0; // tie at 0 maps to 1
}

template <typename InRange>
int aggregate_any(std::span<const CoinContribution> contributions,
                  InRange designated, std::vector<NodeId>* equivocators) {
    if (std::is_sorted(contributions.begin(), contributions.end(),
                       [](const CoinContribution& a, const CoinContribution& b) {
                           return a.sender < b.sender;
                       }))
        return aggregate_sorted(contributions, designated, equivocators);
    std::vector<CoinContribution> copy(contributions.begin(), contributions.end());
    std::sort(copy.begin(), copy.end(),
              [](const CoinContribution& a, const CoinContribution& b) {
                  return a.sender < b.sender;
              });
    return aggregate_sorted(std::span<const CoinContribution>(copy), designated, equivocators);
}

} // namespace

int aggregate_coin(std::span<const CoinContribution> contributions,
                   std::span<const NodeId> designated,
                   std::vector<NodeId>* equivocators) {
    return aggregate_any(
        contributions,
        [&](NodeId id) {
            return std::find(designated.begin(), designated.end(), id) != designated.end();
        },
        equivocators);
}

int aggregate_coin_range(std::span<const CoinContribution> contributions,
                         NodeId lo, NodeId hi, std::vector<NodeId>* equivocators) {
    return aggregate_any(
        contributions, [&](NodeId id) { return id >= lo && id <= hi; }, equivocators);
}

double pz_bound(const CoinTrialSetup& setup) {
    if (setup.g == 0) throw std::invalid_argument("pz_bound: no honest contributors (g = 0)");
    double g = static_cast<double>(setup.g);
    double theta = static_cast<double>(setup.n) / (4.0 * g);
    if (theta >= 1.0) return 0.0;
    return (1.0 - theta) * (1.0 - theta) * g * g / (3.0 * g * g - 2.0 * g);
}

std::int64_t exact_moment(int g, int power) {
    if (g < 1 || g > 20) throw std::invalid_argument("exact_moment: g must be in [1, 20]");
    if (power != 2 && power != 4) throw std::invalid_argument("exact_moment: power must be 2 or 4");
    std::int64_t total = 0;
    const std::uint32_t states = 1u << g;
    for (std::uint32_t mask = 0; mask < states; ++mask) {
        std::int64_t x = 2 * std::popcount(mask) - g;
        std::int64_t x2 = x * x;
        total += power == 2 ? x2 : x2 * x2;
    }
    // Symmetric integer moments: the sum over 2^g states is divisible by 2^g.
    if (total % static_cast<std::int64_t>(states) != 0)
        throw std::logic_error("exact_moment: non-integral expectation");
    return total / static_cast<std::int64_t>(states);
}

namespace {

struct ShiftTallies {
    std::uint64_t ge = 0;        // X >= f
    std::uint64_t gt = 0;        // X > f
    std::uint64_t lt = 0;        // X < -f
    std::uint64_t shift_neg = 0; // X + fixed_shift < 0 (fixed mode only)
};

// Honest sum of g fair +-1 values: 64 sign bits per engine word, popcount.
// Distributionally identical to g calls of sample_contribution, just faster.
long long honest_sum(Rng& rng, std::uint32_t g) {
    long long ones = 0;
    std::uint32_t left = g;
    while (left >= 64) {
        ones += std::popcount(rng.u64());
        left -= 64;
    }
    if (left > 0) ones += std::popcount(rng.u64() & ((~0ULL) >> (64 - left)));
    return 2 * ones - static_cast<long long>(g);
}

void tally_trial(const CoinTrialSetup& setup, AdversaryShift shift,
                 std::uint64_t trial_seed, ShiftTallies& t) {
    Rng rng(trial_seed);
    long long x = honest_sum(rng, setup.g);
    long long f = setup.f;
    if (x >= f) ++t.ge;
    if (x > f) ++t.gt;
    if (x < -f) ++t.lt;
    if (!shift.worst_case && x + shift.fixed < 0) ++t.shift_neg;
}

CoinGuarantee finish_estimate(const CoinTrialSetup& setup, AdversaryShift shift,
                              std::uint64_t trials, const ShiftTallies& t) {
    CoinGuarantee out;
    out.trials = trials;
    double nt = static_cast<double>(trials);
    out.p_pos = static_cast<double>(t.gt) / nt;
    out.p_neg = static_cast<double>(t.lt) / nt;
    if (shift.worst_case) {
        std::uint64_t agree = t.ge + t.lt;
        out.empirical_delta = static_cast<double>(agree) / nt;
        out.empirical_eps0 = agree ? static_cast<double>(t.lt) / static_cast<double>(agree) : 0.0;
    } else {
        out.empirical_delta = 1.0;
        out.empirical_eps0 = static_cast<double>(t.shift_neg) / nt;
    }
    double b = pz_bound(setup);
    double root_half = std::floor(std::sqrt(static_cast<double>(setup.n)) / 2.0);
    if (setup.f == 0 && b > 0.0) {
        // No corruptions possible: every outcome satisfies X >= 0 or X < 0,
        // so agreement is certain and only the bias bound is nontrivial.
        out.delta = 1.0;
        out.epsilon = b;
    } else if (b > 0.0 && static_cast<double>(setup.f) <= root_half) {
        out.delta = std::min(1.0, 2.0 * b);
        out.epsilon = b;
    } else {
        out.delta = out.empirical_delta;
        // epsilon is the two-sided bound eps <= Pr(0 | agree) <= 1 - eps, so
        // the reportable value is capped by the nearer side.
        out.epsilon = std::min(out.empirical_eps0, 1.0 - out.empirical_eps0);
    }
    return out;
}

void validate_estimate_args(const CoinTrialSetup& setup, AdversaryShift shift,
                            std::uint64_t trials) {
    if (setup.g < 1 || setup.g + setup.f != setup.n)
        throw std::invalid_argument("estimate_coin_guarantee: need g >= 1 and g + f = n");
    if (trials == 0) throw std::invalid_argument("estimate_coin_guarantee: trials = 0");
    if (!shift.worst_case &&
        static_cast<std::uint32_t>(std::abs(shift.fixed)) > setup.f)
        throw std::invalid_argument("estimate_coin_guarantee: |shift| exceeds f");
}

} // namespace

CoinGuarantee estimate_coin_guarantee_serial(const CoinTrialSetup& setup,
                                             AdversaryShift shift,
                                             std::uint64_t trials,
                                             std::uint64_t seed) {
    validate_estimate_args(setup, shift, trials);
    ShiftTallies t;
    for (std::uint64_t k = 0; k < trials; ++k)
        tally_trial(setup, shift, split_seed(seed, k), t);
    return finish_estimate(setup, shift, trials, t);
}

CoinGuarantee estimate_coin_guarantee(const CoinTrialSetup& setup,
                                      AdversaryShift shift,
                                      std::uint64_t trials,
                                      std::uint64_t seed,
                                      int threads) {
    validate_estimate_args(setup, shift, trials);
    std::uint64_t ge = 0, gt = 0, lt = 0, sn = 0;
#ifdef _OPENMP
    int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) reduction(+ : ge, gt, lt, sn)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(trials); ++k) {
        ShiftTallies t;
        tally_trial(setup, shift, split_seed(seed, static_cast<std::uint64_t>(k)), t);
        ge += t.ge;
        gt += t.gt;
        lt += t.lt;
        sn += t.shift_neg;
    }
#else
    (void)threads;
    for (std::uint64_t k = 0; k < trials; ++k) {
        ShiftTallies t;
        tally_trial(setup, shift, split_seed(seed, k), t);
        ge += t.ge;
        gt += t.gt;
        lt += t.lt;
        sn += t.shift_neg;
    }
#endif
    ShiftTallies t{ge, gt, lt, sn};
    return finish_estimate(setup, shift, trials, t);
}

} // namespace cba
