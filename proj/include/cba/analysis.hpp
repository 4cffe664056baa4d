// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cba/sim.hpp"

namespace cba {

struct BatchSummary {
    std::size_t trials = 0;
    double mean_phases = 0.0;
    double median_phases = 0.0; // midpoint of the two central values when even
    double p95_phases = 0.0;    // smallest value covering 95% of trials
    double agreement_rate = 0.0;
    double validity_rate = 0.0;
    double mean_q = 0.0;
    std::pair<double, double> agreement_ci{0.0, 0.0}; // Wilson, 95%
    std::pair<double, double> validity_ci{0.0, 0.0};
};

/// Wilson score interval at 95% for `successes` out of `total` Bernoulli
/// draws. Always contains the point estimate, stays inside [0, 1], and is
/// well-defined down to total = 1. Throws std::invalid_argument on total = 0
/// or successes > total.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t total);

/// Order-independent batch statistics. Throws std::invalid_argument on an
/// empty batch.
BatchSummary summarize(std::span<const TrialResult> results);

// The three runtime shapes the experiments are plotted against, unscaled
// (constants are free, only the growth matters):
//   upper_new = min(x^2 log n / n, x / log n)
//   upper_cc  = x / log n
//   lower_bb  = x / sqrt(n log n)
// Logs are base 2. The first two coincide exactly when x log^2 n >= n.
struct RefCurves {
    double upper_new = 0.0;
    double upper_cc = 0.0;
    double lower_bb = 0.0;
    bool operator==(const RefCurves&) const = default;
};

/// x is a corruption count (t or q); requires 0 <= x < n/3 and n >= 2,
/// throws std::invalid_argument otherwise. x = 0 gives all zeros.
RefCurves reference_curves(std::uint64_t n, std::uint64_t x);

/// The single multiplicative constant a minimizing the least-squares gap
/// between log(observed) and log(a * reference), i.e. the geometric mean of
/// observed/reference. Spans must be equal-sized, non-empty and positive;
/// throws std::invalid_argument otherwise. Presentation-only plumbing for
/// plots, no asymptotic claim attached.
double fit_log_scale(std::span<const double> reference, std::span<const double> observed);

} // namespace cba
