// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cba {

namespace {

constexpr double kZ95 = 1.959963984540054; // two-sided 95% normal quantile

double sorted_quantile_value(const std::vector<std::uint32_t>& sorted, double q) {
    // Smallest element whose rank covers fraction q of the sample.
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(sorted.size())));
    if (idx > 0) --idx;
    return static_cast<double>(sorted[idx]);
}

} // namespace

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t total) {
    if (total == 0) throw std::invalid_argument("wilson_interval: total = 0");
    if (successes > total)
        throw std::invalid_argument("wilson_interval: successes > total");
    double n = static_cast<double>(total);
    double p = static_cast<double>(successes) / n;
    double z2 = kZ95 * kZ95;
    double denom = 1.0 + z2 / n;
    double center = p + z2 / (2.0 * n);
    double spread = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    double lo = (center - spread) / denom;
    double hi = (center + spread) / denom;
    return {std::max(0.0, lo), std::min(1.0, hi)};
}

BatchSummary summarize(std::span<const TrialResult> results) {
    if (results.empty()) throw std::invalid_argument("summarize: empty batch");
    BatchSummary out;
    out.trials = results.size();

    std::vector<std::uint32_t> phases;
    phases.reserve(results.size());
    std::uint64_t agree = 0;
    std::uint64_t valid = 0;
    double phase_sum = 0.0;
    double q_sum = 0.0;
    for (const TrialResult& r : results) {
        phases.push_back(r.phases_used);
        phase_sum += r.phases_used;
        q_sum += r.q;
        if (r.agreement) ++agree;
        if (r.validity) ++valid;
    }
    std::sort(phases.begin(), phases.end());

    double n = static_cast<double>(results.size());
    out.mean_phases = phase_sum / n;
    std::size_t mid = phases.size() / 2;
    out.median_phases = phases.size() % 2 == 1
        ? static_cast<double>(phases[mid])
        : (static_cast<double>(phases[mid - 1]) + static_cast<double>(phases[mid])) / 2.0;
    out.p95_phases = sorted_quantile_value(phases, 0.95);
    out.agreement_rate = static_cast<double>(agree) / n;
    out.validity_rate = static_cast<double>(valid) / n;
    out.mean_q = q_sum / n;
    out.agreement_ci = wilson_interval(agree, results.size());
    out.validity_ci = wilson_interval(valid, results.size());
    return out;
}

RefCurves reference_curves(std::uint64_t n, std::uint64_t x) {
    if (n < 2) throw std::invalid_argument("reference_curves: n must be >= 2");
    if (3 * x >= n) throw std::invalid_argument("reference_curves: need x < n/3");
    RefCurves out;
    if (x == 0) return out;
    double nd = static_cast<double>(n);
    double xd = static_cast<double>(x);
    double logn = std::log2(nd);
    out.upper_cc = xd / logn;
    out.upper_new = std::min(xd * xd * logn / nd, out.upper_cc);
    out.lower_bb = xd / std::sqrt(nd * logn);
    return out;
}

double fit_log_scale(std::span<const double> reference, std::span<const double> observed) {
    if (reference.size() != observed.size() || reference.empty())
        throw std::invalid_argument("fit_log_scale: need equal-sized non-empty spans");
    double acc = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (reference[i] <= 0.0 || observed[i] <= 0.0)
            throw std::invalid_argument("fit_log_scale: values must be positive");
        acc += std::log(observed[i] / reference[i]);
    }
    return std::exp(acc / static_cast<double>(reference.size()));
}

} // namespace cba
