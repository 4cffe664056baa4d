// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/protocol.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cba {

void ProtocolParams::validate() const {
    if (n < 1) throw std::invalid_argument("params: n must be >= 1");
    if (3ULL * t + 1 > n) throw std::invalid_argument("params: need 3t + 1 <= n");
    if (alpha < 1.0) throw std::invalid_argument("params: alpha must be >= 1");
    if (gamma < 1.0) throw std::invalid_argument("params: gamma must be >= 1");
    if (log_base <= 1.0) throw std::invalid_argument("params: log_base must be > 1");
}

bool ProtocolParams::whp_claimed() const {
    return alpha - 4.0 * std::sqrt(alpha) >= gamma;
}

CommitteeLayout committee_count(const ProtocolParams& params) {
    params.validate();
    CommitteeLayout layout;
    layout.n = params.n;
    if (params.t == 0) {
        layout.c = 1;
        layout.s = params.n;
        return layout;
    }
    double logn = std::log(static_cast<double>(params.n)) / std::log(params.log_base);
    double tsq_over_n = std::ceil(static_cast<double>(params.t) * params.t / params.n);
    double term1 = params.alpha * tsq_over_n * logn;
    double term2 = 3.0 * params.alpha * params.t / logn;
    double c_real = std::min(term1, term2);
    // Snap float dust below mathematically-integral values (e.g. 42 computed
    // as 42.000000000000007) so ceil does not bump them up a committee.
    double c_ceil = std::ceil(c_real - 1e-9);
    if (c_ceil < 1.0) c_ceil = 1.0;
    if (c_ceil > static_cast<double>(params.n)) c_ceil = static_cast<double>(params.n);
    layout.c = static_cast<std::uint32_t>(c_ceil);
    layout.s = params.n / layout.c;
    return layout;
}

std::uint32_t payload_bits(const PhaseMessage& msg, std::uint32_t c) {
    std::uint32_t phase_bits = c <= 1 ? 0 : std::bit_width(c - 1);
    return phase_bits + 2 + (msg.coin != 0 ? 2 : 0);
}

PhaseMessage round1_send(const NodeState& state) {
    return PhaseMessage{state.phase, 1, state.val, state.decided, 0};
}

namespace {

// Count per-bit occurrences of current-phase messages; round-2 counting is
// restricted to decided=true. Anything malformed for this slot is skipped.
struct BitCounts {
    std::uint32_t c0 = 0;
    std::uint32_t c1 = 0;
};

BitCounts count_messages(std::span<const ReceivedMessage> msgs, std::uint32_t phase,
                         std::uint8_t round, bool decided_only) {
    BitCounts counts;
    for (const ReceivedMessage& rm : msgs) {
        const PhaseMessage& m = rm.msg;
        if (m.phase != phase || m.round != round) continue;
        if (decided_only && !m.decided) continue;
        if (m.val > 1) continue;
        if (m.val == 0)
            ++counts.c0;
        else
            ++counts.c1;
    }
    return counts;
}

} // namespace

NodeState round1_receive(NodeState state, std::span<const ReceivedMessage> msgs,
                         const ProtocolParams& params) {
    BitCounts counts = count_messages(msgs, state.phase, 1, false);
    std::uint32_t need = params.n - params.t;
    if (counts.c1 >= need) {
        state.val = 1;
        state.decided = true;
    } else if (counts.c0 >= need) {
        state.val = 0;
        state.decided = true;
    } else {
        state.decided = false;
    }
    return state;
}

NodeState round2_receive(NodeState state, std::span<const ReceivedMessage> msgs,
                         const ProtocolParams& params, const CommitteeLayout& layout,
                         std::span<const CoinContribution> coin_msgs, Round2Diag* diag) {
    BitCounts counts = count_messages(msgs, state.phase, 2, true);
    std::uint32_t strong = params.n - params.t;
    std::uint32_t weak = params.t + 1;
    Round2Diag local;
    Round2Diag& d = diag ? *diag : local;
    d = Round2Diag{};
    d.conflicting_counts = counts.c0 >= weak && counts.c1 >= weak;

    auto adopt = [&](std::uint8_t b, bool fin) {
        state.val = b;
        state.decided = true;
        state.finish = state.finish || fin;
    };
    if (counts.c1 >= strong || counts.c0 >= strong) {
        d.case_id = 1;
        adopt(counts.c1 >= strong ? 1 : 0, true);
    } else if (counts.c1 >= weak || counts.c0 >= weak) {
        d.case_id = 2;
        std::uint8_t b;
        if (counts.c1 >= weak && counts.c0 >= weak)
            b = counts.c1 >= counts.c0 ? 1 : 0; // equivocation conflict, tie -> 1
        else
            b = counts.c1 >= weak ? 1 : 0;
        adopt(b, false);
    } else {
        d.case_id = 3;
        auto [lo, hi] = layout.member_range(state.phase);
        std::uint8_t coin =
            static_cast<std::uint8_t>(aggregate_coin_range(coin_msgs, lo, hi));
        d.coin = coin;
        state.val = coin;
        state.decided = false;
    }
    return state;
}

std::optional<CoinContribution> coin_round_send(const NodeState& state,
                                                const CommitteeLayout& layout, Rng& rng) {
    if (layout.committee_of(state.id) != state.phase) return std::nullopt;
    return CoinContribution{state.id, sample_contribution(rng)};
}

NodeState advance_phase(NodeState state, const CommitteeLayout& layout, bool las_vegas) {
    if (state.phase >= layout.c) {
        if (!las_vegas) {
            state.output = state.val;
            return state;
        }
        state.phase = 1;
        return state;
    }
    state.phase += 1;
    return state;
}

} // namespace cba
