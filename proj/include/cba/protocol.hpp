// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cba/common_coin.hpp"
#include "cba/rng.hpp"

namespace cba {

// Protocol-level knobs. alpha scales the committee count; with the default
// alpha = 18 (smallest integer with alpha - 4*sqrt(alpha) >= 1) the failure
// probability guarantee applies, while alpha = 1 is the experiment mode where
// scaling shapes are visible at desk sizes. gamma is the failure exponent the
// guarantee is claimed for.
struct ProtocolParams {
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    double alpha = 18.0;
    double gamma = 1.0;
    double log_base = 2.0;
    bool las_vegas = false;

    void validate() const; // throws std::invalid_argument
    bool whp_claimed() const; // alpha - 4*sqrt(alpha) >= gamma
};

// Phase/committee schedule. Nodes 1..s form committee 1, the next s nodes
// committee 2, and so on; the trailing remainder of IDs folds into committee
// c, so committees 1..c-1 have exactly s members and the last one absorbs
// n - (c-1)*s.
struct CommitteeLayout {
    std::uint32_t n = 0;
    std::uint32_t c = 1;
    std::uint32_t s = 1;

    std::uint32_t committee_of(NodeId id) const {
        std::uint32_t idx = (id + s - 1) / s; // ceil(id / s)
        return idx < c ? idx : c;
    }
    // Inclusive member ID range of committee i (1-based).
    std::pair<NodeId, NodeId> member_range(std::uint32_t i) const {
        NodeId lo = (i - 1) * s + 1;
        NodeId hi = i < c ? i * s : n;
        return {lo, hi};
    }
    std::vector<NodeId> members(std::uint32_t i) const {
        auto [lo, hi] = member_range(i);
        std::vector<NodeId> out;
        for (NodeId id = lo; id <= hi; ++id) out.push_back(id);
        return out;
    }
};

/// c = clamp(ceil(min(alpha*ceil(t^2/n)*log n, 3*alpha*t/log n)), 1, n) with
/// log taken in params.log_base; s = floor(n/c). t = 0 degenerates to a
/// single committee of everyone.
CommitteeLayout committee_count(const ProtocolParams& params);

// Per-node protocol state. phase holds the wrapped phase index (1..c; the
// Las Vegas wrapper starts over after committee c). output is set exactly
// when the node has terminated.
struct NodeState {
    NodeId id = 0;
    std::uint8_t val = 0;
    bool decided = false;
    bool finish = false;
    std::uint32_t phase = 1;
    std::optional<std::uint8_t> output;
    bool operator==(const NodeState&) const = default;
};

// Wire format of one broadcast. coin is 0 when absent, otherwise the +-1
// contribution piggybacked on round-2 messages of the sender's designated
// phase. The round number is implicit in the synchronous schedule, so the
// payload is phase (ceil(log2 c) bits) + val + decided + 2 coin bits.
struct PhaseMessage {
    std::uint32_t phase = 0;
    std::uint8_t round = 0; // 1 or 2
    std::uint8_t val = 0;
    bool decided = false;
    std::int8_t coin = 0;
    bool operator==(const PhaseMessage&) const = default;
};

/// Payload size in bits under the CONGEST accounting above.
std::uint32_t payload_bits(const PhaseMessage& msg, std::uint32_t c);

struct ReceivedMessage {
    NodeId sender = 0;
    PhaseMessage msg;
    bool operator==(const ReceivedMessage&) const = default;
};

// Which arm of the round-2 case split fired, for audits and tests.
struct Round2Diag {
    int case_id = 0;          // 1, 2 or 3
    bool conflicting_counts = false; // both bits reached t+1 (equivocation)
    std::optional<std::uint8_t> coin; // coin consumed in case 3
};

/// Round-1 broadcast: (phase, 1, val, decided). If finish is already set the
/// caller terminates the node right after this broadcast; it neither receives
/// nor sends anything afterwards.
PhaseMessage round1_send(const NodeState& state);

/// Round-1 receive: if at least n-t delivered messages of the current phase
/// carry the same val b (decided fields ignored), adopt b and set decided;
/// otherwise clear decided and keep val. Messages for another phase or round
/// count as absent.
NodeState round1_receive(NodeState state, std::span<const ReceivedMessage> msgs,
                         const ProtocolParams& params);

/// Round-2 receive, in precedence order over messages (phase, 2, b, true):
///   case 1: some b reaches n-t    -> val := b, decided, finish
///   case 2: some b reaches t+1    -> val := b, decided
///   case 3: otherwise             -> val := committee coin, not decided
/// If both bits reach t+1 (possible only under equivocation; honest round-1
/// deciders of one phase all hold one value) the larger count wins, ties to
/// bit 1, and the conflict is flagged in diag.
NodeState round2_receive(NodeState state, std::span<const ReceivedMessage> msgs,
                         const ProtocolParams& params, const CommitteeLayout& layout,
                         std::span<const CoinContribution> coin_msgs,
                         Round2Diag* diag = nullptr);

/// A committee member of the current phase draws its contribution; everyone
/// else contributes nothing.
std::optional<CoinContribution> coin_round_send(const NodeState& state,
                                                const CommitteeLayout& layout,
                                                Rng& rng);

/// Move to the next phase. Past committee c the fixed-round mode terminates
/// with output = val; the Las Vegas mode wraps to phase 1 and keeps going
/// until the finish path fires.
NodeState advance_phase(NodeState state, const CommitteeLayout& layout, bool las_vegas);

} // namespace cba
