// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cba/protocol.hpp"

namespace cba {

enum class NodeStatus : std::uint8_t { Honest, Corrupted, Terminated };

// What the adversary sees each communication round, after every live honest
// node has committed its outgoing broadcast (rushing: current-round coin
// flips are already in pending). Arrays are indexed id-1; state entries of
// corrupted nodes are stale by definition.
struct RoundSnapshot {
    std::uint32_t phase_abs = 0; // monotone phase counter across wraps
    std::uint32_t phase = 0;     // wrapped phase index as carried in messages
    std::uint32_t round = 0;     // 1 or 2
    const ProtocolParams* params = nullptr;
    const CommitteeLayout* layout = nullptr;
    std::span<const NodeState> states;
    std::span<const NodeStatus> status;
    std::span<const std::optional<PhaseMessage>> pending;
    std::uint32_t budget_remaining = 0;
};

// Replace a corrupted sender's broadcast for every recipient in [lo, hi]
// (inclusive). Recipients not covered by any override receive nothing from
// that sender: corrupted nodes are silent by default, and silence is also how
// a strategy drops a message.
struct MessageOverride {
    NodeId sender = 0;
    NodeId lo = 0;
    NodeId hi = 0;
    PhaseMessage msg;
};

struct AdversaryAction {
    std::vector<NodeId> new_corruptions;
    std::vector<MessageOverride> overrides;
    void clear() {
        new_corruptions.clear();
        overrides.clear();
    }
};

// One adversary instance drives one trial; the engine enforces the contract
// (budget <= t, overrides only for corrupted senders, one message per
// sender/recipient pair per round) and treats any breach as a hard error.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual std::string_view name() const = 0;
    virtual void act(const RoundSnapshot& snap, Rng& rng, AdversaryAction& out) = 0;
};

// Baseline: corrupts nobody, sends nothing.
class NullAdversary : public Adversary {
public:
    std::string_view name() const override { return "null"; }
    void act(const RoundSnapshot&, Rng&, AdversaryAction& out) override { out.clear(); }
};

// Crash faults: the `count` lowest-ID honest nodes fall permanently silent at
// the start of `phase`.
class CrashAdversary : public Adversary {
public:
    CrashAdversary(std::uint32_t count, std::uint32_t phase)
        : count_(count), phase_(phase) {}
    std::string_view name() const override { return "crash"; }
    void act(const RoundSnapshot& snap, Rng& rng, AdversaryAction& out) override;

private:
    std::uint32_t count_;
    std::uint32_t phase_;
};

// Equivocates every broadcast: val 1 (and coin +1) to recipients with
// ID <= n/2, val 0 (and coin -1) to the rest, decided always false, to keep
// honest nodes away from the n-t and t+1 thresholds. Corrupts the `count`
// lowest IDs up front.
class SplitWorld : public Adversary {
public:
    explicit SplitWorld(std::uint32_t count) : count_(count) {}
    std::string_view name() const override { return "splitworld"; }
    void act(const RoundSnapshot& snap, Rng& rng, AdversaryAction& out) override;

private:
    std::uint32_t count_;
};

// Watches the committee's committed contributions, and when flipping j
// aligned contributors can change the sign of the delivered sum, corrupts
// exactly those j and delivers the flipped values to the low half of the
// recipients only, making the observers' coin outputs differ. spend caps the
// corruptions per phase (0 = uncapped); budget caps the whole trial, and a
// budget of 0 forbids corruption outright.
class CoinKiller : public Adversary {
public:
    CoinKiller(std::uint32_t spend, std::uint32_t budget)
        : spend_(spend), budget_(budget) {}
    std::string_view name() const override { return "coinkiller"; }
    void act(const RoundSnapshot& snap, Rng& rng, AdversaryAction& out) override;

private:
    std::uint32_t spend_;
    std::uint32_t budget_;
    std::uint32_t spent_ = 0;
};

// When round 1 produced an assigned value b, corrupts committee members whose
// contribution supports b and flips them (uniformly, to all recipients) so
// the coin leans toward 1-b: stresses the phases where the coin must match
// the assigned value for progress.
class AntiAssigned : public Adversary {
public:
    AntiAssigned(std::uint32_t spend, std::uint32_t budget)
        : spend_(spend), budget_(budget) {}
    std::string_view name() const override { return "antiassigned"; }
    void act(const RoundSnapshot& snap, Rng& rng, AdversaryAction& out) override;

private:
    std::uint32_t spend_;
    std::uint32_t budget_;
    std::uint32_t spent_ = 0;
};

/// Build a strategy from "name" or "name:key=value,key=value".
/// Known: null | crash[:count=,phase=] | splitworld[:count=] |
/// coinkiller[:spend=,budget=] | antiassigned[:spend=,budget=].
/// Counts and budgets default to params.t. Throws std::invalid_argument on
/// unknown names or keys.
std::unique_ptr<Adversary> make_adversary(const std::string& spec,
                                          const ProtocolParams& params);

} // namespace cba
