// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cba/adversary.hpp"
#include "cba/protocol.hpp"

namespace cba {

enum class InputMode : std::uint8_t { Ones, Zeros, Random };

const char* input_mode_name(InputMode mode);

/// "ones" | "zeros" | "random"; throws std::invalid_argument otherwise.
InputMode parse_input_mode(const std::string& text);

struct TrialConfig {
    ProtocolParams params;
    std::string adversary = "null";
    InputMode inputs = InputMode::Ones;
    std::uint64_t seed = 0;
    std::uint64_t trial_index = 0;
    // Las Vegas cutoff in phases; 0 means 64 * c. Ignored in fixed-round mode,
    // which always stops at committee c.
    std::uint32_t max_phases = 0;
    bool record_trace = false;
};

// One delivered point-to-point message (broadcasts are recorded per
// recipient). phase counts absolutely across Las Vegas wraps; the wrapped
// index is inside the payload.
struct TraceRecord {
    std::uint64_t trial = 0;
    std::uint32_t phase = 0;
    std::uint8_t round = 0;
    NodeId sender = 0;
    NodeId recipient = 0;
    bool corrupted = false; // sender was corrupted when this was delivered
    PhaseMessage payload;
    bool operator==(const TraceRecord&) const = default;
};

struct TrialResult {
    std::uint64_t trial_index = 0;
    std::uint64_t seed = 0;
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    std::uint32_t q = 0; // nodes actually corrupted
    std::string adversary;
    std::uint32_t committees = 0; // c, so phase counts can be read in context
    std::uint32_t phases_used = 0;
    std::uint32_t rounds_used = 0;
    std::uint64_t messages_delivered = 0;
    bool agreement = false;
    bool validity = false; // vacuously true when honest inputs were mixed
    bool validity_applicable = false;
    bool terminated_all = false; // false when the Las Vegas cutoff hit
    std::vector<std::uint8_t> inputs; // indexed id-1
    // Outputs indexed id-1: 0/1, or -1 for corrupted nodes (and for cutoff
    // survivors the engine reports their last val, flagged by terminated_all).
    std::vector<std::int8_t> outputs;
    std::vector<std::string> violations;
    std::vector<TraceRecord> trace; // only when record_trace was set
    bool operator==(const TrialResult&) const = default;
};

/// Run one synchronous trial: per phase, a round-1 exchange, then a round-2
/// exchange with piggybacked committee coin flips. Each round the live honest
/// nodes commit their broadcasts, the adversary inspects everything and may
/// corrupt nodes (within budget t) and replace the broadcasts of corrupted
/// senders per recipient range, then delivery and the state transitions
/// happen. Corrupted senders are silent unless overridden; terminated nodes
/// are inert and corrupting one is a contract breach (std::runtime_error),
/// as are budget or override-shape breaches.
///
/// Three protocol properties are checked as the trial runs and show up in
/// violations[] when broken:
///   supermajority-propagation  if >= n-t honest nodes broadcast the same b
///                              in round 1, every honest node holds b after
///                              round 2 (and same-phase finishers output b)
///   unique-assigned-value      round-1 deciders of one phase are unanimous
///   termination-spread         first honest termination at phase i implies
///                              all honest terminate by phase i+2 (judged
///                              only when the schedule allows the window)
///
/// Deterministic in (config): all randomness comes from counter-derived
/// streams of config.seed.
TrialResult run_trial(const TrialConfig& config);

/// Same, but drives the given strategy instead of building one from
/// config.adversary (which is then ignored). This is how custom strategies
/// plug in, and how the contract enforcement is exercised in tests.
TrialResult run_trial(const TrialConfig& config, Adversary& adversary);

/// trials independent runs of `base`: trial k gets seed split_seed(base.seed,
/// k) and trial_index k, so any one can be reproduced in isolation. Parallel
/// over trials; bit-identical to run_batch_serial by construction. threads
/// = 0 uses the OpenMP default.
std::vector<TrialResult> run_batch(const TrialConfig& base, std::uint64_t trials,
                                   int threads = 0);

/// Serial reference for run_batch.
std::vector<TrialResult> run_batch_serial(const TrialConfig& base,
                                          std::uint64_t trials);

} // namespace cba
