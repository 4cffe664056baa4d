// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "doctest.h"

#include "cba/sim.hpp"

using namespace cba;

namespace {

// Scripted strategy for exercising the engine's contract checks: the lambda
// fills the action, the engine is expected to reject it.
class FnRogue : public Adversary {
public:
    using Fn = std::function<void(const RoundSnapshot&, AdversaryAction&)>;
    explicit FnRogue(Fn fn) : fn_(std::move(fn)) {}
    std::string_view name() const override { return "scripted"; }
    void act(const RoundSnapshot& snap, Rng&, AdversaryAction& out) override {
        out.clear();
        fn_(snap, out);
    }

private:
    Fn fn_;
};

// Full-information strategy that strands the stragglers: it corrupts two
// nodes so that exactly n-t-1 honest nodes hold some value b, fakes a
// round-1 supermajority of b for those holders, and in round 2 tops up the
// (b, decided) count for a single one of them, which finishes alone. The
// remaining live honest nodes can never again see n-t equal round-1
// broadcasts, so in fixed-round mode they drift on committee coins to the
// very last phase. With poke_terminated set it instead tries to corrupt the
// early finisher one phase later, which the engine must reject.
class StrandRogue : public Adversary {
public:
    explicit StrandRogue(bool poke_terminated = false) : poke_(poke_terminated) {}
    std::string_view name() const override { return "strand-rogue"; }

    std::uint8_t assigned() const { return b_; }
    NodeId target() const { return target_; }

    void act(const RoundSnapshot& snap, Rng&, AdversaryAction& out) override {
        out.clear();
        const std::uint32_t n = snap.params->n;
        const std::uint32_t t = snap.params->t;

        if (poke_ && snap.phase_abs == 2 && snap.round == 2) {
            out.new_corruptions.push_back(target_);
            return;
        }
        if (snap.phase_abs == 1 && snap.round == 1) {
            std::uint32_t ones = 0;
            for (NodeId id = 1; id <= n; ++id) ones += snap.states[id - 1].val;
            b_ = (ones >= n - t - 1 && n - ones >= t - 1) ? 1 : 0;
            const std::uint32_t cb = b_ ? ones : n - ones;
            if (cb < n - t - 1 || n - cb < t - 1) return; // unusable inputs
            // Corrupt the surplus holders, highest IDs first; what remains is
            // exactly n-t-1 honest b-holders and t-1 others (two victims).
            std::uint32_t cut_b = cb - (n - t - 1);
            std::uint32_t cut_o = (n - cb) - (t - 1);
            std::vector<bool> corrupt(n + 1, false);
            for (NodeId id = n; id >= 1; --id) {
                const bool holds_b = snap.states[id - 1].val == b_;
                if (holds_b && cut_b > 0) {
                    corrupt[id] = true;
                    --cut_b;
                } else if (!holds_b && cut_o > 0) {
                    corrupt[id] = true;
                    --cut_o;
                }
            }
            deciders_.clear();
            for (NodeId id = 1; id <= n; ++id) {
                if (corrupt[id]) out.new_corruptions.push_back(id);
                else if (snap.states[id - 1].val == b_ &&
                         deciders_.size() < n - t - 1)
                    deciders_.push_back(id);
            }
            target_ = deciders_.front();
            for (NodeId v : out.new_corruptions)
                for (NodeId d : deciders_)
                    out.overrides.push_back(
                        {v, d, d, PhaseMessage{1, 1, b_, false, 0}});
            return;
        }
        if (snap.phase_abs == 1 && snap.round == 2) {
            for (NodeId id = 1; id <= n; ++id)
                if (snap.status[id - 1] == NodeStatus::Corrupted)
                    out.overrides.push_back(
                        {id, target_, target_, PhaseMessage{1, 2, b_, true, 0}});
            return;
        }
    }

private:
    bool poke_;
    std::uint8_t b_ = 1;
    std::vector<NodeId> deciders_;
    NodeId target_ = 0;
};

// Smallest seed whose drawn inputs let StrandRogue set up its board: some
// value must be held by at least n-t-1 nodes while the other is held by at
// least t-1. Mirrors the engine's input stream exactly.
std::uint64_t find_strand_seed(std::uint32_t n, std::uint32_t t) {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        Rng in(split_seed(seed, 3));
        std::uint32_t ones = 0;
        for (std::uint32_t i = 0; i < n; ++i)
            ones += static_cast<std::uint32_t>(in.bit());
        const std::uint32_t zeros = n - ones;
        if ((ones >= n - t - 1 && zeros >= t - 1) ||
            (zeros >= n - t - 1 && ones >= t - 1))
            return seed;
    }
    return 0;
}

} // namespace

TEST_CASE("input modes parse and print") {
    CHECK(parse_input_mode("ones") == InputMode::Ones);
    CHECK(parse_input_mode("zeros") == InputMode::Zeros);
    CHECK(parse_input_mode("random") == InputMode::Random);
    CHECK_THROWS_AS(parse_input_mode("Ones"), std::invalid_argument);
    CHECK_THROWS_AS(parse_input_mode(""), std::invalid_argument);
    CHECK(input_mode_name(InputMode::Random) == std::string("random"));
}

TEST_CASE("unanimous inputs and no adversary finish in two phases") {
    TrialConfig cfg;
    cfg.params = {.n = 4, .t = 1};
    cfg.record_trace = true;

    TrialResult r = run_trial(cfg);
    CHECK(r.n == 4);
    CHECK(r.committees == 4);
    CHECK(r.adversary == "null");
    CHECK(r.q == 0);
    CHECK(r.phases_used == 2);
    CHECK(r.rounds_used == 3);
    // Two full 4x4 exchanges; the final half-phase has no live recipients.
    CHECK(r.messages_delivered == 32);
    CHECK(r.trace.size() == r.messages_delivered);
    CHECK(r.agreement);
    CHECK(r.validity_applicable);
    CHECK(r.validity);
    CHECK(r.terminated_all);
    CHECK(r.violations.empty());
    CHECK(r.inputs == std::vector<std::uint8_t>(4, 1));
    CHECK(r.outputs == std::vector<std::int8_t>(4, 1));

    cfg.inputs = InputMode::Zeros;
    cfg.record_trace = false;
    TrialResult z = run_trial(cfg);
    CHECK(z.phases_used == 2);
    CHECK(z.outputs == std::vector<std::int8_t>(4, 0));
    CHECK(z.validity);
}

TEST_CASE("random inputs come from the dedicated seed stream") {
    TrialConfig cfg;
    cfg.params = {.n = 16, .t = 5};
    cfg.inputs = InputMode::Random;
    cfg.seed = 42;
    TrialResult r = run_trial(cfg);
    Rng in(split_seed(42, 3));
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(r.inputs[i] == static_cast<std::uint8_t>(in.bit()));
}

TEST_CASE("crash faults cannot break a unanimous start") {
    TrialConfig cfg;
    cfg.params = {.n = 16, .t = 5};
    cfg.adversary = "crash";

    TrialResult r = run_trial(cfg);
    CHECK(r.q == 5);
    CHECK(r.phases_used == 2);
    CHECK(r.terminated_all);
    CHECK(r.agreement);
    CHECK(r.validity);
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(r.outputs[i] == (i < 5 ? -1 : 1));

    // Crashing nodes that are about to terminate changes nothing for the
    // survivors; the corrupted five simply never produce an output.
    cfg.adversary = "crash:phase=2";
    TrialResult late = run_trial(cfg);
    CHECK(late.q == 5);
    CHECK(late.phases_used == 2);
    CHECK(late.terminated_all);
    CHECK(late.validity);
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(late.outputs[i] == (i < 5 ? -1 : 1));
}

TEST_CASE("a Las Vegas cutoff reports the survivors honestly") {
    TrialConfig cfg;
    cfg.params = {.n = 16, .t = 5, .las_vegas = true};
    cfg.adversary = "splitworld";
    cfg.inputs = InputMode::Random;
    cfg.seed = 9;
    cfg.max_phases = 1;

    TrialResult r = run_trial(cfg);
    CHECK(r.phases_used == 1);
    CHECK(r.rounds_used == 2);
    CHECK(r.q == 5);
    CHECK_FALSE(r.terminated_all);
    for (std::size_t i = 0; i < 16; ++i) {
        if (i < 5) CHECK(r.outputs[i] == -1);
        else CHECK(r.outputs[i] >= 0); // survivors report their current val
    }
}

TEST_CASE("splitworld equivocation is visible in the trace") {
    TrialConfig cfg;
    cfg.params = {.n = 8, .t = 2};
    cfg.adversary = "splitworld:count=2";
    cfg.seed = 3;
    cfg.record_trace = true;

    TrialResult r = run_trial(cfg);
    // Six honest nodes are a supermajority on their own, so the run still
    // finishes on schedule.
    CHECK(r.phases_used == 2);
    CHECK(r.validity);
    CHECK(r.trace.size() == r.messages_delivered);
    CHECK(r.messages_delivered == 96);

    std::size_t corrupted_records = 0;
    for (const TraceRecord& rec : r.trace) {
        CHECK(rec.trial == 0);
        if (!rec.corrupted) continue;
        ++corrupted_records;
        CHECK((rec.sender == 1 || rec.sender == 2));
        CHECK(rec.payload.val == (rec.recipient <= 4 ? 1 : 0));
        CHECK_FALSE(rec.payload.decided);
        if (rec.round == 2 && rec.sender == 1) {
            // Committee 1 is {1}: the corrupted member splits its coin too.
            CHECK(rec.payload.coin == (rec.recipient <= 4 ? 1 : -1));
        } else {
            CHECK(rec.payload.coin == 0);
        }
    }
    CHECK(corrupted_records == 24);
}

TEST_CASE("an injected strategy matches its string-built twin") {
    TrialConfig cfg;
    cfg.params = {.n = 16, .t = 5};
    cfg.adversary = "splitworld";
    cfg.inputs = InputMode::Random;
    cfg.seed = 4;
    cfg.max_phases = 40;
    cfg.record_trace = true;

    SplitWorld twin(5);
    CHECK(run_trial(cfg) == run_trial(cfg, twin));
}

TEST_CASE("every stock adversary loses cleanly at n=16") {
    for (const char* adversary :
         {"null", "crash", "splitworld", "coinkiller", "antiassigned"}) {
        for (InputMode inputs : {InputMode::Ones, InputMode::Random}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                TrialConfig cfg;
                cfg.params = {.n = 16, .t = 5, .las_vegas = true};
                cfg.adversary = adversary;
                cfg.inputs = inputs;
                cfg.seed = seed;
                TrialResult r = run_trial(cfg);
                INFO(adversary, " inputs=", input_mode_name(inputs), " seed=", seed);
                CHECK(r.terminated_all);
                CHECK(r.agreement);
                CHECK(r.violations.empty());
                CHECK(r.q <= 5);
                if (inputs == InputMode::Ones) {
                    CHECK(r.validity_applicable);
                    CHECK(r.validity);
                }
            }
        }
    }
}

TEST_CASE("fixed-round mode always stops at committee c") {
    TrialConfig cfg;
    cfg.params = {.n = 16, .t = 5};
    cfg.adversary = "coinkiller";
    cfg.inputs = InputMode::Random;
    cfg.seed = 17;
    TrialResult r = run_trial(cfg);
    CHECK(r.committees == 16);
    CHECK(r.phases_used <= 16);
    CHECK(r.terminated_all);
}

TEST_CASE("a capped coin killer only delays Las Vegas termination") {
    TrialConfig base;
    base.params = {.n = 64, .t = 5, .alpha = 2.0, .las_vegas = true};
    base.adversary = "coinkiller:spend=1,budget=5";
    base.inputs = InputMode::Random;
    base.seed = 1234;

    std::vector<TrialResult> rs = run_batch(base, 300);
    double phase_sum = 0.0;
    std::uint64_t kills = 0;
    for (const TrialResult& r : rs) {
        CHECK(r.committees == 5);
        CHECK(r.terminated_all);
        CHECK(r.agreement);
        CHECK(r.q <= 5);
        CHECK(r.violations.empty());
        phase_sum += r.phases_used;
        kills += r.q;
    }
    CHECK(phase_sum / 300.0 < 6.0);
    CHECK(kills > 0); // the strategy really does fire somewhere in the batch
}

TEST_CASE("antiassigned corrupts coin supporters but never stops ones") {
    bool corrupted_somewhere = false;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        TrialConfig cfg;
        cfg.params = {.n = 16, .t = 5, .las_vegas = true};
        cfg.adversary = "antiassigned";
        cfg.seed = seed;
        TrialResult r = run_trial(cfg);
        CHECK(r.phases_used == 2);
        CHECK(r.validity);
        CHECK(r.terminated_all);
        CHECK(r.q <= 1); // committee 1 is a singleton; at most one supporter
        corrupted_somewhere |= r.q > 0;
    }
    CHECK(corrupted_somewhere);
}

TEST_CASE("batches are deterministic, parallel or not, and trials replay") {
    TrialConfig base;
    base.params = {.n = 16, .t = 5, .alpha = 1.0, .las_vegas = true};
    base.adversary = "coinkiller";
    base.inputs = InputMode::Random;
    base.seed = 77;
    base.record_trace = true;

    std::vector<TrialResult> a = run_batch(base, 12);
    std::vector<TrialResult> b = run_batch(base, 12);
    std::vector<TrialResult> c = run_batch_serial(base, 12);
    REQUIRE(a.size() == 12);
    CHECK(a == b);
    CHECK(a == c);

    // Any one trial reproduces in isolation from its derived seed.
    TrialConfig iso = base;
    iso.seed = split_seed(base.seed, 7);
    iso.trial_index = 7;
    CHECK(run_trial(iso) == a[7]);

    for (const TrialResult& r : a) {
        CHECK(r.terminated_all);
        CHECK(r.agreement);
        CHECK(r.trace.size() == r.messages_delivered);
    }
}

TEST_CASE("run_batch rejects unusable configurations up front") {
    TrialConfig base;
    base.params = {.n = 16, .t = 5};
    CHECK_THROWS_AS(run_batch(base, 0), std::invalid_argument);
    base.adversary = "gremlin";
    CHECK_THROWS_AS(run_batch(base, 2), std::invalid_argument);
    base.adversary = "null";
    base.params.t = 6;
    CHECK_THROWS_AS(run_batch(base, 2), std::invalid_argument);
}

TEST_CASE("a stranding strategy trips the termination-spread audit") {
    TrialConfig cfg;
    cfg.params = {.n = 7, .t = 2}; // fixed mode: seven phases
    cfg.inputs = InputMode::Random;
    cfg.seed = find_strand_seed(7, 2);

    StrandRogue rogue;
    TrialResult r = run_trial(cfg, rogue);
    CHECK(r.adversary == "strand-rogue");
    CHECK(r.q == 2);
    CHECK(r.committees == 7);
    // One node finished at phase 2; the other four were dragged to the fixed
    // end at phase 7, far outside the two-phase window.
    CHECK(r.violations == std::vector<std::string>{"termination-spread@p2"});
    CHECK(r.terminated_all);
    CHECK(r.phases_used == 7);
    CHECK(r.rounds_used == 14);
    CHECK_FALSE(r.validity_applicable);
    CHECK(r.outputs[rogue.target() - 1] ==
          static_cast<std::int8_t>(rogue.assigned()));
}

TEST_CASE("corrupting a terminated node is a hard breach") {
    TrialConfig cfg;
    cfg.params = {.n = 10, .t = 3}; // leaves one corruption in the budget
    cfg.inputs = InputMode::Random;
    cfg.seed = find_strand_seed(10, 3);

    StrandRogue rogue(true);
    CHECK_THROWS_WITH_AS(run_trial(cfg, rogue),
                         "adversary: corrupted a terminated node",
                         std::runtime_error);
}

TEST_CASE("contract breaches are hard errors") {
    TrialConfig cfg;
    cfg.params = {.n = 7, .t = 2};

    auto run_with = [&cfg](FnRogue::Fn fn) {
        FnRogue rogue(std::move(fn));
        return run_trial(cfg, rogue);
    };
    auto at_start = [](const RoundSnapshot& s) {
        return s.phase_abs == 1 && s.round == 1;
    };

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (!at_start(s)) return;
            for (NodeId id = 1; id <= s.params->t + 1; ++id)
                out.new_corruptions.push_back(id);
        }),
        "adversary: corruption budget exceeded", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (at_start(s)) out.new_corruptions.push_back(9);
        }),
        "adversary: corrupted an invalid node id", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([](const RoundSnapshot& s, AdversaryAction& out) {
            if (s.phase_abs == 1) out.new_corruptions.push_back(1);
        }),
        "adversary: corrupted the same node twice", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (at_start(s))
                out.overrides.push_back({3, 1, 7, PhaseMessage{1, 1, 1, false, 0}});
        }),
        "adversary: override from a non-corrupted sender", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (!at_start(s)) return;
            out.new_corruptions.push_back(1);
            out.overrides.push_back({1, 5, 8, PhaseMessage{1, 1, 1, false, 0}});
        }),
        "adversary: override range out of bounds", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (!at_start(s)) return;
            out.new_corruptions.push_back(1);
            out.overrides.push_back({1, 1, 3, PhaseMessage{1, 1, 1, false, 0}});
            out.overrides.push_back({1, 3, 4, PhaseMessage{1, 1, 0, false, 0}});
        }),
        "adversary: overlapping override ranges", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (!at_start(s)) return;
            out.new_corruptions.push_back(1);
            out.overrides.push_back({1, 2, 2, PhaseMessage{1, 1, 7, false, 0}});
        }),
        "adversary: override message not wire-representable", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        run_with([&](const RoundSnapshot& s, AdversaryAction& out) {
            if (!at_start(s)) return;
            out.new_corruptions.push_back(1);
            out.overrides.push_back({1, 2, 2, PhaseMessage{9, 1, 1, false, 0}});
        }),
        "adversary: override message not wire-representable", std::runtime_error);
}
