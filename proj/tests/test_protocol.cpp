// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "cba/protocol.hpp"

using namespace cba;

namespace {

ReceivedMessage rm(NodeId sender, std::uint32_t phase, std::uint8_t round,
                   std::uint8_t val, bool decided, std::int8_t coin = 0) {
    return ReceivedMessage{sender, PhaseMessage{phase, round, val, decided, coin}};
}

} // namespace

TEST_CASE("parameter validation") {
    ProtocolParams p{.n = 4, .t = 1};
    CHECK_NOTHROW(p.validate());
    CHECK_THROWS_AS((ProtocolParams{.n = 0, .t = 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{.n = 3, .t = 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{.n = 9, .t = 3}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{.n = 4, .t = 1, .alpha = 0.5}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{.n = 4, .t = 1, .alpha = 18, .gamma = 0.0}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (ProtocolParams{.n = 4, .t = 1, .alpha = 18, .gamma = 1, .log_base = 1.0}.validate()),
        std::invalid_argument);
}

TEST_CASE("whp_claimed thresholds") {
    CHECK(ProtocolParams{.n = 4, .t = 1, .alpha = 18.0}.whp_claimed());
    CHECK_FALSE(ProtocolParams{.n = 4, .t = 1, .alpha = 17.0}.whp_claimed());
    CHECK(ProtocolParams{.n = 4, .t = 1, .alpha = 25.0, .gamma = 5.0}.whp_claimed());
    CHECK_FALSE(ProtocolParams{.n = 4, .t = 1, .alpha = 25.0, .gamma = 6.0}.whp_claimed());
}

TEST_CASE("committee_count frozen examples") {
    CommitteeLayout a = committee_count({.n = 1024, .t = 32});
    CHECK(a.c == 173); // ceil(3 * 18 * 32 / 10), the 3t-side of the min
    CHECK(a.s == 5);

    CommitteeLayout b = committee_count({.n = 64, .t = 21, .alpha = 1.0});
    CHECK(b.c == 11); // ceil(3 * 21 / 6) = ceil(10.5)
    CHECK(b.s == 5);

    CommitteeLayout z = committee_count({.n = 100, .t = 0});
    CHECK(z.c == 1);
    CHECK(z.s == 100);

    // Tiny n: the count clamps to n.
    CommitteeLayout d = committee_count({.n = 4, .t = 1});
    CHECK(d.c == 4);
    CHECK(d.s == 1);
}

TEST_CASE("committee_count crossover between the two growth regimes") {
    // At n = 2^20 (log n = 20) the two sides of the min trade places around
    // t*log^2(n) = n, i.e. t around 2622.
    CommitteeLayout low = committee_count({.n = 1u << 20, .t = 2048, .alpha = 1.0});
    CHECK(low.c == 80); // t^2/n * log n = 4 * 20 binds
    CHECK(low.s == 13107);

    CommitteeLayout high = committee_count({.n = 1u << 20, .t = 16384, .alpha = 1.0});
    CHECK(high.c == 2458); // 3t / log n = 2457.6 binds
    CHECK(high.s == 426);
}

TEST_CASE("member ranges tile 1..n and the last committee absorbs the rest") {
    for (auto [n, t] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
             {64, 21}, {100, 33}, {257, 85}, {31, 10}}) {
        ProtocolParams params{.n = n, .t = t, .alpha = 1.0};
        CommitteeLayout layout = committee_count(params);
        NodeId expect = 1;
        for (std::uint32_t i = 1; i <= layout.c; ++i) {
            auto [lo, hi] = layout.member_range(i);
            CHECK(lo == expect);
            CHECK(hi >= lo);
            if (i < layout.c) CHECK(hi - lo + 1 == layout.s);
            else CHECK(hi - lo + 1 >= layout.s);
            for (NodeId id = lo; id <= hi; ++id) CHECK(layout.committee_of(id) == i);
            expect = hi + 1;
        }
        CHECK(expect == n + 1);
    }
}

TEST_CASE("committee_of matches the ceil(id/s) rule with a clamped tail") {
    CommitteeLayout layout = committee_count({.n = 64, .t = 21, .alpha = 1.0});
    REQUIRE(layout.c == 11);
    REQUIRE(layout.s == 5);
    CHECK(layout.committee_of(3) == 1);
    CHECK(layout.committee_of(7) == 2);
    CHECK(layout.committee_of(50) == 10);
    CHECK(layout.committee_of(51) == 11);
    CHECK(layout.committee_of(64) == 11); // ceil(64/5) = 13 clamps to c
    auto [lo, hi] = layout.member_range(11);
    CHECK(lo == 51);
    CHECK(hi == 64);
    CHECK(layout.members(11).size() == 14);
}

TEST_CASE("payload stays within the small-word budget") {
    PhaseMessage plain{3, 1, 1, true, 0};
    PhaseMessage with_coin{3, 2, 1, true, -1};
    CHECK(payload_bits(plain, 1) == 2);
    CHECK(payload_bits(with_coin, 1) == 4);
    CHECK(payload_bits(plain, 2) == 3);
    CHECK(payload_bits(plain, 173) == 10);
    CHECK(payload_bits(with_coin, 173) == 12);
}

TEST_CASE("round1_send copies the local state verbatim") {
    NodeState st{.id = 5, .val = 1, .decided = true, .finish = false, .phase = 3, .output = std::nullopt};
    PhaseMessage m = round1_send(st);
    CHECK(m == PhaseMessage{3, 1, 1, true, 0});
}

TEST_CASE("round1_receive adopts on n-t identical vals") {
    ProtocolParams p{.n = 4, .t = 1};
    NodeState st{.id = 2, .val = 0, .decided = false, .finish = false, .phase = 1, .output = std::nullopt};

    // All four agree.
    std::vector<ReceivedMessage> msgs{rm(1, 1, 1, 1, false), rm(2, 1, 1, 1, false),
                                      rm(3, 1, 1, 1, false), rm(4, 1, 1, 1, false)};
    NodeState out = round1_receive(st, msgs, p);
    CHECK(out.val == 1);
    CHECK(out.decided);

    // Exactly n-t suffice; decided flags on round-1 messages are irrelevant.
    msgs = {rm(1, 1, 1, 1, true), rm(2, 1, 1, 1, false), rm(3, 1, 1, 1, false),
            rm(4, 1, 1, 0, false)};
    out = round1_receive(st, msgs, p);
    CHECK(out.val == 1);
    CHECK(out.decided);

    // A split keeps val and clears decided, even if it was set before.
    st.decided = true;
    msgs = {rm(1, 1, 1, 1, false), rm(2, 1, 1, 1, false), rm(3, 1, 1, 0, false),
            rm(4, 1, 1, 0, false)};
    out = round1_receive(st, msgs, p);
    CHECK(out.val == 0);
    CHECK_FALSE(out.decided);
}

TEST_CASE("round1_receive ignores other phases, rounds and malformed vals") {
    ProtocolParams p{.n = 4, .t = 1};
    NodeState st{.id = 1, .val = 0, .decided = false, .finish = false, .phase = 2, .output = std::nullopt};
    std::vector<ReceivedMessage> msgs{
        rm(1, 1, 1, 1, false),  // stale phase
        rm(2, 2, 2, 1, false),  // wrong round
        rm(3, 2, 1, 5, false),  // val outside {0,1}
        rm(4, 2, 1, 1, false),
    };
    NodeState out = round1_receive(st, msgs, p);
    CHECK_FALSE(out.decided);
    CHECK(out.val == 0);
}

TEST_CASE("round1_receive at n=7: exactly five zeros decide zero") {
    ProtocolParams p{.n = 7, .t = 2};
    NodeState st{.id = 3, .val = 1, .decided = false, .finish = false, .phase = 1, .output = std::nullopt};
    std::vector<ReceivedMessage> msgs;
    for (NodeId s = 1; s <= 5; ++s) msgs.push_back(rm(s, 1, 1, 0, false));
    msgs.push_back(rm(6, 1, 1, 1, false));
    msgs.push_back(rm(7, 1, 1, 1, false));
    NodeState out = round1_receive(st, msgs, p);
    CHECK(out.val == 0);
    CHECK(out.decided);
}

TEST_CASE("round2_receive case 1: strong majority finishes") {
    ProtocolParams p{.n = 4, .t = 1};
    CommitteeLayout layout{4, 4, 1};
    NodeState st{.id = 2, .val = 0, .decided = false, .finish = false, .phase = 1, .output = std::nullopt};
    std::vector<ReceivedMessage> msgs{rm(1, 1, 2, 1, true), rm(2, 1, 2, 1, true),
                                      rm(3, 1, 2, 1, true), rm(4, 1, 2, 0, false)};
    Round2Diag diag;
    NodeState out = round2_receive(st, msgs, p, layout, {}, &diag);
    CHECK(diag.case_id == 1);
    CHECK(out.val == 1);
    CHECK(out.decided);
    CHECK(out.finish);
}

TEST_CASE("round2_receive case 2: weak majority adopts without finishing") {
    ProtocolParams p{.n = 4, .t = 1};
    CommitteeLayout layout{4, 4, 1};
    NodeState st{.id = 2, .val = 1, .decided = false, .finish = false, .phase = 1, .output = std::nullopt};
    // Two (0, decided) reach t+1 = 2; the undecided one does not count.
    std::vector<ReceivedMessage> msgs{rm(1, 1, 2, 0, true), rm(2, 1, 2, 0, true),
                                      rm(3, 1, 2, 1, false), rm(4, 1, 2, 1, false)};
    Round2Diag diag;
    NodeState out = round2_receive(st, msgs, p, layout, {}, &diag);
    CHECK(diag.case_id == 2);
    CHECK_FALSE(diag.conflicting_counts);
    CHECK(out.val == 0);
    CHECK(out.decided);
    CHECK_FALSE(out.finish);
}

TEST_CASE("round2_receive case 3: the committee coin decides") {
    ProtocolParams p{.n = 8, .t = 2};
    CommitteeLayout layout{8, 4, 2};
    NodeState st{.id = 1, .val = 1, .decided = true, .finish = false, .phase = 2, .output = std::nullopt};
    std::vector<ReceivedMessage> msgs{rm(1, 2, 2, 1, true), rm(5, 2, 2, 0, false)};
    // Committee 2 is {3, 4}; node 5's flip must be ignored.
    std::vector<CoinContribution> coins{{3, -1}, {4, -1}, {5, +1}};
    Round2Diag diag;
    NodeState out = round2_receive(st, msgs, p, layout, coins, &diag);
    CHECK(diag.case_id == 3);
    REQUIRE(diag.coin.has_value());
    CHECK(*diag.coin == 0);
    CHECK(out.val == 0);
    CHECK_FALSE(out.decided);

    // No contributions at all: the tie maps to 1.
    out = round2_receive(st, msgs, p, layout, {}, &diag);
    CHECK(*diag.coin == 1);
    CHECK(out.val == 1);
}

TEST_CASE("round2_receive flags conflicting weak majorities") {
    ProtocolParams p{.n = 7, .t = 2};
    CommitteeLayout layout{7, 7, 1};
    NodeState st{.id = 1, .val = 0, .decided = false, .finish = false, .phase = 1, .output = std::nullopt};

    std::vector<ReceivedMessage> msgs;
    for (NodeId s = 1; s <= 3; ++s) msgs.push_back(rm(s, 1, 2, 1, true));
    for (NodeId s = 4; s <= 6; ++s) msgs.push_back(rm(s, 1, 2, 0, true));
    Round2Diag diag;
    NodeState out = round2_receive(st, msgs, p, layout, {}, &diag);
    CHECK(diag.case_id == 2);
    CHECK(diag.conflicting_counts);
    CHECK(out.val == 1); // equal counts tie toward 1

    msgs.push_back(rm(7, 1, 2, 0, true)); // now 0 outnumbers 1
    out = round2_receive(st, msgs, p, layout, {}, &diag);
    CHECK(diag.case_id == 2);
    CHECK(diag.conflicting_counts);
    CHECK(out.val == 0);
}

TEST_CASE("coin_round_send: members of the current committee contribute") {
    CommitteeLayout layout{8, 4, 2};
    Rng rng(42);
    Rng twin(42);

    NodeState member{.id = 3, .val = 0, .decided = false, .finish = false, .phase = 2, .output = std::nullopt};
    auto c = coin_round_send(member, layout, rng);
    REQUIRE(c.has_value());
    CHECK(c->sender == 3);
    CHECK(c->value == (twin.bit() ? +1 : -1));

    NodeState outsider{.id = 3, .val = 0, .decided = false, .finish = false, .phase = 1, .output = std::nullopt};
    CHECK_FALSE(coin_round_send(outsider, layout, rng).has_value());

    NodeState tail{.id = 8, .val = 0, .decided = false, .finish = false, .phase = 4, .output = std::nullopt};
    CHECK(coin_round_send(tail, layout, rng).has_value());
}

TEST_CASE("advance_phase: fixed mode outputs, Las Vegas wraps") {
    CommitteeLayout layout{8, 4, 2};
    NodeState st{.id = 1, .val = 1, .decided = true, .finish = false, .phase = 4, .output = std::nullopt};

    NodeState fixed = advance_phase(st, layout, false);
    REQUIRE(fixed.output.has_value());
    CHECK(*fixed.output == 1);

    NodeState wrapped = advance_phase(st, layout, true);
    CHECK_FALSE(wrapped.output.has_value());
    CHECK(wrapped.phase == 1);

    st.phase = 2;
    NodeState mid = advance_phase(st, layout, true);
    CHECK(mid.phase == 3);
    CHECK_FALSE(mid.output.has_value());
}
