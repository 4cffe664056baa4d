// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/adversary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace cba {

namespace {

bool is_corrupted(const RoundSnapshot& snap, NodeId id) {
    return snap.status[id - 1] == NodeStatus::Corrupted;
}

// Number of committed honest broadcasts carrying decided=true this round.
std::uint32_t pending_decided(const RoundSnapshot& snap) {
    std::uint32_t k = 0;
    for (NodeId id = 1; id <= snap.params->n; ++id) {
        if (snap.status[id - 1] != NodeStatus::Honest) continue;
        const auto& m = snap.pending[id - 1];
        if (m && m->decided) ++k;
    }
    return k;
}

} // namespace

void CrashAdversary::act(const RoundSnapshot& snap, Rng&, AdversaryAction& out) {
    out.clear();
    if (snap.phase_abs != phase_ || snap.round != 1) return;
    std::uint32_t want = std::min(count_, snap.budget_remaining);
    for (NodeId id = 1; id <= snap.params->n && want > 0; ++id) {
        if (snap.status[id - 1] != NodeStatus::Honest) continue;
        out.new_corruptions.push_back(id);
        --want;
    }
    // Crashed nodes stay silent forever: no overrides, ever.
}

void SplitWorld::act(const RoundSnapshot& snap, Rng&, AdversaryAction& out) {
    out.clear();
    const std::uint32_t n = snap.params->n;
    if (snap.phase_abs == 1 && snap.round == 1) {
        std::uint32_t want = std::min(count_, snap.budget_remaining);
        for (NodeId id = 1; id <= n && want > 0; ++id, --want)
            out.new_corruptions.push_back(id);
    }
    const NodeId half = n / 2;
    if (half == 0) return; // n == 1: no two worlds to split
    auto emit = [&](NodeId id) {
        PhaseMessage m;
        m.phase = snap.phase;
        m.round = snap.round;
        m.decided = false;
        if (snap.round == 2 && snap.layout->committee_of(id) == snap.phase) {
            m.val = 1;
            m.coin = 1;
            out.overrides.push_back({id, 1, half, m});
            m.val = 0;
            m.coin = -1;
            out.overrides.push_back({id, half + 1, n, m});
        } else {
            m.coin = 0;
            m.val = 1;
            out.overrides.push_back({id, 1, half, m});
            m.val = 0;
            out.overrides.push_back({id, half + 1, n, m});
        }
    };
    for (NodeId id : out.new_corruptions) emit(id);
    for (NodeId id = 1; id <= n; ++id)
        if (is_corrupted(snap, id)) emit(id);
}

void CoinKiller::act(const RoundSnapshot& snap, Rng&, AdversaryAction& out) {
    out.clear();
    if (snap.round != 2) return;
    if (spent_ >= budget_) return;
    const std::uint32_t n = snap.params->n;
    const std::uint32_t t = snap.params->t;
    // If enough committed broadcasts already carry decided=true, round 2 will
    // resolve through them and the coin is dead weight: save the budget.
    if (pending_decided(snap) >= n - t) return;

    std::vector<NodeId> pos;
    std::vector<NodeId> neg;
    long long sum = 0;
    auto [lo, hi] = snap.layout->member_range(snap.phase);
    for (NodeId id = lo; id <= hi; ++id) {
        if (snap.status[id - 1] != NodeStatus::Honest) continue;
        const auto& m = snap.pending[id - 1];
        if (!m || m->coin == 0) continue;
        sum += m->coin;
        (m->coin > 0 ? pos : neg).push_back(id);
    }
    // Fewest flips that change the sign of the delivered sum: flipping one
    // aligned contributor moves the sum by 2 toward the other side.
    const long long jstar = sum >= 0 ? (sum + 2) / 2 : (-sum + 1) / 2;
    auto& aligned = sum >= 0 ? pos : neg;
    std::uint32_t cap = std::min(snap.budget_remaining, budget_ - spent_);
    if (spend_ > 0) cap = std::min(cap, spend_);
    if (jstar > static_cast<long long>(aligned.size())) return;
    if (jstar > static_cast<long long>(cap)) return;

    const NodeId half = n / 2;
    if (half == 0 || half == n) return;
    for (long long k = 0; k < jstar; ++k) {
        const NodeId id = aligned[static_cast<std::size_t>(k)];
        out.new_corruptions.push_back(id);
        PhaseMessage flipped = *snap.pending[id - 1];
        flipped.coin = static_cast<std::int8_t>(-flipped.coin);
        out.overrides.push_back({id, 1, half, flipped});
        out.overrides.push_back({id, half + 1, n, *snap.pending[id - 1]});
    }
    spent_ += static_cast<std::uint32_t>(jstar);
}

void AntiAssigned::act(const RoundSnapshot& snap, Rng&, AdversaryAction& out) {
    out.clear();
    if (snap.round != 2) return;
    if (spent_ >= budget_) return;
    // The assigned value, if any, shows up as decided=true broadcasts.
    int b = -1;
    for (NodeId id = 1; id <= snap.params->n; ++id) {
        if (snap.status[id - 1] != NodeStatus::Honest) continue;
        const auto& m = snap.pending[id - 1];
        if (m && m->decided) {
            b = m->val;
            break;
        }
    }
    if (b < 0) return;
    const std::int8_t align = b == 1 ? std::int8_t{1} : std::int8_t{-1};
    std::vector<NodeId> supporters;
    auto [lo, hi] = snap.layout->member_range(snap.phase);
    for (NodeId id = lo; id <= hi; ++id) {
        if (snap.status[id - 1] != NodeStatus::Honest) continue;
        const auto& m = snap.pending[id - 1];
        if (m && m->coin == align) supporters.push_back(id);
    }
    std::uint32_t cap = std::min(snap.budget_remaining, budget_ - spent_);
    if (spend_ > 0) cap = std::min(cap, spend_);
    const std::size_t m = std::min<std::size_t>(cap, supporters.size());
    for (std::size_t k = 0; k < m; ++k) {
        const NodeId id = supporters[k];
        out.new_corruptions.push_back(id);
        PhaseMessage flipped = *snap.pending[id - 1];
        flipped.coin = static_cast<std::int8_t>(-align);
        out.overrides.push_back({id, 1, snap.params->n, flipped});
    }
    spent_ += static_cast<std::uint32_t>(m);
}

namespace {

std::uint32_t parse_u32(std::string_view key, std::string_view text) {
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("adversary: bad value for '" + std::string(key) +
                                    "': '" + std::string(text) + "'");
    return v;
}

struct SpecParams {
    std::vector<std::pair<std::string, std::uint32_t>> kv;

    std::uint32_t take(std::string_view key, std::uint32_t fallback) {
        for (auto it = kv.begin(); it != kv.end(); ++it) {
            if (it->first == key) {
                std::uint32_t v = it->second;
                kv.erase(it);
                return v;
            }
        }
        return fallback;
    }

    void reject_leftovers(std::string_view name) const {
        if (kv.empty()) return;
        throw std::invalid_argument("adversary '" + std::string(name) +
                                    "': unknown key '" + kv.front().first + "'");
    }
};

SpecParams parse_params(std::string_view text) {
    SpecParams out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view item = text.substr(pos, comma - pos);
        std::size_t eq = item.find('=');
        if (item.empty() || eq == std::string_view::npos || eq == 0)
            throw std::invalid_argument("adversary: expected key=value, got '" +
                                        std::string(item) + "'");
        out.kv.emplace_back(std::string(item.substr(0, eq)),
                            parse_u32(item.substr(0, eq), item.substr(eq + 1)));
        pos = comma + 1;
    }
    return out;
}

} // namespace

std::unique_ptr<Adversary> make_adversary(const std::string& spec,
                                          const ProtocolParams& params) {
    std::string_view text = spec;
    std::string_view name = text;
    std::string_view rest;
    if (std::size_t colon = text.find(':'); colon != std::string_view::npos) {
        name = text.substr(0, colon);
        rest = text.substr(colon + 1);
    }
    SpecParams kv = parse_params(rest);

    std::unique_ptr<Adversary> built;
    if (name == "null") {
        built = std::make_unique<NullAdversary>();
    } else if (name == "crash") {
        std::uint32_t count = kv.take("count", params.t);
        std::uint32_t phase = kv.take("phase", 1);
        built = std::make_unique<CrashAdversary>(count, phase);
    } else if (name == "splitworld") {
        built = std::make_unique<SplitWorld>(kv.take("count", params.t));
    } else if (name == "coinkiller") {
        std::uint32_t spend = kv.take("spend", 0);
        std::uint32_t budget = kv.take("budget", params.t);
        built = std::make_unique<CoinKiller>(spend, budget);
    } else if (name == "antiassigned") {
        std::uint32_t spend = kv.take("spend", 0);
        std::uint32_t budget = kv.take("budget", params.t);
        built = std::make_unique<AntiAssigned>(spend, budget);
    } else {
        throw std::invalid_argument("unknown adversary '" + std::string(name) + "'");
    }
    kv.reject_leftovers(name);
    return built;
}

} // namespace cba
