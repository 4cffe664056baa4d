// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/sim.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cba {

const char* input_mode_name(InputMode mode) {
    switch (mode) {
    case InputMode::Ones: return "ones";
    case InputMode::Zeros: return "zeros";
    case InputMode::Random: return "random";
    }
    return "?";
}

InputMode parse_input_mode(const std::string& text) {
    if (text == "ones") return InputMode::Ones;
    if (text == "zeros") return InputMode::Zeros;
    if (text == "random") return InputMode::Random;
    throw std::invalid_argument("unknown input mode '" + text + "' (ones|zeros|random)");
}

namespace {

constexpr std::uint32_t kNoOverride = std::numeric_limits<std::uint32_t>::max();

class Engine {
public:
    explicit Engine(const TrialConfig& cfg, Adversary* injected = nullptr)
        : cfg_(cfg),
          params_(cfg.params),
          layout_(committee_count(params_)),
          n_(params_.n),
          t_(params_.t),
          honest_rng_(split_seed(cfg.seed, 1)),
          adv_rng_(split_seed(cfg.seed, 2)),
          inputs_rng_(split_seed(cfg.seed, 3)),
          owned_(injected ? nullptr : make_adversary(cfg.adversary, params_)),
          adversary_(injected ? injected : owned_.get()) {}

    TrialResult run();

private:
    void run_phase(std::uint32_t p, std::uint32_t wrapped);
    void adversary_step(std::uint32_t p, std::uint32_t wrapped, std::uint8_t round);
    void deliver_and_transition(std::uint32_t p, std::uint32_t wrapped, std::uint8_t round);
    const PhaseMessage* find_override(NodeId sender, NodeId recipient) const;
    void violation(const char* what, std::uint32_t p) {
        result_.violations.push_back(std::string(what) + "@p" + std::to_string(p));
    }
    void note_termination(std::size_t i, std::uint32_t p) {
        status_[i] = NodeStatus::Terminated;
        term_phase_[i] = p;
        --live_honest_;
        if (first_term_ == 0) first_term_ = p;
    }

    const TrialConfig& cfg_;
    ProtocolParams params_;
    CommitteeLayout layout_;
    std::uint32_t n_;
    std::uint32_t t_;
    Rng honest_rng_;
    Rng adv_rng_;
    Rng inputs_rng_;
    std::unique_ptr<Adversary> owned_;
    Adversary* adversary_;

    std::vector<NodeState> states_;
    std::vector<NodeStatus> status_;
    std::vector<std::optional<PhaseMessage>> pending_;
    std::vector<std::uint32_t> term_phase_; // 0 = still running
    std::uint32_t corrupted_ = 0;
    std::uint32_t live_honest_ = 0;
    std::uint32_t first_term_ = 0;

    AdversaryAction action_;
    std::vector<MessageOverride> ov_sorted_;
    std::vector<std::uint32_t> ov_first_; // per sender, index into ov_sorted_
    std::vector<NodeId> finished_now_;
    std::vector<ReceivedMessage> inbox_;
    std::vector<CoinContribution> coins_;

    TrialResult result_;
};

TrialResult Engine::run() {
    result_.trial_index = cfg_.trial_index;
    result_.seed = cfg_.seed;
    result_.n = n_;
    result_.t = t_;
    result_.adversary = adversary_->name();
    result_.committees = layout_.c;

    states_.resize(n_);
    status_.assign(n_, NodeStatus::Honest);
    pending_.assign(n_, std::nullopt);
    term_phase_.assign(n_, 0);
    ov_first_.assign(n_, kNoOverride);
    result_.inputs.resize(n_);
    live_honest_ = n_;
    inbox_.reserve(n_);
    coins_.reserve(layout_.s + 8);
    for (NodeId id = 1; id <= n_; ++id) {
        std::uint8_t in = 0;
        switch (cfg_.inputs) {
        case InputMode::Ones: in = 1; break;
        case InputMode::Zeros: in = 0; break;
        case InputMode::Random: in = static_cast<std::uint8_t>(inputs_rng_.bit()); break;
        }
        result_.inputs[id - 1] = in;
        states_[id - 1] = NodeState{id, in, false, false, 1, std::nullopt};
    }

    const std::uint32_t limit = params_.las_vegas
        ? (cfg_.max_phases ? cfg_.max_phases : 64 * layout_.c)
        : layout_.c;
    std::uint32_t p = 0;
    while (p < limit && live_honest_ > 0) {
        ++p;
        run_phase(p, (p - 1) % layout_.c + 1);
    }

    result_.terminated_all = live_honest_ == 0;
    result_.outputs.assign(n_, -1);
    for (std::size_t i = 0; i < n_; ++i) {
        if (status_[i] == NodeStatus::Terminated)
            result_.outputs[i] = static_cast<std::int8_t>(*states_[i].output);
        else if (status_[i] == NodeStatus::Honest) // Las Vegas cutoff survivor
            result_.outputs[i] = static_cast<std::int8_t>(states_[i].val);
    }

    // Agreement over protocol outputs (cutoff survivors never produced one).
    result_.agreement = true;
    int seen = -1;
    for (std::size_t i = 0; i < n_; ++i) {
        if (status_[i] != NodeStatus::Terminated) continue;
        if (seen < 0) seen = result_.outputs[i];
        else if (seen != result_.outputs[i]) result_.agreement = false;
    }

    // Validity binds only when the never-corrupted nodes started unanimous.
    int common = -1;
    bool applicable = true;
    for (std::size_t i = 0; i < n_; ++i) {
        if (status_[i] == NodeStatus::Corrupted) continue;
        if (common < 0) common = result_.inputs[i];
        else if (common != result_.inputs[i]) applicable = false;
    }
    result_.validity_applicable = applicable;
    result_.validity = true;
    if (applicable) {
        for (std::size_t i = 0; i < n_; ++i)
            if (status_[i] == NodeStatus::Terminated && result_.outputs[i] != common)
                result_.validity = false;
    }

    // Once one honest node terminates at phase i, every honest node must be
    // done by phase i+2; judged only when the run was allowed to reach i+2.
    if (first_term_ > 0 && limit >= first_term_ + 2) {
        bool ok = true;
        for (std::size_t i = 0; i < n_; ++i) {
            if (status_[i] == NodeStatus::Honest) ok = false; // cutoff survivor
            if (status_[i] == NodeStatus::Terminated && term_phase_[i] > first_term_ + 2)
                ok = false;
        }
        if (!ok) violation("termination-spread", first_term_);
    }

    return result_;
}

void Engine::run_phase(std::uint32_t p, std::uint32_t wrapped) {
    for (std::size_t i = 0; i < n_; ++i)
        if (status_[i] == NodeStatus::Honest && states_[i].phase != wrapped)
            throw std::logic_error("engine: live node out of phase lockstep");

    // Round 1: everyone live broadcasts (val, decided); nodes that entered
    // the phase with finish set terminate right after this last broadcast.
    for (std::size_t i = 0; i < n_; ++i)
        pending_[i] = status_[i] == NodeStatus::Honest
                          ? std::optional<PhaseMessage>(round1_send(states_[i]))
                          : std::nullopt;
    adversary_step(p, wrapped, 1);

    // Premise of the supermajority check: the honest round-1 broadcasts that
    // actually went out (post-corruption) were >= n-t copies of one b.
    std::uint32_t h0 = 0;
    std::uint32_t h1 = 0;
    for (std::size_t i = 0; i < n_; ++i)
        if (status_[i] == NodeStatus::Honest) (states_[i].val ? h1 : h0)++;
    int premise = -1;
    if (h1 >= n_ - t_) premise = 1;
    else if (h0 >= n_ - t_) premise = 0;

    finished_now_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
        if (status_[i] != NodeStatus::Honest || !states_[i].finish) continue;
        states_[i].output = states_[i].val;
        note_termination(i, p);
        finished_now_.push_back(static_cast<NodeId>(i + 1));
    }

    deliver_and_transition(p, wrapped, 1);
    result_.phases_used = p;
    result_.rounds_used = 2 * p - 1;

    std::uint32_t a0 = 0;
    std::uint32_t a1 = 0;
    for (std::size_t i = 0; i < n_; ++i)
        if (status_[i] == NodeStatus::Honest && states_[i].decided)
            (states_[i].val ? a1 : a0)++;
    if (a0 > 0 && a1 > 0) violation("unique-assigned-value", p);

    if (live_honest_ == 0) return;

    // Round 2: broadcasts again carry (val, decided); the phase's committee
    // members piggyback their coin flips, drawn in ID order.
    for (std::size_t i = 0; i < n_; ++i) {
        if (status_[i] != NodeStatus::Honest) {
            pending_[i] = std::nullopt;
            continue;
        }
        auto contrib = coin_round_send(states_[i], layout_, honest_rng_);
        pending_[i] = PhaseMessage{wrapped, 2, states_[i].val, states_[i].decided,
                                   contrib ? static_cast<std::int8_t>(contrib->value)
                                           : std::int8_t{0}};
    }
    adversary_step(p, wrapped, 2);
    deliver_and_transition(p, wrapped, 2);
    result_.rounds_used = 2 * p;

    if (premise >= 0) {
        bool ok = true;
        for (std::size_t i = 0; i < n_; ++i)
            if (status_[i] == NodeStatus::Honest &&
                states_[i].val != static_cast<std::uint8_t>(premise))
                ok = false;
        for (NodeId id : finished_now_)
            if (*states_[id - 1].output != static_cast<std::uint8_t>(premise)) ok = false;
        if (!ok) violation("supermajority-propagation", p);
    }

    for (std::size_t i = 0; i < n_; ++i) {
        if (status_[i] != NodeStatus::Honest) continue;
        states_[i] = advance_phase(states_[i], layout_, params_.las_vegas);
        if (states_[i].output) note_termination(i, p);
    }
}

void Engine::adversary_step(std::uint32_t p, std::uint32_t wrapped, std::uint8_t round) {
    RoundSnapshot snap;
    snap.phase_abs = p;
    snap.phase = wrapped;
    snap.round = round;
    snap.params = &params_;
    snap.layout = &layout_;
    snap.states = states_;
    snap.status = status_;
    snap.pending = pending_;
    snap.budget_remaining = t_ - corrupted_;
    action_.clear();
    adversary_->act(snap, adv_rng_, action_);

    if (action_.new_corruptions.size() > snap.budget_remaining)
        throw std::runtime_error("adversary: corruption budget exceeded");
    for (NodeId id : action_.new_corruptions) {
        if (id < 1 || id > n_)
            throw std::runtime_error("adversary: corrupted an invalid node id");
        if (status_[id - 1] == NodeStatus::Terminated)
            throw std::runtime_error("adversary: corrupted a terminated node");
        if (status_[id - 1] != NodeStatus::Honest)
            throw std::runtime_error("adversary: corrupted the same node twice");
        status_[id - 1] = NodeStatus::Corrupted;
        pending_[id - 1].reset();
        ++corrupted_;
        --live_honest_;
    }
    result_.q = corrupted_;

    ov_sorted_.assign(action_.overrides.begin(), action_.overrides.end());
    std::sort(ov_sorted_.begin(), ov_sorted_.end(),
              [](const MessageOverride& a, const MessageOverride& b) {
                  return a.sender != b.sender ? a.sender < b.sender : a.lo < b.lo;
              });
    ov_first_.assign(n_, kNoOverride);
    NodeId prev_sender = 0;
    NodeId prev_hi = 0;
    for (std::size_t k = 0; k < ov_sorted_.size(); ++k) {
        const MessageOverride& o = ov_sorted_[k];
        if (o.sender < 1 || o.sender > n_ ||
            status_[o.sender - 1] != NodeStatus::Corrupted)
            throw std::runtime_error("adversary: override from a non-corrupted sender");
        if (o.lo < 1 || o.hi > n_ || o.lo > o.hi)
            throw std::runtime_error("adversary: override range out of bounds");
        if (o.sender == prev_sender && o.lo <= prev_hi)
            throw std::runtime_error("adversary: overlapping override ranges");
        if (o.msg.val > 1 || o.msg.coin < -1 || o.msg.coin > 1 ||
            o.msg.round < 1 || o.msg.round > 2 ||
            o.msg.phase < 1 || o.msg.phase > layout_.c)
            throw std::runtime_error("adversary: override message not wire-representable");
        if (ov_first_[o.sender - 1] == kNoOverride)
            ov_first_[o.sender - 1] = static_cast<std::uint32_t>(k);
        prev_sender = o.sender;
        prev_hi = o.hi;
    }
}

const PhaseMessage* Engine::find_override(NodeId sender, NodeId recipient) const {
    std::uint32_t k = ov_first_[sender - 1];
    if (k == kNoOverride) return nullptr;
    for (; k < ov_sorted_.size() && ov_sorted_[k].sender == sender; ++k)
        if (ov_sorted_[k].lo <= recipient && recipient <= ov_sorted_[k].hi)
            return &ov_sorted_[k].msg;
    return nullptr;
}

void Engine::deliver_and_transition(std::uint32_t p, std::uint32_t wrapped,
                                    std::uint8_t round) {
    (void)wrapped;
    for (NodeId u = 1; u <= n_; ++u) {
        if (status_[u - 1] != NodeStatus::Honest) continue;
        inbox_.clear();
        coins_.clear();
        for (NodeId s = 1; s <= n_; ++s) {
            const PhaseMessage* m = nullptr;
            if (pending_[s - 1]) m = &*pending_[s - 1];
            else if (status_[s - 1] == NodeStatus::Corrupted) m = find_override(s, u);
            if (!m) continue;
            inbox_.push_back(ReceivedMessage{s, *m});
            if (round == 2 && m->coin != 0)
                coins_.push_back(CoinContribution{s, m->coin});
            if (cfg_.record_trace)
                result_.trace.push_back(TraceRecord{
                    cfg_.trial_index, p, round, s, u,
                    status_[s - 1] == NodeStatus::Corrupted, *m});
        }
        result_.messages_delivered += inbox_.size();
        if (round == 1)
            states_[u - 1] = round1_receive(states_[u - 1], inbox_, params_);
        else
            states_[u - 1] = round2_receive(states_[u - 1], inbox_, params_,
                                            layout_, coins_, nullptr);
    }
}

} // namespace

TrialResult run_trial(const TrialConfig& config) {
    Engine engine(config);
    return engine.run();
}

TrialResult run_trial(const TrialConfig& config, Adversary& adversary) {
    Engine engine(config, &adversary);
    return engine.run();
}

namespace {

TrialConfig nth_trial(const TrialConfig& base, std::uint64_t k) {
    TrialConfig cfg = base;
    cfg.seed = split_seed(base.seed, k);
    cfg.trial_index = k;
    return cfg;
}

} // namespace

std::vector<TrialResult> run_batch(const TrialConfig& base, std::uint64_t trials,
                                   int threads) {
    if (trials == 0) throw std::invalid_argument("run_batch: trials must be >= 1");
    base.params.validate();
    (void)make_adversary(base.adversary, base.params); // surface parse errors here
    std::vector<TrialResult> out(trials);
    bool failed = false;
    std::string first_error;
#ifdef _OPENMP
    int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(trials); ++k) {
        try {
            out[static_cast<std::size_t>(k)] =
                run_trial(nth_trial(base, static_cast<std::uint64_t>(k)));
        } catch (const std::exception& e) {
#pragma omp critical
            {
                if (!failed) first_error = e.what();
                failed = true;
            }
        }
    }
#else
    (void)threads;
    for (std::uint64_t k = 0; k < trials; ++k) {
        try {
            out[k] = run_trial(nth_trial(base, k));
        } catch (const std::exception& e) {
            if (!failed) first_error = e.what();
            failed = true;
        }
    }
#endif
    if (failed) throw std::runtime_error("run_batch: trial failed: " + first_error);
    return out;
}

std::vector<TrialResult> run_batch_serial(const TrialConfig& base,
                                          std::uint64_t trials) {
    if (trials == 0) throw std::invalid_argument("run_batch: trials must be >= 1");
    base.params.validate();
    (void)make_adversary(base.adversary, base.params);
    std::vector<TrialResult> out(trials);
    for (std::uint64_t k = 0; k < trials; ++k) out[k] = run_trial(nth_trial(base, k));
    return out;
}

} // namespace cba
