// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/results_io.hpp"

#include <stdexcept>

#include "json.hpp"

namespace cba {

using nlohmann::json;

OutputFormat parse_output_format(const std::string& text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "jsonl") return OutputFormat::Jsonl;
    throw std::invalid_argument("unknown output format '" + text + "' (csv|jsonl)");
}

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::string out;
    for (const std::string& v : violations) {
        if (!out.empty()) out += ';';
        out += v;
    }
    return out;
}

json payload_json(const PhaseMessage& m) {
    return json{{"phase", m.phase},
                {"round", m.round},
                {"val", m.val},
                {"decided", m.decided},
                {"coin", m.coin}};
}

json trial_json(const TrialResult& r) {
    json row{{"type", "trial"},
             {"trial", r.trial_index},
             {"seed", r.seed},
             {"n", r.n},
             {"t", r.t},
             {"q", r.q},
             {"adversary", r.adversary},
             {"committees", r.committees},
             {"phases", r.phases_used},
             {"rounds", r.rounds_used},
             {"messages_delivered", r.messages_delivered},
             {"agreement", r.agreement},
             {"validity", r.validity},
             {"validity_applicable", r.validity_applicable},
             {"terminated_all", r.terminated_all},
             {"violations", r.violations},
             {"inputs", r.inputs},
             {"outputs", r.outputs}};
    return row;
}

} // namespace

void write_results(std::ostream& os, std::span<const TrialResult> results,
                   OutputFormat format, const ConfigEcho& config) {
    if (format == OutputFormat::Csv) {
        for (const auto& [key, value] : config) os << "# " << key << "=" << value << "\n";
        os << "trial,seed,n,t,q,adversary,phases,rounds,agreement,validity,violations\n";
        for (const TrialResult& r : results) {
            os << r.trial_index << ',' << r.seed << ',' << r.n << ',' << r.t << ','
               << r.q << ',' << r.adversary << ',' << r.phases_used << ','
               << r.rounds_used << ',' << (r.agreement ? 1 : 0) << ','
               << (r.validity ? 1 : 0) << ',' << join_violations(r.violations) << '\n';
        }
        return;
    }
    json header{{"type", "config"}};
    for (const auto& [key, value] : config) header[key] = value;
    os << header.dump() << '\n';
    for (const TrialResult& r : results) os << trial_json(r).dump() << '\n';
}

void write_trace(std::ostream& os, std::span<const TraceRecord> trace) {
    for (const TraceRecord& rec : trace) {
        json row{{"trial", rec.trial},
                 {"phase", rec.phase},
                 {"round", rec.round},
                 {"sender", rec.sender},
                 {"recipient", rec.recipient},
                 {"corrupted", rec.corrupted},
                 {"payload", payload_json(rec.payload)}};
        os << row.dump() << '\n';
    }
}

void write_curves(std::ostream& os, std::span<const CurveRow> rows) {
    std::uint64_t current_n = 0;
    bool header_done = false;
    for (const CurveRow& row : rows) {
        if (row.n != current_n) {
            current_n = row.n;
            os << "# n=" << current_n << '\n';
        }
        if (!header_done) {
            os << "x,upper_new,upper_cc,lower_bb\n";
            header_done = true;
        }
        os << row.x << ',' << row.curves.upper_new << ',' << row.curves.upper_cc << ','
           << row.curves.lower_bb << '\n';
    }
}

} // namespace cba
