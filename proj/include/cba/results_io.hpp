// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cba/analysis.hpp"
#include "cba/sim.hpp"

namespace cba {

enum class OutputFormat : std::uint8_t { Csv, Jsonl };

/// "csv" or "jsonl"; throws std::invalid_argument otherwise.
OutputFormat parse_output_format(const std::string& text);

// Effective configuration, echoed into every results file so a row set can be
// reproduced without the invoking script.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// CSV: '#'-prefixed config lines, then the fixed header
/// trial,seed,n,t,q,adversary,phases,rounds,agreement,validity,violations
/// with booleans as 0/1 and violations joined by ';'. JSONL: a leading
/// {"type":"config",...} record, then one {"type":"trial",...} object per
/// result carrying the full TrialResult (inputs/outputs included).
void write_results(std::ostream& os, std::span<const TrialResult> results,
                   OutputFormat format, const ConfigEcho& config);

/// One structured-text line per delivered message:
/// {"trial":..,"phase":..,"round":..,"sender":..,"recipient":..,
///  "corrupted":..,"payload":{...}}.
void write_trace(std::ostream& os, std::span<const TraceRecord> trace);

/// Reference-curve rows "x,upper_new,upper_cc,lower_bb" for external
/// plotting, preceded by a "# n=..." group line per distinct n.
struct CurveRow {
    std::uint64_t n = 0;
    std::uint64_t x = 0;
    RefCurves curves;
};
void write_curves(std::ostream& os, std::span<const CurveRow> rows);

} // namespace cba
