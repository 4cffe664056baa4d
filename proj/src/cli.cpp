// Copyright (c) 2026 The cba developers
// Distributed under the MIT software license, see the accompanying
// file LICENSE or http://www.opensource.org/licenses/mit-license.php.

#include "cba/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"

#include "cba/analysis.hpp"
#include "cba/results_io.hpp"
#include "cba/sim.hpp"

namespace cba {
namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string trim_ws(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Config keys may be written with '_' or '-' and an optional leading "--";
// the matching flag always uses '-'.
std::string normalize_key(std::string key) {
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

// Flat key=value file, one pair per line. '#' and ';' start comments, later
// lines override earlier ones, an empty value leaves the flag at its default.
// An unquoted value with spaces becomes a value list (for the sweep lists);
// double quotes keep a value whole.
std::map<std::string, std::vector<std::string>> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::map<std::string, std::vector<std::string>> entries;
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = trim_ws(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        const auto eq = s.find('=');
        const std::string key =
            eq == std::string::npos ? "" : normalize_key(trim_ws(s.substr(0, eq)));
        if (key.empty())
            throw std::runtime_error("config line is not key=value: '" + line + "'");
        const std::string raw = trim_ws(s.substr(eq + 1));
        std::vector<std::string> values;
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
            values.push_back(raw.substr(1, raw.size() - 2));
        } else {
            auto pos = raw.find_first_not_of(" \t");
            while (pos != std::string::npos) {
                const auto end = raw.find_first_of(" \t", pos);
                values.push_back(
                    raw.substr(pos, end == std::string::npos ? end : end - pos));
                pos = raw.find_first_not_of(" \t", end);
            }
        }
        entries[key] = values;
    }
    return entries;
}

// The command line wins over the file: keys already present as flags stay
// untouched, every other file key is appended as an extra flag before the
// real parse. The parser itself never reads the file, so a key that does not
// match a flag of the chosen subcommand fails loudly like any unknown flag.
std::vector<std::string> merge_config_args(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(std::string("--config=").size());
    }
    if (path.empty()) return args;

    std::set<std::string> given;
    for (const std::string& a : args) {
        if (a.size() <= 2 || a.rfind("--", 0) != 0) continue;
        given.insert(normalize_key(a.substr(2, a.find('=') - 2)));
    }
    for (const auto& [key, values] : read_flat_config(path)) {
        if (values.empty() || key == "config" || given.count(key) > 0) continue;
        if (values.size() == 1) {
            args.push_back("--" + key + "=" + values.front());
        } else {
            args.push_back("--" + key);
            args.insert(args.end(), values.begin(), values.end());
        }
    }
    return args;
}

template <typename Fn>
void write_to(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output path '" + path + "'");
    fn(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

void print_summary(std::ostream& os, const std::string& label, const BatchSummary& s) {
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "%s: trials=%llu phases mean=%.3f median=%.1f p95=%.1f | "
                  "agreement=%.4f [%.4f, %.4f] validity=%.4f [%.4f, %.4f] mean_q=%.2f",
                  label.c_str(), static_cast<unsigned long long>(s.trials),
                  s.mean_phases, s.median_phases, s.p95_phases, s.agreement_rate,
                  s.agreement_ci.first, s.agreement_ci.second, s.validity_rate,
                  s.validity_ci.first, s.validity_ci.second, s.mean_q);
    os << buf << "\n";
}

// Flags shared by `run` and `sweep`.
struct CommonOptions {
    double alpha = 18.0;
    double gamma = 1.0;
    double log_base = 2.0;
    bool las_vegas = false;
    std::uint32_t max_phases = 0;
    std::string inputs = "ones";
    std::uint64_t trials = 100;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    std::string format = "csv";
    std::string config;
};

void add_common_options(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--alpha", o.alpha, "Committee scale factor")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "Failure exponent claimed by the whp guarantee")
        ->capture_default_str();
    sub->add_option("--log-base", o.log_base, "Log base in the committee formula")
        ->capture_default_str();
    sub->add_flag("--las-vegas", o.las_vegas,
                  "Loop over the committees until the finish path fires");
    sub->add_option("--max-phases", o.max_phases,
                    "Las Vegas cutoff in phases (0 = 64 committees' worth)")
        ->capture_default_str();
    sub->add_option("--inputs", o.inputs, "Input assignment")
        ->check(CLI::IsMember({"ones", "zeros", "random"}))
        ->capture_default_str();
    sub->add_option("--trials", o.trials, "Trials per configuration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (0 = library default)")
        ->capture_default_str();
    sub->add_option("--out", o.out, "Results path ('-' or empty for stdout)");
    sub->add_option("--format", o.format, "Results format")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    sub->add_option("--config", o.config,
                    "Flat key=value file mirroring the long flags; command-line "
                    "values take precedence");
}

ConfigEcho common_echo(const char* command, const CommonOptions& o) {
    return ConfigEcho{{"command", command},
                      {"alpha", fmt_g(o.alpha)},
                      {"gamma", fmt_g(o.gamma)},
                      {"log_base", fmt_g(o.log_base)},
                      {"las_vegas", o.las_vegas ? "1" : "0"},
                      {"max_phases", std::to_string(o.max_phases)},
                      {"inputs", o.inputs},
                      {"trials", std::to_string(o.trials)},
                      {"seed", std::to_string(o.seed)},
                      {"format", o.format}};
}

struct RunOptions {
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    std::string adversary = "null";
    bool record_trace = false;
    std::string trace_out;
    CommonOptions common;
};

int cmd_run(const RunOptions& o) {
    ProtocolParams params{o.n, o.t, o.common.alpha, o.common.gamma,
                          o.common.log_base, o.common.las_vegas};
    params.validate();
    TrialConfig base;
    base.params = params;
    base.adversary = o.adversary;
    base.inputs = parse_input_mode(o.common.inputs);
    base.seed = o.common.seed;
    base.max_phases = o.common.max_phases;
    base.record_trace = o.record_trace || !o.trace_out.empty();
    std::vector<TrialResult> results = run_batch(base, o.common.trials, o.common.threads);

    ConfigEcho echo = common_echo("run", o.common);
    echo.insert(echo.begin() + 1, {{"n", std::to_string(o.n)},
                                   {"t", std::to_string(o.t)},
                                   {"adversary", o.adversary}});
    OutputFormat fmt = parse_output_format(o.common.format);
    write_to(o.common.out,
             [&](std::ostream& s) { write_results(s, results, fmt, echo); });
    if (!o.trace_out.empty())
        write_to(o.trace_out, [&](std::ostream& s) {
            for (const TrialResult& r : results) write_trace(s, r.trace);
        });
    print_summary(std::cerr, "run", summarize(results));
    return 0;
}

struct SweepOptions {
    std::vector<std::uint32_t> n_list{16, 64, 256};
    std::vector<std::string> t_list{"max"};
    std::vector<std::string> adversaries{"null"};
    std::string curves_out;
    CommonOptions common;
};

std::uint32_t parse_t_entry(const std::string& entry, std::uint32_t n) {
    if (entry == "max") return (n - 1) / 3;
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(entry.data(), entry.data() + entry.size(), v);
    if (ec != std::errc{} || ptr != entry.data() + entry.size())
        throw std::invalid_argument("sweep: bad t entry '" + entry +
                                    "' (number or 'max')");
    return v;
}

int cmd_sweep(const SweepOptions& o) {
    struct Cell {
        std::uint32_t n;
        std::uint32_t t;
        std::string adversary;
    };
    std::vector<Cell> cells;
    for (std::uint32_t n : o.n_list)
        for (const std::string& te : o.t_list)
            for (const std::string& adv : o.adversaries)
                cells.push_back({n, parse_t_entry(te, n), adv});
    // Reject any bad combination before the first trial runs.
    for (const Cell& cell : cells) {
        ProtocolParams params{cell.n, cell.t, o.common.alpha, o.common.gamma,
                              o.common.log_base, o.common.las_vegas};
        params.validate();
        (void)make_adversary(cell.adversary, params);
    }

    std::vector<TrialResult> all;
    std::uint64_t cell_index = 0;
    for (const Cell& cell : cells) {
        ProtocolParams params{cell.n, cell.t, o.common.alpha, o.common.gamma,
                              o.common.log_base, o.common.las_vegas};
        TrialConfig base;
        base.params = params;
        base.adversary = cell.adversary;
        base.inputs = parse_input_mode(o.common.inputs);
        base.seed = split_seed(o.common.seed, cell_index++);
        base.max_phases = o.common.max_phases;
        std::vector<TrialResult> results =
            run_batch(base, o.common.trials, o.common.threads);
        char label[128];
        std::snprintf(label, sizeof label, "sweep n=%u t=%u adversary=%s", cell.n,
                      cell.t, cell.adversary.c_str());
        print_summary(std::cerr, label, summarize(results));
        all.insert(all.end(), std::make_move_iterator(results.begin()),
                   std::make_move_iterator(results.end()));
    }

    ConfigEcho echo = common_echo("sweep", o.common);
    auto join = [](const auto& list) {
        std::string out;
        for (const auto& item : list) {
            if (!out.empty()) out += ' ';
            if constexpr (std::is_same_v<std::decay_t<decltype(item)>, std::string>)
                out += item;
            else
                out += std::to_string(item);
        }
        return out;
    };
    echo.insert(echo.begin() + 1, {{"n_list", join(o.n_list)},
                                   {"t_list", join(o.t_list)},
                                   {"adversaries", join(o.adversaries)}});
    OutputFormat fmt = parse_output_format(o.common.format);
    write_to(o.common.out, [&](std::ostream& s) { write_results(s, all, fmt, echo); });

    if (!o.curves_out.empty()) {
        std::vector<CurveRow> rows;
        std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
        for (const Cell& cell : cells)
            if (seen.insert({cell.n, cell.t}).second)
                rows.push_back({cell.n, cell.t, reference_curves(cell.n, cell.t)});
        write_to(o.curves_out, [&](std::ostream& s) { write_curves(s, rows); });
    }
    return 0;
}

struct CoinOptions {
    std::uint32_t n = 0;
    std::uint32_t f = 0;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    int threads = 0;
    int shift = 0;
    bool has_shift = false;
    std::string config;
};

int cmd_coin_test(const CoinOptions& o) {
    if (o.f >= o.n) throw std::invalid_argument("coin-test: need f < n");
    CoinTrialSetup setup{o.n, o.n - o.f, o.f};
    AdversaryShift shift =
        o.has_shift ? AdversaryShift::exactly(o.shift) : AdversaryShift::worst();
    CoinGuarantee g = estimate_coin_guarantee(setup, shift, o.trials, o.seed, o.threads);

    const double floor = 1.0 / 12.0;
    const double sigma = std::sqrt(floor * (1.0 - floor) / static_cast<double>(o.trials));
    const double bar = floor - 3.0 * sigma;
    char buf[256];
    std::snprintf(buf, sizeof buf, "coin n=%u g=%u f=%u trials=%llu mode=%s", o.n,
                  setup.g, o.f, static_cast<unsigned long long>(o.trials),
                  o.has_shift ? "fixed-shift" : "worst-case");
    std::cout << buf << "\n";
    std::snprintf(buf, sizeof buf,
                  "delta=%.6f epsilon=%.6f empirical_delta=%.6f empirical_eps0=%.6f",
                  g.delta, g.epsilon, g.empirical_delta, g.empirical_eps0);
    std::cout << buf << "\n";
    std::snprintf(buf, sizeof buf,
                  "Pr(X > f)=%.6f Pr(X < -f)=%.6f per-side floor 1/12-3sigma=%.6f",
                  g.p_pos, g.p_neg, bar);
    std::cout << buf << "\n";
    bool ok = g.p_pos >= bar && g.p_neg >= bar;
    std::cout << "coin floor check: " << (ok ? "OK" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

struct VerifyOptions {
    std::uint64_t trials = 20000;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string config;
};

int cmd_verify(const VerifyOptions& o) {
    int failures = 0;
    char buf[160];
    for (int g = 1; g <= 16; ++g) {
        long long m2 = exact_moment(g, 2);
        long long want2 = g;
        bool ok2 = m2 == want2;
        failures += !ok2;
        std::snprintf(buf, sizeof buf, "E[X^2] g=%d: %lld == %lld %s", g, m2, want2,
                      ok2 ? "OK" : "FAIL");
        std::cout << buf << "\n";
        long long m4 = exact_moment(g, 4);
        long long want4 = 3LL * g * g - 2LL * g;
        bool ok4 = m4 == want4;
        failures += !ok4;
        std::snprintf(buf, sizeof buf, "E[X^4] g=%d: %lld == %lld %s", g, m4, want4,
                      ok4 ? "OK" : "FAIL");
        std::cout << buf << "\n";
    }
    for (std::uint32_t n : {64u, 100u, 256u}) {
        std::uint32_t f = static_cast<std::uint32_t>(
            std::floor(std::sqrt(static_cast<double>(n)) / 2.0));
        CoinTrialSetup setup{n, n - f, f};
        CoinGuarantee g = estimate_coin_guarantee(setup, AdversaryShift::worst(),
                                                  o.trials, o.seed, o.threads);
        double bound = pz_bound(setup);
        double sigma = std::sqrt(std::max(g.p_pos * (1.0 - g.p_pos), 1e-12) /
                                 static_cast<double>(o.trials));
        bool ok = bound <= g.p_pos + 3.0 * sigma;
        failures += !ok;
        std::snprintf(buf, sizeof buf,
                      "pz n=%u f=%u: bound %.6f <= empirical %.6f + 3sigma %.6f %s", n,
                      f, bound, g.p_pos, 3.0 * sigma, ok ? "OK" : "FAIL");
        std::cout << buf << "\n";
    }
    std::cout << "verify: " << (failures ? "FAIL" : "OK") << "\n";
    return failures ? 1 : 0;
}

} // namespace

int parse_and_dispatch(std::vector<std::string> args) {
    CLI::App app{"Committee-based agreement simulator under an adaptive adversary",
                 "cba"};
    app.require_subcommand(1);

    RunOptions ro;
    CLI::App* run = app.add_subcommand("run", "One batch of trials at fixed (n, t)");
    run->add_option("--n", ro.n, "Node count")->required();
    run->add_option("--t", ro.t, "Tolerated corruptions (3t+1 <= n)")->required();
    run->add_option("--adversary", ro.adversary,
                    "Strategy, name[:key=value,...]: null | crash | splitworld | "
                    "coinkiller | antiassigned")
        ->capture_default_str();
    run->add_flag("--record-trace", ro.record_trace,
                  "Keep per-message traces in memory (implied by --trace-out)");
    run->add_option("--trace-out", ro.trace_out, "Write delivered-message trace here");
    add_common_options(run, ro.common);

    SweepOptions so;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Cross-product over n-list x t-list x adversaries");
    sweep->add_option("--n-list", so.n_list, "Node counts")->capture_default_str();
    sweep->add_option("--t-list", so.t_list, "Corruption bounds; 'max' = (n-1)/3")
        ->capture_default_str();
    sweep->add_option("--adversary-list", so.adversaries, "Strategies")
        ->capture_default_str();
    sweep->add_option("--curves-out", so.curves_out,
                      "Write reference curve rows for each (n, t) here");
    add_common_options(sweep, so.common);

    CoinOptions co;
    CLI::App* coin = app.add_subcommand(
        "coin-test", "Estimate the committee coin guarantee and check the 1/12 floor");
    coin->add_option("--n", co.n, "Contributors in total")->required();
    coin->add_option("--f", co.f, "Adversary-controlled contributors")
        ->capture_default_str();
    coin->add_option("--trials", co.trials, "Monte Carlo trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    coin->add_option("--seed", co.seed, "Master seed")->capture_default_str();
    coin->add_option("--threads", co.threads, "Worker threads (0 = library default)")
        ->capture_default_str();
    CLI::Option* shift_opt =
        coin->add_option("--shift", co.shift,
                         "Fixed shift in [-f, f] instead of the worst-case rush");
    coin->add_option("--config", co.config, "Flat key=value file; command line wins");

    VerifyOptions vo;
    CLI::App* verify = app.add_subcommand(
        "verify", "Brute-force moment oracle and bound soundness checks");
    verify->add_option("--trials", vo.trials, "Monte Carlo trials per setup")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verify->add_option("--seed", vo.seed, "Master seed")->capture_default_str();
    verify->add_option("--threads", vo.threads, "Worker threads (0 = library default)")
        ->capture_default_str();
    verify->add_option("--config", vo.config, "Flat key=value file; command line wins");

    try {
        args = merge_config_args(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    co.has_shift = shift_opt->count() > 0;

    try {
        if (run->parsed()) return cmd_run(ro);
        if (sweep->parsed()) return cmd_sweep(so);
        if (coin->parsed()) return cmd_coin_test(co);
        if (verify->parsed()) return cmd_verify(vo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace cba
