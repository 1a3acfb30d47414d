// Acceptance suite: one pass/fail line per criterion, nonzero exit if any fail.

#include <sys/types.h>
#include <sys/wait.h>

#include <csignal>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "httplib.h"

#include "reliablocks/avs.hpp"
#include "reliablocks/feed.hpp"
#include "reliablocks/scoring.hpp"
#include "reliablocks/service.hpp"
#include "reliablocks/store.hpp"

#include "oracles.hpp"

using namespace reliablocks;
using namespace reliablocks::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail = "") {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": "
              << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << '\n';
    if (!pass) ++g_failures;
}

ScoringParams desk_params() {
    ScoringParams p;
    p.kappa_value = 1000.0;
    p.kappa_depth = 20.0;
    p.finality_depth = 100;
    return p;
}

ChainState replay_feed(const std::vector<FeedRecord>& feed, const ScoringParams& p) {
    ChainState s;
    for (const auto& r : feed) {
        if (r.is_exit())
            s.apply_event(r.exit(), p);
        else
            s.advance_head(r.head().l2_block);
    }
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct RunResult {
    int code;
    std::string out;
};

RunResult run_cli(const fs::path& tmp, const std::string& args) {
    fs::path out = tmp / "stdout.txt";
    std::string cmd = std::string(RELIABLOCKS_BIN) + " " + args + " >" + out.string() +
                      " 2>" + (tmp / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    return {WEXITSTATUS(rc), slurp(out)};
}

// --- criterion 1: interest band -------------------------------------------

void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    auto p = desk_params();
    GenParams gp;
    gp.seed = 7;
    gp.num_blocks = 1000;
    gp.exit_rate = 0.5;
    auto chain = replay_feed(generate_feed(gp), p);

    bool in_band = true, endpoints_seen_ok = true;
    for (std::uint64_t b = 0; b <= chain.head(); ++b) {
        auto r = chain.query_block(b, p);
        double rate = interest_rate(r.score, p);
        in_band = in_band && rate >= 0.01 && rate <= 0.03;
        if (r.score == 0.0 && rate != 0.03) endpoints_seen_ok = false;
        if (r.score == 100.0 && rate != 0.01) endpoints_seen_ok = false;
    }
    // endpoint exactness is part of the contract, not an accident of the feed
    bool endpoints_exact = interest_rate(0.0, p) == 0.03 && interest_rate(100.0, p) == 0.01;
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    report(1, "interest rates in [0.01, 0.03] with exact band endpoints",
           in_band && endpoints_seen_ok && endpoints_exact && ms < 1000,
           std::to_string(ms) + " ms over a 1000-block feed");
}

// --- criterion 2: score bounds and decay shape ----------------------------

void criterion2() {
    auto p = desk_params();
    ScoringParams fine = p;
    fine.score_decimals = 9; // pre-rounding comparison

    bool bounds = true, oracle_ok = true;
    double max_err = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double w = i * 0.01;
        double got = score_from_weight(w, false, fine);
        double want = static_cast<double>(score_oracle(static_cast<long double>(w)));
        bounds = bounds && got >= 0.0 && got <= 100.0;
        double err = std::abs(got - want);
        max_err = std::max(max_err, err);
        oracle_ok = oracle_ok && err < 5e-4;
    }
    double at_one = score_from_weight(1.0, false, p);
    bool anchor = std::abs(at_one - 63.212) <= 0.001;
    report(2, "score bounds and exponential decay vs series oracle",
           bounds && oracle_ok && anchor,
           "max |err| = " + std::to_string(max_err) + ", score(w=1) = " +
               std::to_string(at_one));
}

// --- criterion 3: monotonicity suite --------------------------------------

void criterion3() {
    auto p = desk_params(); // finality_depth = 100
    std::mt19937_64 rng(2026);
    bool monotone = true, inheritance = true, absorbing = true;
    int cases = 0;

    for (int trial = 0; trial < 40 && monotone && inheritance; ++trial) {
        ChainState s;
        int n = 25 + static_cast<int>(rng() % 16);
        for (int i = 0; i < n; ++i, ++cases) {
            std::uint64_t before_head = s.head();
            std::vector<double> before;
            for (std::uint64_t b = 0; b <= before_head; ++b)
                before.push_back(s.query_block(b, p).score);

            FastExitEvent e;
            e.id = "a3-" + std::to_string(trial) + "-" + std::to_string(i);
            e.l2_block = rng() % 150;
            e.value_base_units = u128(rng() % 200) * u128{1000000000000000000ULL};
            s.apply_event(e, p);
            if (rng() % 4 == 0) s.advance_head(s.head() + rng() % 30);

            for (std::uint64_t b = 0; b <= before_head; ++b)
                monotone = monotone && s.query_block(b, p).score >= before[b];

            u128 prev = ~u128{0};
            for (std::uint64_t b = 0; b <= s.head(); ++b) {
                auto cur = s.query_block(b, p).cumulative_value_base_units;
                inheritance = inheritance && cur <= prev;
                prev = cur;
            }
        }
        // finalization absorbing: depth >= 100 pins the score at 100
        s.advance_head(s.head() + 100);
        for (std::uint64_t b = 0; b + 100 <= s.head() && b < 50; ++b) {
            auto r = s.query_block(b, p);
            absorbing = absorbing && r.finalized && r.score == 100.0;
        }
        s.advance_head(s.head() + 1000);
        for (std::uint64_t b = 0; b + 100 <= s.head() && b < 50; ++b) {
            auto r = s.query_block(b, p);
            absorbing = absorbing && r.finalized && r.score == 100.0;
        }
    }
    report(3, "monotonicity, attestation inheritance, absorbing finalization",
           monotone && inheritance && absorbing && cases >= 1000,
           std::to_string(cases) + " random append cases");
}

// --- criterion 4: oracle equivalence --------------------------------------

void criterion4() {
    auto t0 = std::chrono::steady_clock::now();
    auto p = desk_params();
    std::mt19937_64 rng(404);
    bool ok = true;

    for (int feed_i = 0; feed_i < 100 && ok; ++feed_i) {
        ChainState s;
        std::vector<FastExitEvent> events;
        int n = 1 + static_cast<int>(rng() % 1000);
        for (int i = 0; i < n; ++i) {
            FastExitEvent e;
            e.id = "a4-" + std::to_string(feed_i) + "-" + std::to_string(i);
            e.l2_block = rng() % 300;
            e.value_base_units = u128(rng() % 1000) * u128{1000000000000000ULL};
            events.push_back(e);
            s.apply_event(e, p);
        }
        for (std::uint64_t b = 0; b <= s.head() && ok; ++b) {
            auto got = s.query_block(b, p);
            auto want = brute_force_totals(events, b);
            ok = got.cumulative_value_base_units == want.cumulative_value &&
                 got.exit_count == want.exit_count;
        }
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    report(4, "per-block totals equal brute-force recomputation", ok && ms < 10000,
           "100 feeds in " + std::to_string(ms) + " ms");
}

// --- criterion 5: slashing game -------------------------------------------

void criterion5() {
    ScoringParams sp = desk_params();
    sp.kappa_depth = 1e9; // value-driven scores, far from the 100 clamp
    AvsParams ap;
    ap.min_stake = 1000;
    ap.reward_per_task = 100;
    GenParams gp;
    gp.seed = 5;
    gp.num_blocks = 200;
    gp.exit_rate = 1.0;
    auto chain = replay_feed(generate_feed(gp), sp);

    auto total = [](const AvsWorld& w) {
        std::uint64_t sum = w.treasury() + w.reward_pool();
        for (const auto& [id, op] : w.operators()) sum += op.stake;
        return sum;
    };

    // 3 honest + 1 offset(+10), 100 rounds
    AvsWorld w;
    w.fund_reward_pool(ap.reward_per_task * 100);
    for (auto id : {"op1", "op2", "op3"})
        w.register_operator(id, 1000000000, Strategy{}, ap);
    w.register_operator("op4", 1000000000, Strategy::parse("offset:10"), ap);

    bool consensus_ok = true, deviant_slashed = true, honest_safe = true,
         conserved = true;
    std::uint64_t before = total(w);
    for (int round = 0; round < 100; ++round) {
        std::uint64_t block = chain.head() - 99 + round % 100; // depth < 100: not finalized
        double honest = chain.query_block(block, sp).score;
        auto r = w.run_round(block, chain, sp, ap, round);
        consensus_ok = consensus_ok && r.consensus_score == honest;
        deviant_slashed = deviant_slashed &&
                          r.slashed == std::vector<std::string>{"op4"};
        for (auto id : {"op1", "op2", "op3"})
            honest_safe = honest_safe &&
                          std::find(r.slashed.begin(), r.slashed.end(), id) ==
                              r.slashed.end();
        conserved = conserved && total(w) == before;
    }

    // 2 honest + 2 offset(+10): lower median keeps the honest consensus
    AvsWorld w2;
    w2.fund_reward_pool(ap.reward_per_task);
    w2.register_operator("op1", 1000000000, Strategy{}, ap);
    w2.register_operator("op2", 1000000000, Strategy{}, ap);
    w2.register_operator("op3", 1000000000, Strategy::parse("offset:10"), ap);
    w2.register_operator("op4", 1000000000, Strategy::parse("offset:10"), ap);
    double honest = chain.query_block(150, sp).score;
    auto r2 = w2.run_round(150, chain, sp, ap, 0);
    bool tie_ok = r2.consensus_score == honest &&
                  r2.slashed == std::vector<std::string>{"op3", "op4"};

    report(5, "slashing game: honest consensus, deviants slashed, value conserved",
           consensus_ok && deviant_slashed && honest_safe && conserved && tie_ok);
}

// --- criterion 6: determinism end-to-end ----------------------------------

void criterion6() {
    fs::path tmp = fs::temp_directory_path() /
                   ("reliablocks-acc6-" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    fs::path cfg = tmp / "config.ini";
    std::ofstream(cfg) << "[scoring]\nkappa_value = 1000\nkappa_depth = 20\n"
                          "finality_depth = 100\n";

    bool ok = true;
    std::string feed_a, feed_b, log_a, log_b, csv_a, csv_b;
    for (int pass = 0; pass < 2; ++pass) {
        std::string tag = pass == 0 ? "a" : "b";
        fs::path feed = tmp / ("feed-" + tag + ".jsonl");
        fs::path log = tmp / ("chain-" + tag + ".log");
        fs::path csv = tmp / ("export-" + tag + ".csv");
        ok = ok && run_cli(tmp, "gen --seed 42 --blocks 100 --exit-rate 0.5 --out " +
                                    feed.string())
                           .code == 0;
        ok = ok && run_cli(tmp, "replay --events " + feed.string() + " --log " +
                                    log.string() + " --config " + cfg.string())
                           .code == 0;
        ok = ok && run_cli(tmp, "export --log " + log.string() + " --config " +
                                    cfg.string() + " --out " + csv.string())
                           .code == 0;
        (pass == 0 ? feed_a : feed_b) = slurp(feed);
        (pass == 0 ? log_a : log_b) = slurp(log);
        (pass == 0 ? csv_a : csv_b) = slurp(csv);
    }
    bool identical = feed_a == feed_b && log_a == log_b && csv_a == csv_b &&
                     !feed_a.empty() && !log_a.empty() && !csv_a.empty();

    // replay from a mid-log snapshot equals the full replay
    ScoringParams sp = desk_params();
    AvsParams ap;
    fs::path log = tmp / "chain-a.log";
    auto full = replay(log, std::nullopt, sp, ap);
    auto records = EventLog::read_all(log);
    std::size_t k = records.size() / 2;
    ChainState mid;
    for (std::size_t i = 0; i < k; ++i) {
        if (records[i].kind == LogRecord::Kind::fast_exit)
            mid.apply_event(records[i].feed.exit(), sp);
        else
            mid.advance_head(records[i].feed.head().l2_block);
    }
    auto snap = make_snapshot(mid, AvsWorld{}, k, sp, ap);
    auto resumed = replay(log, snap, sp, ap);
    bool snapshot_ok = resumed.chain == full.chain &&
                       resumed.chain.to_json().dump() == full.chain.to_json().dump();

    fs::remove_all(tmp);
    report(6, "gen/replay/export byte-identical across runs, snapshot replay equal",
           ok && identical && snapshot_ok);
}

// --- criterion 7: interface parity ----------------------------------------

void criterion7() {
    auto t0 = std::chrono::steady_clock::now();
    fs::path tmp = fs::temp_directory_path() /
                   ("reliablocks-acc7-" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    fs::path cfg = tmp / "config.ini";
    std::ofstream(cfg) << "[scoring]\nkappa_value = 1000\nkappa_depth = 20\n"
                          "finality_depth = 100\n";
    fs::path feed = fs::path(RELIABLOCKS_TEST_DATA) / "golden_feed.jsonl";
    fs::path log = tmp / "chain.log";

    bool ok = run_cli(tmp, "replay --events " + feed.string() + " --log " + log.string() +
                               " --config " + cfg.string())
                  .code == 0;

    ScoringParams sp = desk_params();
    AvsParams ap;
    auto state = replay(log, std::nullopt, sp, ap);

    // the real binary serving the real state
    const int port = 18437;
    pid_t server = fork();
    if (server == 0) {
        std::string addr = "127.0.0.1:" + std::to_string(port);
        ::execl(RELIABLOCKS_BIN, RELIABLOCKS_BIN, "serve", "--addr", addr.c_str(),
                "--log", log.string().c_str(), "--config", cfg.string().c_str(),
                (char*)nullptr);
        std::_Exit(127);
    }
    httplib::Client client("127.0.0.1", port);
    bool up = false;
    for (int i = 0; i < 100 && !up; ++i) {
        auto res = client.Get("/v1/health");
        if (res && res->status == 200) up = true;
        else usleep(50000);
    }
    ok = ok && up;

    bool parity = true;
    for (std::uint64_t b = 0; ok && parity && b <= state.chain.head(); ++b) {
        json lib = score_payload(state.chain, b, sp);
        auto cli = run_cli(tmp, "score --block " + std::to_string(b) + " --log " +
                                    log.string() + " --config " + cfg.string());
        auto http = client.Get("/v1/score/" + std::to_string(b));
        parity = cli.code == 0 && http && http->status == 200 &&
                 json::parse(cli.out) == lib && json::parse(http->body) == lib;
    }

    if (server > 0) {
        ::kill(server, SIGTERM);
        int status = 0;
        ::waitpid(server, &status, 0);
    }
    fs::remove_all(tmp);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    report(7, "library, CLI, and HTTP scores identical for every golden-feed block",
           ok && parity && ms < 5000, std::to_string(ms) + " ms");
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
