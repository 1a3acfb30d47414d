// reliablocks: feed generation, deterministic replay, score queries,
// AVS round simulation, CSV export, and the HTTP read API.
//
// Exit codes: 0 success, 1 IO, 2 usage, 3 feed validation, 4 domain error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "httplib.h"

#include "reliablocks/avs.hpp"
#include "reliablocks/feed.hpp"
#include "reliablocks/scoring.hpp"
#include "reliablocks/service.hpp"
#include "reliablocks/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reliablocks;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitDomain = 4;

struct Config {
    ScoringParams scoring;
    AvsParams avs;
    GenParams gen;
    std::string log_path = "reliablocks.log";
    std::string snapshot_path; // defaults to log_path + ".snapshot"

    std::string snapshot() const {
        return snapshot_path.empty() ? log_path + ".snapshot" : snapshot_path;
    }
};

// [section] / key = value, '#' comments; unknown keys are errors
Config load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure("cannot open config: " + path);
    Config cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            if (section != "scoring" && section != "avs" && section != "gen" &&
                section != "paths")
                throw InvalidParams("config line " + std::to_string(lineno) +
                                    ": unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParams("config line " + std::to_string(lineno) +
                                ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto as_d = [&] { return std::stod(value); };
        auto as_u = [&] { return std::stoull(value); };

        bool known = true;
        if (section == "scoring") {
            if (key == "kappa_value") cfg.scoring.kappa_value = as_d();
            else if (key == "kappa_depth") cfg.scoring.kappa_depth = as_d();
            else if (key == "rate_min") cfg.scoring.rate_min = as_d();
            else if (key == "rate_max") cfg.scoring.rate_max = as_d();
            else if (key == "finality_depth") cfg.scoring.finality_depth = as_u();
            else if (key == "score_decimals") cfg.scoring.score_decimals = static_cast<int>(as_u());
            else known = false;
        } else if (section == "avs") {
            if (key == "min_stake") cfg.avs.min_stake = as_u();
            else if (key == "slash_fraction") cfg.avs.slash_fraction = as_d();
            else if (key == "deviation_tolerance") cfg.avs.deviation_tolerance = as_d();
            else if (key == "quorum_fraction") cfg.avs.quorum_fraction = as_d();
            else if (key == "reward_per_task") cfg.avs.reward_per_task = as_u();
            else if (key == "task_deadline") cfg.avs.task_deadline = as_u();
            else known = false;
        } else if (section == "gen") {
            if (key == "seed") cfg.gen.seed = as_u();
            else if (key == "num_blocks") cfg.gen.num_blocks = as_u();
            else if (key == "exit_rate") cfg.gen.exit_rate = as_d();
            else if (key == "value_log_mean") cfg.gen.value_log_mean = as_d();
            else if (key == "value_log_sigma") cfg.gen.value_log_sigma = as_d();
            else if (key == "num_providers") cfg.gen.num_providers = as_u();
            else if (key == "block_time_seconds") cfg.gen.block_time_seconds = as_u();
            else known = false;
        } else if (section == "paths") {
            if (key == "log") cfg.log_path = value;
            else if (key == "snapshot") cfg.snapshot_path = value;
            else known = false;
        } else {
            known = false;
        }
        if (!known)
            throw InvalidParams("config line " + std::to_string(lineno) +
                                ": unknown key " + section + "." + key);
    }
    return cfg;
}

Config load_config(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty())
        if (const char* env = std::getenv("RELIABLOCKS_CONFIG")) path = env;
    if (path.empty()) return {};
    return load_config_file(path);
}

std::vector<FeedRecord> read_feed_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure("cannot open feed: " + path);
    std::vector<FeedRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(parse_feed_line(line));
        } catch (const ParseError& e) {
            throw ParseError(lineno, e.reason);
        }
    }
    return records;
}

// snapshot when present and parameter-compatible, full replay otherwise
ReplayResult load_state(const Config& cfg) {
    std::optional<Snapshot> snap;
    if (fs::exists(cfg.snapshot())) {
        Snapshot s = load_snapshot(cfg.snapshot());
        if (s.params_hash == hash_params(cfg.scoring, cfg.avs)) snap = std::move(s);
    }
    return replay(cfg.log_path, snap, cfg.scoring, cfg.avs);
}

int cmd_gen(std::uint64_t seed, std::uint64_t blocks, double exit_rate,
            const std::string& out) {
    GenParams params;
    params.seed = seed;
    params.num_blocks = blocks;
    params.exit_rate = exit_rate;
    auto records = generate_feed(params);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) {
        std::cerr << "cannot open " << out << " for writing\n";
        return kExitIo;
    }
    for (const auto& r : records) f << serialize_feed_record(r) << '\n';
    f.flush();
    if (!f) {
        std::cerr << "write failed: " << out << '\n';
        return kExitIo;
    }
    std::cout << json{{"records", records.size()}}.dump() << '\n';
    return kExitOk;
}

int cmd_replay(const std::string& events, const Config& cfg) {
    auto records = read_feed_file(events);
    auto report = validate_feed(records);
    if (!report.ok()) {
        const auto& first = report.issues.front();
        std::cerr << "feed validation failed at line " << (first.index + 1) << ": "
                  << first.code << " (" << first.detail << ")";
        if (report.issues.size() > 1)
            std::cerr << " and " << (report.issues.size() - 1) << " more";
        std::cerr << '\n';
        return kExitValidation;
    }

    EventLog log(cfg.log_path, /*truncate=*/true);
    ChainState chain;
    for (const auto& r : records) {
        LogRecord rec = LogRecord::from_feed(r);
        log.append(rec);
        if (r.is_exit())
            chain.apply_event(r.exit(), cfg.scoring);
        else
            chain.advance_head(r.head().l2_block);
    }
    AvsWorld world;
    save_snapshot(make_snapshot(chain, world, log.next_seq(), cfg.scoring, cfg.avs),
                  cfg.snapshot());

    std::cout << json{{"head", chain.head()},
                      {"events", chain.event_count()},
                      {"blocks_tracked", chain.tracked_blocks()}}
                     .dump()
              << '\n';
    return kExitOk;
}

int cmd_score(std::uint64_t block, const Config& cfg) {
    auto state = load_state(cfg);
    try {
        std::cout << score_payload(state.chain, block, cfg.scoring).dump() << '\n';
    } catch (const BlockBeyondHead& e) {
        std::cerr << e.what() << '\n';
        return kExitDomain;
    }
    return kExitOk;
}

int cmd_simulate(std::uint64_t operators, std::uint64_t byzantine,
                 const std::string& strategy_text, std::uint64_t tasks,
                 const std::string& out, const Config& cfg) {
    if (byzantine > operators) {
        std::cerr << "--byzantine cannot exceed --operators\n";
        return kExitUsage;
    }
    Strategy byz = Strategy::parse(strategy_text);
    auto state = load_state(cfg);

    AvsWorld world;
    world.fund_reward_pool(cfg.avs.reward_per_task * tasks);
    for (std::uint64_t i = 0; i < operators; ++i) {
        std::ostringstream id;
        id << "op-";
        id.width(2);
        id.fill('0');
        id << (i + 1);
        Strategy strat = i < operators - byzantine ? Strategy{} : byz;
        if (strat.kind == StrategyKind::random && strat.seed == 0) strat.seed = i + 1;
        world.register_operator(id.str(), cfg.avs.min_stake * 10, strat, cfg.avs);
    }

    std::ofstream file;
    std::ostream* sink = &std::cout;
    if (!out.empty()) {
        file.open(out, std::ios::binary | std::ios::trunc);
        if (!file) {
            std::cerr << "cannot open " << out << " for writing\n";
            return kExitIo;
        }
        sink = &file;
    }

    std::uint64_t head = state.chain.head();
    std::uint64_t total_slashed = 0, total_rewards = 0;
    for (std::uint64_t i = 0; i < tasks; ++i) {
        std::uint64_t block =
            tasks <= 1 ? head : head * i / (tasks - 1); // evenly spaced over 0..head
        try {
            AggregationResult r =
                world.run_round(block, state.chain, cfg.scoring, cfg.avs, i);
            total_slashed += r.treasury_delta;
            for (const auto& [id, d] : r.stake_deltas)
                if (d > 0) total_rewards += static_cast<std::uint64_t>(d);
            *sink << r.to_json().dump() << '\n';
        } catch (const NoSubmissions&) {
            std::cerr << "round " << i << ": no submissions, task expired\n";
        }
    }

    std::cerr << "simulated " << tasks << " rounds: slashed " << total_slashed
              << ", rewards " << total_rewards << '\n';
    for (const auto& [id, op] : world.operators())
        std::cerr << "  " << id << " stake=" << op.stake
                  << " slashed=" << op.slashed_total
                  << " rewards=" << op.rewards_total
                  << (op.active ? "" : " (inactive)") << '\n';
    return kExitOk;
}

int cmd_export(const std::string& out, const std::string& format, const Config& cfg) {
    if (format != "csv") {
        std::cerr << "unsupported format: " << format << '\n';
        return kExitUsage;
    }
    auto state = load_state(cfg);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) {
        std::cerr << "cannot open " << out << " for writing\n";
        return kExitIo;
    }
    f << "l2_block,score,interest_rate,cumulative_value_base_units,exit_count,depth,finalized\n";
    for (std::uint64_t b = 0; b <= state.chain.head(); ++b) {
        BlockReliability r = state.chain.query_block(b, cfg.scoring);
        f << r.l2_block << ',' << json(r.score).dump() << ','
          << json(interest_rate(r.score, cfg.scoring)).dump() << ','
          << u128_to_dec(r.cumulative_value_base_units) << ',' << r.exit_count << ','
          << r.depth << ',' << (r.finalized ? "true" : "false") << '\n';
    }
    f.flush();
    if (!f) {
        std::cerr << "write failed: " << out << '\n';
        return kExitIo;
    }
    return kExitOk;
}

int cmd_serve(const std::string& addr, const Config& cfg) {
    auto state = load_state(cfg);
    auto chain = std::make_shared<const ChainState>(std::move(state.chain));
    auto world = std::make_shared<AvsWorld>(std::move(state.world));
    Service service(chain, cfg.scoring, world, cfg.avs, state.entries_applied);

    httplib::Server server;
    service.attach(server);

    auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        std::cerr << "--addr must be host:port\n";
        return kExitUsage;
    }
    std::string host = addr.substr(0, colon);
    int port = std::stoi(addr.substr(colon + 1));

    std::cout << json{{"listening", addr}}.dump() << '\n' << std::flush;
    if (!server.listen(host, port)) {
        std::cerr << "failed to bind " << addr << '\n';
        return kExitIo;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reliability scores for optimistic-rollup blocks"};
    app.require_subcommand(1);
    app.fallthrough(); // --config and --log may appear after the subcommand

    std::string config_path;
    std::string log_flag;
    app.add_option("--config", config_path, "config file (or RELIABLOCKS_CONFIG)");

    auto add_log = [&](CLI::App* sub) {
        sub->add_option("--log", log_flag, "event log path");
    };

    // gen
    std::uint64_t seed = 42, blocks = 100;
    double exit_rate = 0.5;
    std::string out_path;
    auto* gen = app.add_subcommand("gen", "generate a synthetic feed");
    gen->add_option("--seed", seed, "PRNG seed");
    gen->add_option("--blocks", blocks, "number of L2 blocks");
    gen->add_option("--exit-rate", exit_rate, "mean fast exits per block");
    gen->add_option("--out", out_path, "output feed path")->required();

    // replay
    std::string events_path;
    auto* replay_cmd = app.add_subcommand("replay", "replay a feed into the log");
    replay_cmd->add_option("--events", events_path, "feed file (JSONL)")->required();
    add_log(replay_cmd);

    // score
    std::uint64_t block = 0;
    auto* score = app.add_subcommand("score", "query one block's score");
    score->add_option("--block", block, "L2 block number")->required();
    add_log(score);

    // simulate
    std::uint64_t n_operators = 4, n_byzantine = 0, n_tasks = 10;
    std::string strategy = "offset:10";
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "run AVS scoring rounds");
    simulate->add_option("--operators", n_operators, "total operators");
    simulate->add_option("--byzantine", n_byzantine, "operators using --strategy");
    simulate->add_option("--strategy", strategy, "byzantine strategy (offset:D|random|silent)");
    simulate->add_option("--tasks", n_tasks, "rounds to run");
    simulate->add_option("--out", sim_out, "round results JSONL (default stdout)");
    add_log(simulate);

    // export
    std::string export_out, format = "csv";
    auto* export_cmd = app.add_subcommand("export", "export per-block CSV");
    export_cmd->add_option("--out", export_out, "output path")->required();
    export_cmd->add_option("--format", format, "output format (csv)");
    add_log(export_cmd);

    // serve
    std::string addr = "127.0.0.1:8080";
    auto* serve = app.add_subcommand("serve", "serve the JSON API");
    serve->add_option("--addr", addr, "bind address host:port");
    add_log(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        Config cfg = load_config(config_path);
        if (!log_flag.empty()) cfg.log_path = log_flag;
        cfg.scoring.validate();
        cfg.avs.validate();

        if (gen->parsed()) return cmd_gen(seed, blocks, exit_rate, out_path);
        if (replay_cmd->parsed()) return cmd_replay(events_path, cfg);
        if (score->parsed()) return cmd_score(block, cfg);
        if (simulate->parsed())
            return cmd_simulate(n_operators, n_byzantine, strategy, n_tasks, sim_out, cfg);
        if (export_cmd->parsed()) return cmd_export(export_out, format, cfg);
        if (serve->parsed()) return cmd_serve(addr, cfg);
    } catch (const ParseError& e) {
        std::cerr << "feed parse error at line " << e.position << ": " << e.reason << '\n';
        return kExitValidation;
    } catch (const InvalidParams& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const IoFailure& e) {
        std::cerr << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}
