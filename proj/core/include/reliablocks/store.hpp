#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reliablocks/avs.hpp"
#include "reliablocks/feed.hpp"
#include "reliablocks/scoring.hpp"

namespace reliablocks {

// One log entry: a feed record or an AVS command, replayed in order.
struct LogRecord {
    enum class Kind { fast_exit, head_advance, register_operator, run_round };
    Kind kind;
    FeedRecord feed;            // fast_exit / head_advance
    std::string operator_id;    // register_operator
    std::uint64_t stake = 0;    // register_operator
    Strategy strategy;          // register_operator
    std::uint64_t l2_block = 0; // run_round
    std::uint64_t tick = 0;     // run_round

    static LogRecord from_feed(FeedRecord r);
    nlohmann::json to_json() const;
    static LogRecord from_json(const nlohmann::json& j);
};

// Append-only file: [u32 LE length][payload][u32 LE CRC32], repeated.
// Truncation at an entry boundary leaves a replayable log; anything else
// surfaces as CorruptLog or ChecksumMismatch on read.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path, bool truncate = false);

    // durable (flushed) before return; returns assigned seq
    std::uint64_t append(const LogRecord& record);

    std::uint64_t next_seq() const { return next_seq_; }
    const std::filesystem::path& path() const { return path_; }

    static std::vector<LogRecord> read_all(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::uint64_t next_seq_ = 0;
};

struct Snapshot {
    std::uint64_t as_of_seq = 0;
    nlohmann::json chain_state;
    nlohmann::json avs_state;
    std::uint64_t params_hash = 0;
};

std::uint64_t hash_params(const ScoringParams& scoring, const AvsParams& avs);

void save_snapshot(const Snapshot& snap, const std::filesystem::path& path);
Snapshot load_snapshot(const std::filesystem::path& path);

struct ReplayResult {
    ChainState chain;
    AvsWorld world;
    std::uint64_t entries_applied = 0; // total seq covered, snapshot included
};

// Fold the log through ChainState/AvsWorld, optionally starting from a
// snapshot. Deterministic: same log, same result, bit for bit.
ReplayResult replay(const std::filesystem::path& log_path,
                    const std::optional<Snapshot>& from_snapshot,
                    const ScoringParams& scoring, const AvsParams& avs);

Snapshot make_snapshot(const ChainState& chain, const AvsWorld& world,
                       std::uint64_t as_of_seq, const ScoringParams& scoring,
                       const AvsParams& avs);

} // namespace reliablocks
