#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "reliablocks/scoring.hpp"

namespace reliablocks {

struct HeadAdvance {
    std::uint64_t l2_block = 0;
    std::uint64_t ts = 0;
    bool operator==(const HeadAdvance&) const = default;
};

// One JSONL feed line: either a fast exit or an explicit head advance.
struct FeedRecord {
    std::variant<FastExitEvent, HeadAdvance> payload;

    bool is_exit() const { return std::holds_alternative<FastExitEvent>(payload); }
    const FastExitEvent& exit() const { return std::get<FastExitEvent>(payload); }
    const HeadAdvance& head() const { return std::get<HeadAdvance>(payload); }
};

struct GenParams {
    std::uint64_t seed = 42;
    std::uint64_t num_blocks = 100;
    double exit_rate = 0.5;        // mean exits per block, Poisson
    double value_log_mean = 0.0;   // log-normal, whole tokens
    double value_log_sigma = 2.0;
    std::uint64_t num_providers = 4;
    std::uint64_t block_time_seconds = 2;

    void validate() const;
};

struct ValidationIssue {
    std::size_t index; // 0-based record position
    std::string code;  // DuplicateEventId | HeadRegression | ExitBeyondHead
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

FeedRecord parse_feed_line(const std::string& line); // throws ParseError
std::string serialize_feed_record(const FeedRecord& record);

// Deterministic synthetic feed: per block, one head advance then
// Poisson(exit_rate) exits with log-normal values. splitmix64-seeded
// xoshiro256**; same params give byte-identical feeds.
std::vector<FeedRecord> generate_feed(const GenParams& params);

// A feed with an empty report replays through ChainState without errors.
ValidationReport validate_feed(const std::vector<FeedRecord>& records);

} // namespace reliablocks
