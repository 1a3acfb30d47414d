#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "reliablocks/errors.hpp"
#include "reliablocks/value.hpp"

namespace reliablocks {

struct ScoringParams {
    double kappa_value = 1000.0;          // whole tokens per unit weight
    double kappa_depth = 60480.0;         // blocks per unit weight (finality_depth / 5)
    double rate_min = 0.01;
    double rate_max = 0.03;
    std::uint64_t finality_depth = 302400; // 7 days at 2 s blocks
    int score_decimals = 3;

    void validate() const; // throws InvalidParams
};

struct FastExitEvent {
    std::string id;
    std::uint64_t l2_block = 0;
    std::string provider;
    u128 value_base_units = 0;
    std::uint64_t l1_block = 0;
    std::uint64_t ts = 0;
};

struct BlockReliability {
    std::uint64_t l2_block = 0;
    u128 cumulative_value_base_units = 0;
    std::uint64_t exit_count = 0;
    std::uint64_t depth = 0;
    double score = 0.0;
    bool finalized = false;
};

// round half to even at `decimals` fractional digits
double round_score(double x, int decimals);

// w = V / kappa_value + depth / kappa_depth, V in whole tokens
double raw_weight(const BlockReliability& block_state, const ScoringParams& params);

// 100 * (1 - e^-w), saturating toward 100; finalized blocks pin at 100 exactly
double score_from_weight(double w, bool finalized, const ScoringParams& params);

// affine from rate_max at score 0 down to rate_min at score 100
double interest_rate(double score, const ScoringParams& params);

// Accumulator over an ordered feed of fast exits and head advances. An exit
// at block b attests every block <= b, so cumulative value at block b is the
// sum over all events with l2_block >= b. Value semantics; single writer.
class ChainState {
public:
    std::uint64_t head() const { return head_; }
    std::uint64_t event_count() const { return event_count_; }
    std::size_t tracked_blocks() const { return blocks_.size(); }

    void apply_event(const FastExitEvent& event, const ScoringParams& params);
    void advance_head(std::uint64_t new_head);
    BlockReliability query_block(std::uint64_t l2_block, const ScoringParams& params) const;

    nlohmann::json to_json() const;
    static ChainState from_json(const nlohmann::json& j);

    bool operator==(const ChainState&) const = default;

private:
    struct Accum {
        u128 cumulative_value = 0;
        std::uint64_t exit_count = 0;
        bool operator==(const Accum&) const = default;
    };

    std::uint64_t head_ = 0;
    std::uint64_t event_count_ = 0;
    std::map<std::uint64_t, Accum> blocks_; // only blocks that are some event's l2_block
    std::set<std::string> seen_ids_;
};

} // namespace reliablocks
