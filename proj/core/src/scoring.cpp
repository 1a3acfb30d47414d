#include "reliablocks/scoring.hpp"

#include <cfenv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace reliablocks {

void ScoringParams::validate() const {
    if (!(kappa_value > 0.0)) throw InvalidParams("kappa_value must be > 0");
    if (!(kappa_depth > 0.0)) throw InvalidParams("kappa_depth must be > 0");
    if (!(rate_min > 0.0 && rate_min < 1.0)) throw InvalidParams("rate_min must be in (0,1)");
    if (!(rate_max > 0.0 && rate_max < 1.0)) throw InvalidParams("rate_max must be in (0,1)");
    if (!(rate_min < rate_max)) throw InvalidParams("rate_min must be < rate_max");
    if (finality_depth < 1) throw InvalidParams("finality_depth must be >= 1");
    if (score_decimals < 0 || score_decimals > 9) throw InvalidParams("score_decimals out of range");
}

double round_score(double x, int decimals) {
    double scale = std::pow(10.0, decimals);
    // nearbyint under the default FE_TONEAREST mode is round-half-to-even
    return std::nearbyint(x * scale) / scale;
}

double raw_weight(const BlockReliability& block_state, const ScoringParams& params) {
    double tokens = base_units_to_tokens(block_state.cumulative_value_base_units);
    return tokens / params.kappa_value
         + static_cast<double>(block_state.depth) / params.kappa_depth;
}

double score_from_weight(double w, bool finalized, const ScoringParams& params) {
    if (finalized) return 100.0;
    return round_score(100.0 * (1.0 - std::exp(-w)), params.score_decimals);
}

double interest_rate(double score, const ScoringParams& params) {
    if (!(score >= 0.0 && score <= 100.0))
        throw ScoreOutOfRange("score must be in [0,100]");
    // endpoints are exact by contract, not by floating-point luck
    if (score == 0.0) return params.rate_max;
    if (score == 100.0) return params.rate_min;
    return params.rate_max - (params.rate_max - params.rate_min) * (score / 100.0);
}

void ChainState::apply_event(const FastExitEvent& event, const ScoringParams& params) {
    params.validate();
    if (event.id.empty()) throw MalformedEvent("event id is empty");
    if (seen_ids_.count(event.id))
        throw DuplicateEventId("event id already applied: " + event.id);

    // New tracked block inherits the cumulative totals of the nearest
    // tracked block above it: events strictly above attest it too.
    auto [it, inserted] = blocks_.try_emplace(event.l2_block);
    if (inserted) {
        auto above = std::next(it);
        if (above != blocks_.end()) it->second = above->second;
    }
    for (auto b = blocks_.begin(); b != std::next(it); ++b) {
        b->second.cumulative_value += event.value_base_units;
        b->second.exit_count += 1;
    }

    if (event.l2_block > head_) head_ = event.l2_block;
    seen_ids_.insert(event.id);
    ++event_count_;
}

void ChainState::advance_head(std::uint64_t new_head) {
    if (new_head < head_)
        throw HeadRegression("head regression: " + std::to_string(new_head) +
                             " < " + std::to_string(head_));
    head_ = new_head;
}

BlockReliability ChainState::query_block(std::uint64_t l2_block,
                                         const ScoringParams& params) const {
    if (l2_block > head_)
        throw BlockBeyondHead("block " + std::to_string(l2_block) +
                              " beyond head " + std::to_string(head_));
    BlockReliability r;
    r.l2_block = l2_block;
    // cumulative at b equals cumulative at the nearest tracked block >= b
    auto it = blocks_.lower_bound(l2_block);
    if (it != blocks_.end()) {
        r.cumulative_value_base_units = it->second.cumulative_value;
        r.exit_count = it->second.exit_count;
    }
    r.depth = head_ - l2_block;
    r.finalized = r.depth >= params.finality_depth;
    r.score = score_from_weight(raw_weight(r, params), r.finalized, params);
    return r;
}

nlohmann::json ChainState::to_json() const {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& [b, acc] : blocks_)
        blocks.push_back({b, u128_to_dec(acc.cumulative_value), acc.exit_count});
    return {
        {"head", head_},
        {"event_count", event_count_},
        {"blocks", std::move(blocks)},
        {"seen_ids", seen_ids_},
    };
}

ChainState ChainState::from_json(const nlohmann::json& j) {
    ChainState s;
    s.head_ = j.at("head").get<std::uint64_t>();
    s.event_count_ = j.at("event_count").get<std::uint64_t>();
    for (const auto& row : j.at("blocks")) {
        Accum acc;
        acc.cumulative_value = u128_from_dec(row.at(1).get<std::string>());
        acc.exit_count = row.at(2).get<std::uint64_t>();
        s.blocks_.emplace(row.at(0).get<std::uint64_t>(), acc);
    }
    for (const auto& id : j.at("seen_ids")) s.seen_ids_.insert(id.get<std::string>());
    return s;
}

} // namespace reliablocks
