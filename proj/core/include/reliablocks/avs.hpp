#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "reliablocks/scoring.hpp"

namespace reliablocks {

enum class StrategyKind { honest, offset, random, silent };

struct Strategy {
    StrategyKind kind = StrategyKind::honest;
    double delta = 0.0;     // offset
    std::uint64_t seed = 0; // random

    static Strategy parse(const std::string& text); // "honest"|"offset:D"|"random[:S]"|"silent"
    std::string to_string() const;
    bool operator==(const Strategy&) const = default;
};

struct Operator {
    std::string id;
    std::uint64_t stake = 0;
    std::uint64_t slashed_total = 0;
    std::uint64_t rewards_total = 0;
    bool active = true;
    Strategy strategy;
    std::array<std::uint64_t, 4> rng_state{}; // random strategy only
    bool operator==(const Operator&) const = default;
};

struct Submission {
    std::string operator_id;
    std::string task_id;
    double score = 0.0;
    std::uint64_t submitted_at = 0;
};

struct AggregationResult {
    std::string task_id;
    std::uint64_t l2_block = 0;
    double consensus_score = 0.0;
    std::vector<std::string> accepted;
    std::vector<std::string> slashed;
    std::vector<std::string> non_responders;
    std::map<std::string, std::int64_t> stake_deltas;
    std::uint64_t treasury_delta = 0;

    nlohmann::json to_json() const;
};

enum class TaskStatus { open, resolved, expired };

struct Task {
    std::string task_id;
    std::uint64_t l2_block = 0;
    TaskStatus status = TaskStatus::open;
    std::uint64_t created_at = 0; // simulation tick
    std::vector<Submission> submissions;
    std::optional<AggregationResult> result;
};

struct AvsParams {
    std::uint64_t min_stake = 1000;
    double slash_fraction = 0.10;
    double deviation_tolerance = 0.5; // score points
    double quorum_fraction = 2.0 / 3.0;
    std::uint64_t reward_per_task = 100;
    std::uint64_t task_deadline = 10; // ticks

    void validate() const;
};

// Operator registry + task queue + treasury + reward pool. Single writer;
// compute steps are pure and run in deterministic operator-id order.
class AvsWorld {
public:
    void register_operator(const std::string& id, std::uint64_t stake,
                           Strategy strategy, const AvsParams& params);

    Task& create_task(std::uint64_t l2_block, std::uint64_t chain_head,
                      std::uint64_t now_tick);

    void submit(const std::string& task_id, const std::string& operator_id,
                double score, std::uint64_t at);

    // Strategy behavior; honest is exactly the chain's own score.
    // Returns nullopt for silent operators.
    std::optional<double> operator_compute(const std::string& operator_id,
                                           std::uint64_t l2_block,
                                           const ChainState& chain,
                                           const ScoringParams& scoring);

    AggregationResult aggregate(const std::string& task_id, const AvsParams& params,
                                std::uint64_t now_tick);

    // create -> every active operator computes and submits -> aggregate
    AggregationResult run_round(std::uint64_t l2_block, const ChainState& chain,
                                const ScoringParams& scoring, const AvsParams& params,
                                std::uint64_t now_tick);

    void fund_reward_pool(std::uint64_t amount) { reward_pool_ += amount; }

    const std::map<std::string, Operator>& operators() const { return operators_; }
    const Task* find_task(const std::string& task_id) const;
    const std::vector<Task>& tasks() const { return tasks_; }
    std::uint64_t treasury() const { return treasury_; }
    std::uint64_t reward_pool() const { return reward_pool_; }

    nlohmann::json to_json() const;
    static AvsWorld from_json(const nlohmann::json& j);

private:
    Task& task_ref(const std::string& task_id);

    std::map<std::string, Operator> operators_;
    std::vector<Task> tasks_;
    std::uint64_t task_counter_ = 0;
    std::uint64_t treasury_ = 0;
    std::uint64_t reward_pool_ = 0;
};

} // namespace reliablocks
