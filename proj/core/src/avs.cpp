#include "reliablocks/avs.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "reliablocks/rng.hpp"

namespace reliablocks {

Strategy Strategy::parse(const std::string& text) {
    Strategy s;
    if (text == "honest") { s.kind = StrategyKind::honest; return s; }
    if (text == "silent") { s.kind = StrategyKind::silent; return s; }
    if (text.rfind("offset:", 0) == 0) {
        s.kind = StrategyKind::offset;
        s.delta = std::stod(text.substr(7));
        return s;
    }
    if (text == "random" || text.rfind("random:", 0) == 0) {
        s.kind = StrategyKind::random;
        s.seed = text.size() > 7 ? std::stoull(text.substr(7)) : 0;
        return s;
    }
    throw InvalidParams("unknown strategy: " + text);
}

std::string Strategy::to_string() const {
    switch (kind) {
        case StrategyKind::honest: return "honest";
        case StrategyKind::silent: return "silent";
        case StrategyKind::offset: {
            nlohmann::json d = delta; // shortest round-trip decimal
            return "offset:" + d.dump();
        }
        case StrategyKind::random: return "random:" + std::to_string(seed);
    }
    return "honest";
}

void AvsParams::validate() const {
    if (min_stake < 1) throw InvalidParams("min_stake must be positive");
    if (!(slash_fraction > 0.0 && slash_fraction <= 1.0))
        throw InvalidParams("slash_fraction must be in (0,1]");
    if (!(deviation_tolerance > 0.0)) throw InvalidParams("deviation_tolerance must be > 0");
    if (!(quorum_fraction > 0.0 && quorum_fraction <= 1.0))
        throw InvalidParams("quorum_fraction must be in (0,1]");
    if (reward_per_task < 1) throw InvalidParams("reward_per_task must be positive");
    if (task_deadline < 1) throw InvalidParams("task_deadline must be positive");
}

nlohmann::json AggregationResult::to_json() const {
    nlohmann::json deltas = nlohmann::json::object();
    for (const auto& [id, d] : stake_deltas) deltas[id] = d;
    return {
        {"task_id", task_id},
        {"l2_block", l2_block},
        {"consensus_score", consensus_score},
        {"accepted", accepted},
        {"slashed", slashed},
        {"non_responders", non_responders},
        {"stake_deltas", std::move(deltas)},
        {"treasury_delta", treasury_delta},
    };
}

void AvsWorld::register_operator(const std::string& id, std::uint64_t stake,
                                 Strategy strategy, const AvsParams& params) {
    params.validate();
    if (operators_.count(id)) throw DuplicateOperator("operator exists: " + id);
    if (stake < params.min_stake)
        throw InsufficientStake(id + ": stake " + std::to_string(stake) +
                                " < min_stake " + std::to_string(params.min_stake));
    Operator op;
    op.id = id;
    op.stake = stake;
    op.strategy = strategy;
    if (strategy.kind == StrategyKind::random)
        op.rng_state = Xoshiro256StarStar(strategy.seed).state();
    operators_.emplace(id, std::move(op));
}

Task& AvsWorld::create_task(std::uint64_t l2_block, std::uint64_t chain_head,
                            std::uint64_t now_tick) {
    if (l2_block > chain_head)
        throw BlockBeyondHead("task block " + std::to_string(l2_block) +
                              " beyond head " + std::to_string(chain_head));
    Task t;
    t.task_id = "task-" + std::to_string(task_counter_++);
    t.l2_block = l2_block;
    t.created_at = now_tick;
    tasks_.push_back(std::move(t));
    return tasks_.back();
}

Task& AvsWorld::task_ref(const std::string& task_id) {
    for (auto& t : tasks_)
        if (t.task_id == task_id) return t;
    throw UnknownTask("no such task: " + task_id);
}

const Task* AvsWorld::find_task(const std::string& task_id) const {
    for (const auto& t : tasks_)
        if (t.task_id == task_id) return &t;
    return nullptr;
}

void AvsWorld::submit(const std::string& task_id, const std::string& operator_id,
                      double score, std::uint64_t at) {
    Task& t = task_ref(task_id);
    if (t.status != TaskStatus::open) throw TaskNotOpen(task_id);
    if (!(score >= 0.0 && score <= 100.0)) throw ScoreOutOfRange(operator_id);
    for (const auto& s : t.submissions)
        if (s.operator_id == operator_id)
            throw DuplicateSubmission(operator_id + " on " + task_id);
    t.submissions.push_back({operator_id, task_id, score, at});
}

std::optional<double> AvsWorld::operator_compute(const std::string& operator_id,
                                                 std::uint64_t l2_block,
                                                 const ChainState& chain,
                                                 const ScoringParams& scoring) {
    auto it = operators_.find(operator_id);
    if (it == operators_.end()) throw UnknownOperator(operator_id);
    Operator& op = it->second;

    switch (op.strategy.kind) {
        case StrategyKind::silent:
            return std::nullopt;
        case StrategyKind::honest:
            return chain.query_block(l2_block, scoring).score;
        case StrategyKind::offset: {
            double s = chain.query_block(l2_block, scoring).score + op.strategy.delta;
            return round_score(std::clamp(s, 0.0, 100.0), scoring.score_decimals);
        }
        case StrategyKind::random: {
            Xoshiro256StarStar rng(op.rng_state);
            double s = round_score(rng.uniform01() * 100.0, scoring.score_decimals);
            op.rng_state = rng.state();
            return s;
        }
    }
    return std::nullopt;
}

AggregationResult AvsWorld::aggregate(const std::string& task_id,
                                      const AvsParams& params,
                                      std::uint64_t now_tick) {
    params.validate();
    Task& t = task_ref(task_id);
    if (t.status != TaskStatus::open) throw TaskNotOpen(task_id);

    std::uint64_t active = 0;
    for (const auto& [id, op] : operators_)
        if (op.active) ++active;
    std::uint64_t quorum = static_cast<std::uint64_t>(
        std::ceil(params.quorum_fraction * static_cast<double>(active)));
    bool deadline_passed = now_tick >= t.created_at + params.task_deadline;

    if (t.submissions.empty()) {
        if (!deadline_passed) throw QuorumNotReached(task_id);
        t.status = TaskStatus::expired;
        throw NoSubmissions(task_id);
    }
    if (t.submissions.size() < quorum && !deadline_passed)
        throw QuorumNotReached(task_id);

    // consensus: lower median, deterministic on even counts
    std::vector<double> scores;
    scores.reserve(t.submissions.size());
    for (const auto& s : t.submissions) scores.push_back(s.score);
    std::sort(scores.begin(), scores.end());
    double consensus = scores[(scores.size() - 1) / 2];

    AggregationResult res;
    res.task_id = t.task_id;
    res.l2_block = t.l2_block;
    res.consensus_score = consensus;

    // order-independent: walk submitters in operator-id order
    std::vector<const Submission*> subs;
    for (const auto& s : t.submissions) subs.push_back(&s);
    std::sort(subs.begin(), subs.end(), [](const Submission* a, const Submission* b) {
        return a->operator_id < b->operator_id;
    });

    for (const Submission* s : subs) {
        Operator& op = operators_.at(s->operator_id);
        if (std::abs(s->score - consensus) > params.deviation_tolerance) {
            auto amount = static_cast<std::uint64_t>(
                std::floor(params.slash_fraction * static_cast<double>(op.stake)));
            op.stake -= amount;
            op.slashed_total += amount;
            treasury_ += amount;
            res.treasury_delta += amount;
            res.slashed.push_back(op.id);
            res.stake_deltas[op.id] = -static_cast<std::int64_t>(amount);
            if (op.stake < params.min_stake) op.active = false;
        } else {
            res.accepted.push_back(op.id);
        }
    }

    std::uint64_t reward_each =
        res.accepted.empty() ? 0 : params.reward_per_task / res.accepted.size();
    if (reward_each * res.accepted.size() > reward_pool_)
        reward_each = res.accepted.empty() ? 0 : reward_pool_ / res.accepted.size();
    for (const auto& id : res.accepted) {
        Operator& op = operators_.at(id);
        op.stake += reward_each;
        op.rewards_total += reward_each;
        reward_pool_ -= reward_each;
        res.stake_deltas[id] = static_cast<std::int64_t>(reward_each);
    }

    for (const auto& [id, op] : operators_) {
        if (!op.active) continue;
        bool submitted = std::any_of(
            t.submissions.begin(), t.submissions.end(),
            [&](const Submission& s) { return s.operator_id == id; });
        if (!submitted) res.non_responders.push_back(id);
    }

    t.status = TaskStatus::resolved;
    t.result = res;
    return res;
}

AggregationResult AvsWorld::run_round(std::uint64_t l2_block, const ChainState& chain,
                                      const ScoringParams& scoring,
                                      const AvsParams& params,
                                      std::uint64_t now_tick) {
    Task& t = create_task(l2_block, chain.head(), now_tick);
    std::string task_id = t.task_id;
    for (auto& [id, op] : operators_) {
        if (!op.active) continue;
        auto score = operator_compute(id, l2_block, chain, scoring);
        if (score) submit(task_id, id, *score, now_tick);
    }
    return aggregate(task_id, params, now_tick + params.task_deadline);
}

namespace {

nlohmann::json operator_to_json(const Operator& op) {
    return {
        {"id", op.id},
        {"stake", op.stake},
        {"slashed_total", op.slashed_total},
        {"rewards_total", op.rewards_total},
        {"active", op.active},
        {"strategy", op.strategy.to_string()},
        {"rng_state", op.rng_state},
    };
}

Operator operator_from_json(const nlohmann::json& j) {
    Operator op;
    op.id = j.at("id").get<std::string>();
    op.stake = j.at("stake").get<std::uint64_t>();
    op.slashed_total = j.at("slashed_total").get<std::uint64_t>();
    op.rewards_total = j.at("rewards_total").get<std::uint64_t>();
    op.active = j.at("active").get<bool>();
    op.strategy = Strategy::parse(j.at("strategy").get<std::string>());
    op.rng_state = j.at("rng_state").get<std::array<std::uint64_t, 4>>();
    return op;
}

} // namespace

nlohmann::json AvsWorld::to_json() const {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& [id, op] : operators_) ops.push_back(operator_to_json(op));
    return {
        {"operators", std::move(ops)},
        {"task_counter", task_counter_},
        {"treasury", treasury_},
        {"reward_pool", reward_pool_},
    };
}

AvsWorld AvsWorld::from_json(const nlohmann::json& j) {
    AvsWorld w;
    for (const auto& oj : j.at("operators")) {
        Operator op = operator_from_json(oj);
        w.operators_.emplace(op.id, std::move(op));
    }
    w.task_counter_ = j.at("task_counter").get<std::uint64_t>();
    w.treasury_ = j.at("treasury").get<std::uint64_t>();
    w.reward_pool_ = j.at("reward_pool").get<std::uint64_t>();
    return w;
}

} // namespace reliablocks
