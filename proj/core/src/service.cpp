#include "reliablocks/service.hpp"

#include <charconv>

#include <nlohmann/json.hpp>

#include "httplib.h"

namespace reliablocks {

nlohmann::json score_payload(const ChainState& chain, std::uint64_t l2_block,
                             const ScoringParams& params) {
    BlockReliability r = chain.query_block(l2_block, params);
    return {
        {"l2_block", r.l2_block},
        {"score", r.score},
        {"interest_rate", interest_rate(r.score, params)},
        {"cumulative_value_base_units", u128_to_dec(r.cumulative_value_base_units)},
        {"exit_count", r.exit_count},
        {"depth", r.depth},
        {"finalized", r.finalized},
    };
}

nlohmann::json task_payload(const Task& task) {
    const char* status = task.status == TaskStatus::open       ? "open"
                         : task.status == TaskStatus::resolved ? "resolved"
                                                               : "expired";
    nlohmann::json j = {
        {"task_id", task.task_id},
        {"l2_block", task.l2_block},
        {"status", status},
        {"submission_count", task.submissions.size()},
    };
    if (task.result) j["result"] = task.result->to_json();
    return j;
}

nlohmann::json operator_payload(const Operator& op) {
    return {
        {"id", op.id},
        {"stake", op.stake},
        {"active", op.active},
        {"slashed_total", op.slashed_total},
        {"rewards_total", op.rewards_total},
    };
}

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& message) {
    reply_json(res, status, {{"code", code}, {"message", message}});
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

} // namespace

Service::Service(std::shared_ptr<const ChainState> chain, ScoringParams scoring,
                 std::shared_ptr<AvsWorld> world, AvsParams avs,
                 std::uint64_t log_entries)
    : chain_(std::move(chain)),
      scoring_(scoring),
      world_(std::move(world)),
      avs_(avs),
      log_entries_(log_entries) {}

std::shared_ptr<const ChainState> Service::chain_snapshot() const {
    std::lock_guard lock(mutex_);
    return chain_;
}

void Service::update_chain(std::shared_ptr<const ChainState> chain,
                           std::uint64_t log_entries) {
    std::lock_guard lock(mutex_);
    chain_ = std::move(chain);
    log_entries_ = log_entries;
}

void Service::attach(httplib::Server& server) {
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
        auto chain = chain_snapshot();
        reply_json(res, 200,
                   {{"status", "ok"}, {"head", chain->head()}, {"events", log_entries_}});
    });

    server.Get("/v1/score/:block",
               [this](const httplib::Request& req, httplib::Response& res) {
        std::uint64_t block;
        if (!parse_u64(req.path_params.at("block"), block))
            return reply_error(res, 400, "bad_request", "block must be a non-negative integer");
        auto chain = chain_snapshot();
        try {
            reply_json(res, 200, score_payload(*chain, block, scoring_));
        } catch (const BlockBeyondHead& e) {
            reply_error(res, 422, "beyond_head", e.what());
        }
    });

    server.Get("/v1/scores", [this](const httplib::Request& req, httplib::Response& res) {
        std::uint64_t from, to;
        if (!req.has_param("from") || !req.has_param("to") ||
            !parse_u64(req.get_param_value("from"), from) ||
            !parse_u64(req.get_param_value("to"), to))
            return reply_error(res, 400, "bad_request", "from and to are required integers");
        if (from > to)
            return reply_error(res, 400, "bad_request", "from > to");
        if (to - from + 1 > 10000)
            return reply_error(res, 400, "bad_request", "range exceeds 10000 blocks");
        auto chain = chain_snapshot();
        try {
            nlohmann::json arr = nlohmann::json::array();
            for (std::uint64_t b = from; b <= to; ++b)
                arr.push_back(score_payload(*chain, b, scoring_));
            reply_json(res, 200, arr);
        } catch (const BlockBeyondHead& e) {
            reply_error(res, 422, "beyond_head", e.what());
        }
    });

    server.Post("/v1/tasks", [this](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error&) {
            return reply_error(res, 400, "bad_request", "body is not valid JSON");
        }
        if (!body.is_object() || !body.contains("l2_block") ||
            !body["l2_block"].is_number_unsigned())
            return reply_error(res, 400, "bad_request", "l2_block (uint) is required");
        std::uint64_t block = body["l2_block"].get<std::uint64_t>();
        std::lock_guard lock(mutex_);
        try {
            Task& t = world_->create_task(block, chain_->head(), 0);
            reply_json(res, 201, task_payload(t));
        } catch (const BlockBeyondHead& e) {
            reply_error(res, 422, "beyond_head", e.what());
        }
    });

    server.Get("/v1/tasks/:id", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const Task* t = world_->find_task(req.path_params.at("id"));
        if (!t) return reply_error(res, 404, "not_found", "unknown task");
        reply_json(res, 200, task_payload(*t));
    });

    server.Get("/v1/operators", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [id, op] : world_->operators())
            arr.push_back(operator_payload(op));
        reply_json(res, 200, arr);
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                    std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        reply_error(res, 500, "internal", what);
    });
}

} // namespace reliablocks
