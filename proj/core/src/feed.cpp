#include "reliablocks/feed.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "reliablocks/rng.hpp"

namespace reliablocks {

void GenParams::validate() const {
    if (exit_rate < 0.0) throw InvalidParams("exit_rate must be >= 0");
    if (value_log_sigma < 0.0) throw InvalidParams("value_log_sigma must be >= 0");
    if (num_providers < 1) throw InvalidParams("num_providers must be >= 1");
    if (num_blocks < 1 && num_blocks != 0) throw InvalidParams("num_blocks must be >= 0");
}

namespace {

std::uint64_t require_uint(const nlohmann::json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end())
        throw ParseError(0, std::string("missing field: ") + field);
    if (!it->is_number_unsigned())
        throw ParseError(0, std::string("field must be a non-negative integer: ") + field);
    return it->get<std::uint64_t>();
}

std::string require_string(const nlohmann::json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end())
        throw ParseError(0, std::string("missing field: ") + field);
    if (!it->is_string())
        throw ParseError(0, std::string("field must be a string: ") + field);
    return it->get<std::string>();
}

} // namespace

FeedRecord parse_feed_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    if (!j.is_object()) throw ParseError(0, "feed line is not a JSON object");

    std::string type = require_string(j, "type");
    if (type == "fast_exit") {
        FastExitEvent e;
        e.id = require_string(j, "id");
        e.l2_block = require_uint(j, "l2_block");
        e.provider = require_string(j, "provider");
        try {
            e.value_base_units = u128_from_dec(require_string(j, "value_base_units"));
        } catch (const MalformedEvent& m) {
            throw ParseError(0, m.what());
        }
        e.l1_block = require_uint(j, "l1_block");
        e.ts = require_uint(j, "ts");
        return FeedRecord{e};
    }
    if (type == "head") {
        HeadAdvance h;
        h.l2_block = require_uint(j, "l2_block");
        h.ts = require_uint(j, "ts");
        return FeedRecord{h};
    }
    throw ParseError(0, "unknown record type: " + type);
}

std::string serialize_feed_record(const FeedRecord& record) {
    nlohmann::json j;
    if (record.is_exit()) {
        const auto& e = record.exit();
        j = {{"type", "fast_exit"},
             {"id", e.id},
             {"l2_block", e.l2_block},
             {"provider", e.provider},
             {"value_base_units", u128_to_dec(e.value_base_units)},
             {"l1_block", e.l1_block},
             {"ts", e.ts}};
    } else {
        const auto& h = record.head();
        j = {{"type", "head"}, {"l2_block", h.l2_block}, {"ts", h.ts}};
    }
    return j.dump();
}

std::vector<FeedRecord> generate_feed(const GenParams& params) {
    params.validate();
    Xoshiro256StarStar rng(params.seed);
    std::vector<FeedRecord> out;
    std::uint64_t exit_counter = 0;

    for (std::uint64_t block = 0; block < params.num_blocks; ++block) {
        std::uint64_t ts = block * params.block_time_seconds;
        out.push_back(FeedRecord{HeadAdvance{block, ts}});

        // Poisson by CDF inversion from one uniform draw
        double u = rng.uniform01();
        std::uint64_t k = 0;
        double p = std::exp(-params.exit_rate);
        double cdf = p;
        while (u >= cdf && k < 1000) {
            ++k;
            p *= params.exit_rate / static_cast<double>(k);
            cdf += p;
        }

        for (std::uint64_t i = 0; i < k; ++i) {
            // log-normal value via Box-Muller
            double u1 = rng.uniform01_open();
            double u2 = rng.uniform01();
            double z = std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(2.0 * std::numbers::pi * u2);
            double tokens = std::exp(params.value_log_mean + params.value_log_sigma * z);
            double base = std::floor(tokens * 1e18);
            FastExitEvent e;
            std::ostringstream id;
            id << "fe-";
            id.width(8);
            id.fill('0');
            id << exit_counter++;
            e.id = id.str();
            e.l2_block = block;
            e.provider = "p" + std::to_string(rng.next() % params.num_providers);
            e.value_base_units = base >= 1e38 ? (u128{1} << 127)
                                              : static_cast<u128>(base);
            e.l1_block = 1000 + block;
            e.ts = ts;
            out.push_back(FeedRecord{e});
        }
    }
    return out;
}

ValidationReport validate_feed(const std::vector<FeedRecord>& records) {
    ValidationReport report;
    std::unordered_set<std::string> ids;
    std::uint64_t head = 0;
    bool head_seen = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.is_exit()) {
            const auto& e = r.exit();
            if (!ids.insert(e.id).second)
                report.issues.push_back({i, "DuplicateEventId", e.id});
            if (head_seen && e.l2_block > head)
                report.issues.push_back(
                    {i, "ExitBeyondHead",
                     e.id + " at block " + std::to_string(e.l2_block)});
            // apply_event advances the head through exits either way
            if (e.l2_block > head) head = e.l2_block;
            head_seen = true;
        } else {
            const auto& h = r.head();
            if (head_seen && h.l2_block < head)
                report.issues.push_back(
                    {i, "HeadRegression",
                     std::to_string(h.l2_block) + " < " + std::to_string(head)});
            else
                head = h.l2_block;
            head_seen = true;
        }
    }
    return report;
}

} // namespace reliablocks
