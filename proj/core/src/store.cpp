#include "reliablocks/store.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>
#include <zlib.h>

namespace reliablocks {

LogRecord LogRecord::from_feed(FeedRecord r) {
    LogRecord rec;
    rec.kind = r.is_exit() ? Kind::fast_exit : Kind::head_advance;
    rec.feed = std::move(r);
    return rec;
}

nlohmann::json LogRecord::to_json() const {
    switch (kind) {
        case Kind::fast_exit:
        case Kind::head_advance:
            return nlohmann::json::parse(serialize_feed_record(feed));
        case Kind::register_operator:
            return {{"type", "register_operator"},
                    {"id", operator_id},
                    {"stake", stake},
                    {"strategy", strategy.to_string()}};
        case Kind::run_round:
            return {{"type", "run_round"}, {"l2_block", l2_block}, {"tick", tick}};
    }
    throw CorruptLog("unreachable record kind");
}

LogRecord LogRecord::from_json(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    LogRecord rec;
    if (type == "fast_exit" || type == "head") {
        rec.feed = parse_feed_line(j.dump());
        rec.kind = rec.feed.is_exit() ? Kind::fast_exit : Kind::head_advance;
        return rec;
    }
    if (type == "register_operator") {
        rec.kind = Kind::register_operator;
        rec.operator_id = j.at("id").get<std::string>();
        rec.stake = j.at("stake").get<std::uint64_t>();
        rec.strategy = Strategy::parse(j.at("strategy").get<std::string>());
        return rec;
    }
    if (type == "run_round") {
        rec.kind = Kind::run_round;
        rec.l2_block = j.at("l2_block").get<std::uint64_t>();
        rec.tick = j.at("tick").get<std::uint64_t>();
        return rec;
    }
    throw CorruptLog("unknown log record type: " + type);
}

namespace {

std::uint32_t payload_crc(const std::string& payload) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                static_cast<uInt>(payload.size())));
}

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const char* p) {
    auto b = reinterpret_cast<const unsigned char*>(p);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

EventLog::EventLog(std::filesystem::path path, bool truncate) : path_(std::move(path)) {
    if (truncate) {
        std::ofstream f(path_, std::ios::binary | std::ios::trunc);
        if (!f) throw IoFailure("cannot open log for writing: " + path_.string());
    } else if (std::filesystem::exists(path_)) {
        next_seq_ = read_all(path_).size();
    } else {
        std::ofstream f(path_, std::ios::binary);
        if (!f) throw IoFailure("cannot create log: " + path_.string());
    }
}

std::uint64_t EventLog::append(const LogRecord& record) {
    std::string payload = record.to_json().dump();
    std::string frame;
    frame.reserve(payload.size() + 8);
    put_u32_le(frame, static_cast<std::uint32_t>(payload.size()));
    frame += payload;
    put_u32_le(frame, payload_crc(payload));

    std::ofstream f(path_, std::ios::binary | std::ios::app);
    if (!f) throw IoFailure("cannot open log for append: " + path_.string());
    f.write(frame.data(), static_cast<std::streamsize>(frame.size()));
    f.flush();
    if (!f) throw IoFailure("write failed: " + path_.string());
    return next_seq_++;
}

std::vector<LogRecord> EventLog::read_all(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open log: " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::vector<LogRecord> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        if (data.size() - pos < 4)
            throw CorruptLog("truncated length header at offset " + std::to_string(pos));
        std::uint32_t len = get_u32_le(data.data() + pos);
        pos += 4;
        if (data.size() - pos < len + 4ull)
            throw CorruptLog("truncated entry at offset " + std::to_string(pos));
        std::string payload = data.substr(pos, len);
        pos += len;
        std::uint32_t stored = get_u32_le(data.data() + pos);
        pos += 4;
        if (payload_crc(payload) != stored)
            throw ChecksumMismatch("entry " + std::to_string(out.size()) +
                                   " crc mismatch");
        try {
            out.push_back(LogRecord::from_json(nlohmann::json::parse(payload)));
        } catch (const nlohmann::json::parse_error& e) {
            throw CorruptLog("entry " + std::to_string(out.size()) + ": " + e.what());
        }
    }
    return out;
}

std::uint64_t hash_params(const ScoringParams& scoring, const AvsParams& avs) {
    nlohmann::json j = {
        {"kappa_value", scoring.kappa_value},
        {"kappa_depth", scoring.kappa_depth},
        {"rate_min", scoring.rate_min},
        {"rate_max", scoring.rate_max},
        {"finality_depth", scoring.finality_depth},
        {"score_decimals", scoring.score_decimals},
        {"min_stake", avs.min_stake},
        {"slash_fraction", avs.slash_fraction},
        {"deviation_tolerance", avs.deviation_tolerance},
        {"quorum_fraction", avs.quorum_fraction},
        {"reward_per_task", avs.reward_per_task},
        {"task_deadline", avs.task_deadline},
    };
    // FNV-1a 64 over the canonical dump
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void save_snapshot(const Snapshot& snap, const std::filesystem::path& path) {
    nlohmann::json j = {
        {"as_of_seq", snap.as_of_seq},
        {"chain_state", snap.chain_state},
        {"avs_state", snap.avs_state},
        {"params_hash", snap.params_hash},
    };
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot write snapshot: " + path.string());
    f << j.dump();
    f.flush();
    if (!f) throw IoFailure("snapshot write failed: " + path.string());
}

Snapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot read snapshot: " + path.string());
    nlohmann::json j = nlohmann::json::parse(f);
    Snapshot s;
    s.as_of_seq = j.at("as_of_seq").get<std::uint64_t>();
    s.chain_state = j.at("chain_state");
    s.avs_state = j.at("avs_state");
    s.params_hash = j.at("params_hash").get<std::uint64_t>();
    return s;
}

Snapshot make_snapshot(const ChainState& chain, const AvsWorld& world,
                       std::uint64_t as_of_seq, const ScoringParams& scoring,
                       const AvsParams& avs) {
    Snapshot s;
    s.as_of_seq = as_of_seq;
    s.chain_state = chain.to_json();
    s.avs_state = world.to_json();
    s.params_hash = hash_params(scoring, avs);
    return s;
}

ReplayResult replay(const std::filesystem::path& log_path,
                    const std::optional<Snapshot>& from_snapshot,
                    const ScoringParams& scoring, const AvsParams& avs) {
    scoring.validate();
    avs.validate();

    ReplayResult res;
    std::uint64_t skip = 0;
    if (from_snapshot) {
        if (from_snapshot->params_hash != hash_params(scoring, avs))
            throw ParamsMismatch("snapshot was taken under different parameters");
        res.chain = ChainState::from_json(from_snapshot->chain_state);
        res.world = AvsWorld::from_json(from_snapshot->avs_state);
        skip = from_snapshot->as_of_seq;
    }

    auto records = EventLog::read_all(log_path);
    if (skip > records.size())
        throw CorruptLog("snapshot seq " + std::to_string(skip) +
                         " beyond log length " + std::to_string(records.size()));

    for (std::size_t i = skip; i < records.size(); ++i) {
        const LogRecord& r = records[i];
        switch (r.kind) {
            case LogRecord::Kind::fast_exit:
                res.chain.apply_event(r.feed.exit(), scoring);
                break;
            case LogRecord::Kind::head_advance:
                res.chain.advance_head(r.feed.head().l2_block);
                break;
            case LogRecord::Kind::register_operator:
                res.world.register_operator(r.operator_id, r.stake, r.strategy, avs);
                break;
            case LogRecord::Kind::run_round:
                res.world.run_round(r.l2_block, res.chain, scoring, avs, r.tick);
                break;
        }
    }
    res.entries_applied = records.size();
    return res;
}

} // namespace reliablocks
