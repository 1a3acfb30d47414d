#pragma once

#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "reliablocks/avs.hpp"
#include "reliablocks/scoring.hpp"

namespace httplib {
class Server;
}

namespace reliablocks {

// Score payload shared by the CLI and the HTTP API so the two surfaces
// cannot drift apart.
nlohmann::json score_payload(const ChainState& chain, std::uint64_t l2_block,
                             const ScoringParams& params);

nlohmann::json task_payload(const Task& task);
nlohmann::json operator_payload(const Operator& op);

// Read model over an immutable chain snapshot, plus task creation routed
// through the single-writer world.
class Service {
public:
    Service(std::shared_ptr<const ChainState> chain, ScoringParams scoring,
            std::shared_ptr<AvsWorld> world, AvsParams avs,
            std::uint64_t log_entries);

    void attach(httplib::Server& server);

    // swap in a fresh chain snapshot; readers keep their old one
    void update_chain(std::shared_ptr<const ChainState> chain,
                      std::uint64_t log_entries);

private:
    std::shared_ptr<const ChainState> chain_snapshot() const;

    mutable std::mutex mutex_; // guards the snapshot pointer and world writes
    std::shared_ptr<const ChainState> chain_;
    ScoringParams scoring_;
    std::shared_ptr<AvsWorld> world_;
    AvsParams avs_;
    std::uint64_t log_entries_;
};

} // namespace reliablocks
