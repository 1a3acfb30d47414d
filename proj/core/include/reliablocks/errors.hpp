#pragma once

#include <stdexcept>
#include <string>

namespace reliablocks {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// core_scoring
struct InvalidParams : Error { using Error::Error; };
struct DuplicateEventId : Error { using Error::Error; };
struct MalformedEvent : Error { using Error::Error; };
struct HeadRegression : Error { using Error::Error; };
struct BlockBeyondHead : Error { using Error::Error; };
struct ScoreOutOfRange : Error { using Error::Error; };

// ingestion
struct ParseError : Error {
    ParseError(std::size_t position, const std::string& reason)
        : Error("parse error at " + std::to_string(position) + ": " + reason),
          position(position), reason(reason) {}
    std::size_t position;
    std::string reason;
};

// avs_sim
struct DuplicateOperator : Error { using Error::Error; };
struct InsufficientStake : Error { using Error::Error; };
struct UnknownOperator : Error { using Error::Error; };
struct UnknownTask : Error { using Error::Error; };
struct TaskNotOpen : Error { using Error::Error; };
struct DuplicateSubmission : Error { using Error::Error; };
struct QuorumNotReached : Error { using Error::Error; };
struct NoSubmissions : Error { using Error::Error; };

// store
struct IoFailure : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };
struct CorruptLog : Error { using Error::Error; };
struct ParamsMismatch : Error { using Error::Error; };

} // namespace reliablocks
