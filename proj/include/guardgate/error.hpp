#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace guardgate {

enum class ErrorCode {
    InvalidPattern,
    EmptyKeywordList,
    UnknownBuiltinPattern,
    UnknownModelReference,
    UnknownLexicon,
    InvalidRuleSpec,
    SpanOutOfBounds,
    SingleClassDataset,
    EmptyDataset,
    InvalidModel,
    MixedDirections,
    AxisMismatch,
    InvalidVector,
    DuplicatePriority,
    QueueUnavailable,
    UnknownReview,
    AlreadyResolved,
    UnknownAssistant,
    ConfigNotLoaded,
    UpstreamTimeout,
    UpstreamError,
    ValidationFailed,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// One structured complaint produced while validating a config document.
struct ValidationFinding {
    std::string path;     // JSON-pointer-ish location, e.g. /assistants/0/input_policies/1
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<ValidationFinding> findings);

    const std::vector<ValidationFinding>& findings() const noexcept { return findings_; }

private:
    std::vector<ValidationFinding> findings_;
};

} // namespace guardgate
