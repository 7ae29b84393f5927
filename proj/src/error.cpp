#include "guardgate/error.hpp"

namespace guardgate {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidPattern:        return "InvalidPattern";
        case ErrorCode::EmptyKeywordList:      return "EmptyKeywordList";
        case ErrorCode::UnknownBuiltinPattern: return "UnknownBuiltinPattern";
        case ErrorCode::UnknownModelReference: return "UnknownModelReference";
        case ErrorCode::UnknownLexicon:        return "UnknownLexicon";
        case ErrorCode::InvalidRuleSpec:       return "InvalidRuleSpec";
        case ErrorCode::SpanOutOfBounds:       return "SpanOutOfBounds";
        case ErrorCode::SingleClassDataset:    return "SingleClassDataset";
        case ErrorCode::EmptyDataset:          return "EmptyDataset";
        case ErrorCode::InvalidModel:          return "InvalidModel";
        case ErrorCode::MixedDirections:       return "MixedDirections";
        case ErrorCode::AxisMismatch:          return "AxisMismatch";
        case ErrorCode::InvalidVector:         return "InvalidVector";
        case ErrorCode::DuplicatePriority:     return "DuplicatePriority";
        case ErrorCode::QueueUnavailable:      return "QueueUnavailable";
        case ErrorCode::UnknownReview:         return "UnknownReview";
        case ErrorCode::AlreadyResolved:       return "AlreadyResolved";
        case ErrorCode::UnknownAssistant:      return "UnknownAssistant";
        case ErrorCode::ConfigNotLoaded:       return "ConfigNotLoaded";
        case ErrorCode::UpstreamTimeout:       return "UpstreamTimeout";
        case ErrorCode::UpstreamError:         return "UpstreamError";
        case ErrorCode::ValidationFailed:      return "ValidationFailed";
        case ErrorCode::ParseError:            return "ParseError";
        case ErrorCode::IoError:               return "IoError";
    }
    return "Unknown";
}

namespace {

std::string summarize(const std::vector<ValidationFinding>& findings) {
    std::string out = "config validation failed";
    if (!findings.empty()) {
        out += ": ";
        out += findings.front().path;
        out += ": ";
        out += findings.front().message;
        if (findings.size() > 1) {
            out += " (+" + std::to_string(findings.size() - 1) + " more)";
        }
    }
    return out;
}

} // namespace

ValidationError::ValidationError(std::vector<ValidationFinding> findings)
    : Error(ErrorCode::ValidationFailed, summarize(findings)), findings_(std::move(findings)) {}

} // namespace guardgate
