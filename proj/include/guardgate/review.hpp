#pragma once

#include "guardgate/conflict.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace guardgate {

enum class ReviewStatus { Pending, ResolvedAllow, ResolvedBlock, ResolvedPrecedence };

enum class ReviewReason { Conflict, Escalation, RepeatViolation };

struct ConflictSnapshot {
    std::string direction;
    std::vector<std::string> policy_ids;
    ConflictCase conflict;
    std::optional<ResolutionMethod> attempted;
};

struct ReviewDecision {
    enum class Kind { Allow, Block, Precedence };
    Kind kind = Kind::Allow;
    std::string policy_id;  // Precedence only
};

struct ReviewItem {
    std::string id;
    std::string session_id;
    std::string assistant_id;
    ReviewReason reason = ReviewReason::Conflict;
    std::optional<ConflictSnapshot> conflict;
    std::string detail;
    std::int64_t created_at_ms = 0;
    ReviewStatus status = ReviewStatus::Pending;
    std::optional<std::string> precedence_policy_id;
    std::optional<std::string> resolved_by;
    std::optional<std::int64_t> resolved_at_ms;
};

// Shared, mutex-guarded queue of items awaiting an operator. Escalation is
// idempotent per (session, fingerprint) while the item is pending.
class ReviewQueue {
public:
    explicit ReviewQueue(std::size_t capacity = 10000) : capacity_(capacity) {}

    // Returns the existing pending item for (session_id, fingerprint) when one
    // exists. Throws QueueUnavailable when the number of pending items has
    // reached capacity.
    ReviewItem escalate(std::string session_id, std::string assistant_id, ReviewReason reason,
                        std::optional<ConflictSnapshot> conflict, std::string detail, std::string fingerprint,
                        std::int64_t now_ms);

    // Throws UnknownReview / AlreadyResolved.
    ReviewItem resolve(const std::string& id, const ReviewDecision& decision, const std::string& operator_id,
                       std::int64_t now_ms);

    std::optional<ReviewItem> get(const std::string& id) const;
    std::vector<ReviewItem> list(std::optional<ReviewStatus> status = std::nullopt) const;
    std::size_t pending_count() const;

private:
    mutable std::mutex mu_;
    std::size_t capacity_;
    std::uint64_t next_id_ = 1;
    std::map<std::string, ReviewItem> items_;
    std::map<std::string, std::string> pending_by_key_;  // session + '\x1f' + fingerprint -> id
};

// Stable identity of a conflict for idempotent escalation.
std::string conflict_fingerprint(const ConflictSnapshot& snapshot);

// Files `snapshot` for human review and reports the pending resolution.
Resolution escalate_to_human(ReviewQueue& queue, const ConflictSnapshot& snapshot, const std::string& session_id,
                             const std::string& assistant_id, std::int64_t now_ms);

std::string_view to_string(ReviewStatus status);
std::string_view to_string(ReviewReason reason);
std::optional<ReviewStatus> parse_review_status(std::string_view s);

} // namespace guardgate
