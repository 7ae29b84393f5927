#include "guardgate/review.hpp"

#include "guardgate/error.hpp"

#include <algorithm>
#include <cstdio>

namespace guardgate {

ReviewItem ReviewQueue::escalate(std::string session_id, std::string assistant_id, ReviewReason reason,
                                 std::optional<ConflictSnapshot> conflict, std::string detail,
                                 std::string fingerprint, std::int64_t now_ms) {
    std::lock_guard lock(mu_);
    std::string key = session_id + '\x1f' + fingerprint;
    if (const auto it = pending_by_key_.find(key); it != pending_by_key_.end()) {
        return items_.at(it->second);
    }
    if (pending_by_key_.size() >= capacity_) {
        throw Error(ErrorCode::QueueUnavailable, "review queue is full");
    }
    char id[32];
    std::snprintf(id, sizeof id, "rev-%06llu", static_cast<unsigned long long>(next_id_++));
    ReviewItem item;
    item.id = id;
    item.session_id = std::move(session_id);
    item.assistant_id = std::move(assistant_id);
    item.reason = reason;
    item.conflict = std::move(conflict);
    item.detail = std::move(detail);
    item.created_at_ms = now_ms;
    pending_by_key_.emplace(std::move(key), item.id);
    items_.emplace(item.id, item);
    return item;
}

ReviewItem ReviewQueue::resolve(const std::string& id, const ReviewDecision& decision,
                                const std::string& operator_id, std::int64_t now_ms) {
    std::lock_guard lock(mu_);
    const auto it = items_.find(id);
    if (it == items_.end()) throw Error(ErrorCode::UnknownReview, "unknown review '" + id + "'");
    ReviewItem& item = it->second;
    if (item.status != ReviewStatus::Pending) {
        throw Error(ErrorCode::AlreadyResolved, "review '" + id + "' is already resolved");
    }
    switch (decision.kind) {
        case ReviewDecision::Kind::Allow: item.status = ReviewStatus::ResolvedAllow; break;
        case ReviewDecision::Kind::Block: item.status = ReviewStatus::ResolvedBlock; break;
        case ReviewDecision::Kind::Precedence:
            item.status = ReviewStatus::ResolvedPrecedence;
            item.precedence_policy_id = decision.policy_id;
            break;
    }
    item.resolved_by = operator_id;
    item.resolved_at_ms = now_ms;
    std::erase_if(pending_by_key_, [&](const auto& kv) { return kv.second == id; });
    return item;
}

std::optional<ReviewItem> ReviewQueue::get(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = items_.find(id);
    if (it == items_.end()) return std::nullopt;
    return it->second;
}

std::vector<ReviewItem> ReviewQueue::list(std::optional<ReviewStatus> status) const {
    std::lock_guard lock(mu_);
    std::vector<ReviewItem> out;
    for (const auto& [id, item] : items_) {
        if (!status || item.status == *status) out.push_back(item);
    }
    return out;
}

std::size_t ReviewQueue::pending_count() const {
    std::lock_guard lock(mu_);
    return pending_by_key_.size();
}

std::string conflict_fingerprint(const ConflictSnapshot& snapshot) {
    std::vector<std::string> ids = snapshot.policy_ids;
    std::sort(ids.begin(), ids.end());
    std::string fp = "conflict|" + snapshot.direction + "|" + std::string(to_string(snapshot.conflict.kind)) + "|";
    if (snapshot.conflict.variant) fp += to_string(*snapshot.conflict.variant);
    for (const auto& id : ids) fp += "|" + id;
    return fp;
}

Resolution escalate_to_human(ReviewQueue& queue, const ConflictSnapshot& snapshot, const std::string& session_id,
                             const std::string& assistant_id, std::int64_t now_ms) {
    const ReviewItem item = queue.escalate(session_id, assistant_id, ReviewReason::Conflict, snapshot,
                                           "guardrail conflict requires a human decision",
                                           conflict_fingerprint(snapshot), now_ms);
    Resolution r;
    r.method = ResolutionMethod::Human;
    r.result = PendingHuman{item.id};
    return r;
}

std::string_view to_string(ReviewStatus status) {
    switch (status) {
        case ReviewStatus::Pending:            return "pending";
        case ReviewStatus::ResolvedAllow:      return "resolved_allow";
        case ReviewStatus::ResolvedBlock:      return "resolved_block";
        case ReviewStatus::ResolvedPrecedence: return "resolved_precedence";
    }
    return "unknown";
}

std::string_view to_string(ReviewReason reason) {
    switch (reason) {
        case ReviewReason::Conflict:        return "conflict";
        case ReviewReason::Escalation:      return "escalation";
        case ReviewReason::RepeatViolation: return "repeat_violation";
    }
    return "unknown";
}

std::optional<ReviewStatus> parse_review_status(std::string_view s) {
    if (s == "pending" || s == "Pending") return ReviewStatus::Pending;
    if (s == "resolved_allow") return ReviewStatus::ResolvedAllow;
    if (s == "resolved_block") return ReviewStatus::ResolvedBlock;
    if (s == "resolved_precedence") return ReviewStatus::ResolvedPrecedence;
    return std::nullopt;
}

} // namespace guardgate
