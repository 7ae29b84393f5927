#include "guardgate/error.hpp"
#include "guardgate/review.hpp"
#include "guardgate/serialize.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace guardgate;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

} // namespace

TEST(ReviewQueue, LifecycleSingleTransition) {
    ReviewQueue q;
    const auto item = q.escalate("s", "a", ReviewReason::Escalation, std::nullopt, "why", "fp", 10);
    EXPECT_EQ(item.id, "rev-000001");
    EXPECT_EQ(item.status, ReviewStatus::Pending);
    const auto done = q.resolve(item.id, {ReviewDecision::Kind::Precedence, "privacy"}, "op", 20);
    EXPECT_EQ(done.status, ReviewStatus::ResolvedPrecedence);
    EXPECT_EQ(done.precedence_policy_id, "privacy");
    EXPECT_EQ(done.resolved_by, "op");
    EXPECT_EQ(done.resolved_at_ms, 20);
    EXPECT_EQ(code_of([&] { q.resolve(item.id, {}, "op2", 30); }), ErrorCode::AlreadyResolved);
    EXPECT_EQ(q.get(item.id)->resolved_by, "op");
    EXPECT_EQ(code_of([&] { q.resolve("rev-999999", {}, "op", 30); }), ErrorCode::UnknownReview);
}

TEST(ReviewQueue, IdempotentWhilePendingOnly) {
    ReviewQueue q;
    const auto a = q.escalate("s", "x", ReviewReason::Conflict, std::nullopt, "", "fp", 1);
    EXPECT_EQ(q.escalate("s", "x", ReviewReason::Conflict, std::nullopt, "", "fp", 2).id, a.id);
    EXPECT_NE(q.escalate("s", "x", ReviewReason::Conflict, std::nullopt, "", "other", 2).id, a.id);
    q.resolve(a.id, {ReviewDecision::Kind::Block, ""}, "op", 3);
    EXPECT_NE(q.escalate("s", "x", ReviewReason::Conflict, std::nullopt, "", "fp", 4).id, a.id);
}

TEST(ReviewQueue, FilterAndCapacity) {
    ReviewQueue q(2);
    const auto a = q.escalate("s1", "x", ReviewReason::Conflict, std::nullopt, "", "1", 1);
    q.escalate("s2", "x", ReviewReason::Conflict, std::nullopt, "", "2", 1);
    EXPECT_EQ(code_of([&] { q.escalate("s3", "x", ReviewReason::Conflict, std::nullopt, "", "3", 1); }),
              ErrorCode::QueueUnavailable);
    q.resolve(a.id, {ReviewDecision::Kind::Allow, ""}, "op", 2);
    EXPECT_EQ(q.list(ReviewStatus::Pending).size(), 1u);
    EXPECT_EQ(q.list(ReviewStatus::ResolvedAllow).size(), 1u);
    EXPECT_EQ(q.list().size(), 2u);
    for (const auto& i : q.list(ReviewStatus::Pending)) EXPECT_EQ(i.status, ReviewStatus::Pending);
    EXPECT_NO_THROW(q.escalate("s3", "x", ReviewReason::Conflict, std::nullopt, "", "3", 1));
}

TEST(ReviewQueue, ConcurrentResolveExactlyOnce) {
    ReviewQueue q;
    const auto item = q.escalate("s", "a", ReviewReason::Conflict, std::nullopt, "", "fp", 1);
    std::atomic<int> ok{0}, rejected{0};
    std::vector<std::thread> ts;
    for (int i = 0; i < 8; ++i) {
        ts.emplace_back([&, i] {
            try {
                q.resolve(item.id, {ReviewDecision::Kind::Allow, ""}, "op" + std::to_string(i), 2);
                ++ok;
            } catch (const Error&) {
                ++rejected;
            }
        });
    }
    for (auto& t : ts) t.join();
    EXPECT_EQ(ok, 1);
    EXPECT_EQ(rejected, 7);
}

TEST(ReviewQueue, Serialization) {
    ReviewQueue q;
    ConflictSnapshot snap;
    snap.direction = "input";
    snap.policy_ids = {"a", "b"};
    snap.conflict.kind = ConflictKind::Case1;
    snap.conflict.variant = Variant::I;
    snap.conflict.dot = snap.conflict.min_dot = snap.conflict.max_dot = -1;
    const auto item = q.escalate("s", "asst", ReviewReason::Conflict, snap, "d", conflict_fingerprint(snap), 5);
    const nlohmann::json j = item;
    EXPECT_EQ(j["id"], item.id);
    EXPECT_EQ(j["status"], "pending");
    EXPECT_EQ(j["conflict"]["case"]["kind"], "case1");
    EXPECT_EQ(j["conflict"]["case"]["variant"], "I");
    EXPECT_EQ(parse_review_status("pending"), ReviewStatus::Pending);
    EXPECT_FALSE(parse_review_status("bogus"));
}
