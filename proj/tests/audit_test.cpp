#include "guardgate/audit.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace guardgate;

namespace {

AuditRecord rec(std::string session, std::int64_t ts, std::string action = "allow") {
    AuditRecord r;
    r.session_id = std::move(session);
    r.timestamp_ms = ts;
    r.direction = "input";
    r.assistant_id = "a";
    r.verdict_action = std::move(action);
    return r;
}

} // namespace

TEST(AuditLog, AppendOnlyFileRoundTrip) {
    gg_test::TempDir dir;
    const auto path = dir / "audit.jsonl";
    {
        AuditLog log(path);
        auto r = rec("s1", 100, "block");
        r.triggered_rule_ids = {"x", "y"};
        r.review_id = "rev-000001";
        log.append(r);
        log.append(rec("s2", 100));
    }
    {
        AuditLog again(path);  // reopening appends, never truncates
        again.append(rec("s1", 200));
    }
    const auto back = AuditLog::read_file(path);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[0].verdict_action, "block");
    EXPECT_EQ(back[0].triggered_rule_ids, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(back[0].review_id, "rev-000001");
    EXPECT_FALSE(back[1].review_id);
    // one JSON object per line
    const auto text = gg_test::read_file(path);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(AuditLog, StrictlyIncreasingPerSession) {
    AuditLog log;
    log.append(rec("s", 50));
    log.append(rec("s", 50));
    log.append(rec("s", 10));
    log.append(rec("t", 10));
    const auto s = log.query(std::string("s"));
    ASSERT_EQ(s.size(), 3u);
    EXPECT_LT(s[0].timestamp_ms, s[1].timestamp_ms);
    EXPECT_LT(s[1].timestamp_ms, s[2].timestamp_ms);
    EXPECT_EQ(log.query(std::string("t"))[0].timestamp_ms, 10);
    EXPECT_EQ(log.query().size(), 4u);
    EXPECT_EQ(log.size(), 4u);
}

TEST(AuditLog, ConcurrentAppendsSerialized) {
    gg_test::TempDir dir;
    AuditLog log(dir / "a.jsonl");
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t) {
        ts.emplace_back([&, t] {
            for (int i = 0; i < 50; ++i) log.append(rec("s" + std::to_string(t), i));
        });
    }
    for (auto& t : ts) t.join();
    const auto back = AuditLog::read_file(dir / "a.jsonl");
    ASSERT_EQ(back.size(), 200u);
    std::set<std::uint64_t> seqs;
    for (const auto& r : back) seqs.insert(r.seq);
    EXPECT_EQ(seqs.size(), 200u);
}
