#pragma once

#include "guardgate/rules.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace guardgate {

enum class RestrictionKind { None, TempBlock, HumanReview };

struct EscalationConfig {
    bool enabled = true;
    int repeat_threshold = 3;  // K
    int window_seconds = 300;  // W
    RestrictionKind restriction = RestrictionKind::TempBlock;
};

struct BlockConfig {
    std::string message = "This request was blocked by policy {policy_id}.";
    bool notify = false;
    bool log = true;
};

// What happens when a policy is violated. Message templates may use
// {policy_id} and {rule_id}.
struct ActionConfig {
    std::string warn_message = "Warning: this message violates policy {policy_id}.";
    BlockConfig block;
    EscalationConfig escalation;
};

std::string render_template(std::string_view tmpl, std::string_view policy_id, std::string_view rule_id);

struct RestrictionState {
    RestrictionKind kind = RestrictionKind::None;
    std::int64_t until_ms = 0;               // TempBlock only
    std::size_t violations_in_window = 0;
    bool triggered_now = false;              // this call flipped the session
};

// Per-session sliding-window count of violations (verdicts with action >=
// Warn). When K violations fall within W seconds the session is restricted:
// TempBlock lasts until the window has drained (W seconds after the
// triggering violation); HumanReview lasts until clear() is called.
class RestrictionTracker {
public:
    RestrictionState record_violation(const std::string& session_id, Action action, std::int64_t now_ms,
                                      const EscalationConfig& config);

    RestrictionState state(const std::string& session_id, std::int64_t now_ms) const;

    // Lifts any restriction and forgets past violations.
    void clear(const std::string& session_id);

    void temp_block(const std::string& session_id, std::int64_t until_ms);

private:
    struct Session {
        std::deque<std::int64_t> violations;
        RestrictionKind kind = RestrictionKind::None;
        std::int64_t until_ms = 0;
    };

    mutable std::mutex mu_;
    std::map<std::string, Session> sessions_;
};

std::string_view to_string(RestrictionKind kind);

} // namespace guardgate
