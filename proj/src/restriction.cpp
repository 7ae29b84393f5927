#include "guardgate/restriction.hpp"

namespace guardgate {

std::string render_template(std::string_view tmpl, std::string_view policy_id, std::string_view rule_id) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.substr(i).starts_with("{policy_id}")) {
            out += policy_id;
            i += 11;
        } else if (tmpl.substr(i).starts_with("{rule_id}")) {
            out += rule_id;
            i += 9;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

RestrictionState RestrictionTracker::record_violation(const std::string& session_id, Action action,
                                                      std::int64_t now_ms, const EscalationConfig& config) {
    std::lock_guard lock(mu_);
    Session& s = sessions_[session_id];
    const std::int64_t window_ms = static_cast<std::int64_t>(config.window_seconds) * 1000;
    while (!s.violations.empty() && now_ms - s.violations.front() >= window_ms) s.violations.pop_front();

    RestrictionState out;
    if (action >= Action::Warn) s.violations.push_back(now_ms);
    out.violations_in_window = s.violations.size();

    if (s.kind == RestrictionKind::TempBlock && now_ms >= s.until_ms) s.kind = RestrictionKind::None;

    if (config.enabled && s.kind == RestrictionKind::None && action >= Action::Warn &&
        s.violations.size() >= static_cast<std::size_t>(config.repeat_threshold)) {
        s.kind = config.restriction;
        s.until_ms = config.restriction == RestrictionKind::TempBlock ? now_ms + window_ms : 0;
        out.triggered_now = true;
    }
    out.kind = s.kind;
    out.until_ms = s.until_ms;
    return out;
}

RestrictionState RestrictionTracker::state(const std::string& session_id, std::int64_t now_ms) const {
    std::lock_guard lock(mu_);
    RestrictionState out;
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return out;
    const Session& s = it->second;
    out.violations_in_window = s.violations.size();
    if (s.kind == RestrictionKind::TempBlock && now_ms >= s.until_ms) return out;
    out.kind = s.kind;
    out.until_ms = s.until_ms;
    return out;
}

void RestrictionTracker::clear(const std::string& session_id) {
    std::lock_guard lock(mu_);
    sessions_.erase(session_id);
}

void RestrictionTracker::temp_block(const std::string& session_id, std::int64_t until_ms) {
    std::lock_guard lock(mu_);
    Session& s = sessions_[session_id];
    s.kind = RestrictionKind::TempBlock;
    s.until_ms = until_ms;
}

std::string_view to_string(RestrictionKind kind) {
    switch (kind) {
        case RestrictionKind::None:        return "none";
        case RestrictionKind::TempBlock:   return "temp_block";
        case RestrictionKind::HumanReview: return "human_review";
    }
    return "unknown";
}

} // namespace guardgate
