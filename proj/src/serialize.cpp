#include "guardgate/serialize.hpp"

#include <cmath>

namespace guardgate {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json context_json(const ContextSet& c) { return json(std::vector<std::string>(c.begin(), c.end())); }

} // namespace

void to_json(json& j, const MatchSpan& s) {
    j = json{{"start", s.start}, {"end", s.end}, {"rule_id", s.rule_id}, {"excerpt", s.excerpt}};
}

void to_json(json& j, const Finding& f) {
    j = json{{"rule_id", f.rule_id},
             {"triggered", f.triggered},
             {"score", f.score},
             {"spans", f.spans},
             {"explanation", f.explanation}};
}

void to_json(json& j, const TraceEntry& t) {
    j = json{{"policy_id", t.policy_id},
             {"rule_id", t.rule_id},
             {"kind", to_string(t.kind)},
             {"evaluated", t.evaluated},
             {"outcome", to_string(t.outcome)},
             {"action", to_string(t.action)}};
}

void to_json(json& j, const Verdict& v) {
    j = json{{"action", to_string(v.action)}, {"findings", v.findings}, {"trace", v.trace}};
    j["transformed_text"] = v.transformed_text ? json(*v.transformed_text) : json(nullptr);
    j["redaction_count"] = v.redactions.size();
    if (v.deciding_policy) j["deciding_policy"] = *v.deciding_policy;
    if (v.deciding_rule) j["deciding_rule"] = *v.deciding_rule;
}

void to_json(json& j, const ConflictCase& c) {
    j = json{{"kind", to_string(c.kind)},
             {"dot", number_or_null(c.dot)},
             {"min_dot", number_or_null(c.min_dot)},
             {"max_dot", number_or_null(c.max_dot)}};
    j["variant"] = c.variant ? json(to_string(*c.variant)) : json(nullptr);
    json contexts = json::array();
    for (const auto& ctx : c.contexts_where_opposed) contexts.push_back(context_json(ctx));
    j["contexts_where_opposed"] = std::move(contexts);
}

void to_json(json& j, const PairFinding& f) {
    j = json{{"direction", f.direction},
             {"policy_a", f.policy_a},
             {"policy_b", f.policy_b},
             {"case", f.conflict},
             {"severity", to_string(f.severity)},
             {"overridden", f.overridden}};
}

void to_json(json& j, const VariantScenario& s) {
    j = json{{"direction", s.direction},
             {"context", context_json(s.context)},
             {"active", s.active},
             {"variant", to_string(s.variant)}};
}

void to_json(json& j, const ConflictReport& r) {
    j = json{{"findings", r.findings},
             {"scenarios", r.scenarios},
             {"blocking", r.count(FindingSeverity::Blocking)},
             {"warnings", r.count(FindingSeverity::Warning)},
             {"info", r.count(FindingSeverity::Info)},
             {"exit_status", r.exit_status()}};
}

void to_json(json& j, const Resolution& r) {
    j = json{{"method", to_string(r.method)}};
    std::visit(
        [&](const auto& result) {
            using T = std::decay_t<decltype(result)>;
            if constexpr (std::is_same_v<T, DirectionResult>) {
                j["result"] = "direction";
                j["direction"] = result.direction.values();
            } else if constexpr (std::is_same_v<T, WinnerResult>) {
                j["result"] = "winner";
                j["winner"] = result.policy_id;
            } else if constexpr (std::is_same_v<T, EthicallyBlind>) {
                j["result"] = "ethically_blind";
            } else {
                j["result"] = "pending_human";
                j["review_id"] = result.review_id;
            }
        },
        r.result);
    j["alert"] = r.alert ? json(*r.alert) : json(nullptr);
}

void to_json(json& j, const ConflictSnapshot& s) {
    j = json{{"direction", s.direction}, {"policy_ids", s.policy_ids}, {"case", s.conflict}};
    j["attempted"] = s.attempted ? json(to_string(*s.attempted)) : json(nullptr);
}

void to_json(json& j, const ReviewItem& item) {
    j = json{{"id", item.id},
             {"session_id", item.session_id},
             {"assistant_id", item.assistant_id},
             {"reason", to_string(item.reason)},
             {"detail", item.detail},
             {"created_at", item.created_at_ms},
             {"status", to_string(item.status)}};
    j["conflict"] = item.conflict ? json(*item.conflict) : json(nullptr);
    j["precedence_policy_id"] = item.precedence_policy_id ? json(*item.precedence_policy_id) : json(nullptr);
    j["resolved_by"] = item.resolved_by ? json(*item.resolved_by) : json(nullptr);
    j["resolved_at"] = item.resolved_at_ms ? json(*item.resolved_at_ms) : json(nullptr);
}

void to_json(json& j, const ValidationFinding& f) { j = json{{"path", f.path}, {"message", f.message}}; }

json error_json(const Error& e) {
    json j{{"error", to_string(e.code())}, {"message", e.what()}};
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) j["findings"] = v->findings();
    return j;
}

} // namespace guardgate
