#include "guardgate/gateway.hpp"

#include "guardgate/error.hpp"
#include "guardgate/serialize.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>

namespace guardgate {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ValidationFailed:
        case ErrorCode::InvalidPattern:
        case ErrorCode::EmptyKeywordList:
        case ErrorCode::UnknownBuiltinPattern:
        case ErrorCode::UnknownModelReference:
        case ErrorCode::UnknownLexicon:
        case ErrorCode::InvalidRuleSpec:
        case ErrorCode::DuplicatePriority:
        case ErrorCode::AxisMismatch:
        case ErrorCode::InvalidVector:      return 422;
        case ErrorCode::ParseError:         return 400;
        case ErrorCode::UnknownAssistant:
        case ErrorCode::UnknownReview:      return 404;
        case ErrorCode::AlreadyResolved:    return 409;
        case ErrorCode::ConfigNotLoaded:
        case ErrorCode::QueueUnavailable:   return 503;
        case ErrorCode::UpstreamTimeout:
        case ErrorCode::UpstreamError:      return 502;
        default:                            return 500;
    }
}

GatewayResponse error_response(const Error& e) { return {status_for(e.code()), error_json(e)}; }

json context_json(const ContextSet& c) { return json(std::vector<std::string>(c.begin(), c.end())); }

} // namespace

Clock system_clock_ms() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

struct Gateway::Exchange {
    std::shared_ptr<const Deployment> deployment;
    const Assistant* assistant = nullptr;
    std::string session_id;
    ContextSet context;
    std::string model;
    std::vector<ChatMessage> messages;
    json input_summary;
    std::vector<std::string> warnings;
};

struct Gateway::Held {
    Exchange exchange;
    Direction stage = Direction::Input;
    std::string reply;
    std::optional<ConflictSnapshot> conflict;
    ReviewReason reason = ReviewReason::Escalation;
    std::int64_t created_at = 0;
};

struct Gateway::SideResult {
    Verdict verdict;
    std::vector<std::string> transformed;
    std::vector<Resolution> resolutions;
    std::optional<ConflictSnapshot> unresolved;
    std::set<std::string> excluded;

    json summary(Action effective) const {
        json j{{"action", to_string(effective)},
               {"triggered_rule_ids", verdict.triggered_rule_ids()},
               {"redaction_count", verdict.redactions.size()},
               {"trace", verdict.trace}};
        if (verdict.deciding_policy) j["deciding_policy"] = *verdict.deciding_policy;
        if (verdict.deciding_rule) j["deciding_rule"] = *verdict.deciding_rule;
        if (!resolutions.empty()) j["resolutions"] = resolutions;
        if (!excluded.empty()) j["excluded_policies"] = std::vector<std::string>(excluded.begin(), excluded.end());
        return j;
    }
};

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)), reviews_(options_.review_capacity) {
    if (!options_.clock) options_.clock = system_clock_ms();
    if (!options_.mock_upstream) options_.mock_upstream = std::make_shared<MockUpstream>();
    if (!options_.live_upstream) options_.live_upstream = std::make_shared<HttpUpstream>();
    if (!options_.notifier) {
        options_.notifier = [](const std::string& msg) { spdlog::warn("policy notification: {}", msg); };
    }
    audit_ = std::make_unique<AuditLog>(options_.audit_path);
}

Gateway::~Gateway() = default;

void Gateway::load(std::shared_ptr<const Deployment> deployment) {
    std::lock_guard lock(deployment_mu_);
    deployment_ = std::move(deployment);
}

std::shared_ptr<const Deployment> Gateway::deployment() const {
    std::lock_guard lock(deployment_mu_);
    return deployment_;
}

std::shared_ptr<std::mutex> Gateway::session_mutex(const std::string& session_id) {
    std::lock_guard lock(sessions_mu_);
    auto& m = session_locks_[session_id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

Upstream& Gateway::upstream_for(const Assistant& assistant) {
    return assistant.upstream.mode == UpstreamMode::Mock ? *options_.mock_upstream : *options_.live_upstream;
}

Gateway::SideResult Gateway::evaluate_side(const Exchange& ex, Direction direction,
                                           const std::vector<std::string>& texts,
                                           const std::set<std::string>& excluded, bool resolve_conflicts) const {
    SideResult out;
    out.excluded = excluded;
    for (const std::string& text : texts) {
        GuardedVerdict g = evaluate_guarded(*ex.deployment, *ex.assistant, direction, text, ex.context, excluded,
                                            resolve_conflicts);
        if (g.unresolved) {
            out.unresolved = std::move(g.unresolved);
            return out;
        }
        if (g.resolution) out.resolutions.push_back(std::move(*g.resolution));
        Verdict& v = g.verdict;
        out.transformed.push_back(v.transformed_text.value_or(text));
        if (v.action > out.verdict.action) {
            out.verdict.action = v.action;
            out.verdict.deciding_policy = v.deciding_policy;
            out.verdict.deciding_rule = v.deciding_rule;
        }
        std::move(v.findings.begin(), v.findings.end(), std::back_inserter(out.verdict.findings));
        std::move(v.trace.begin(), v.trace.end(), std::back_inserter(out.verdict.trace));
        std::move(v.redactions.begin(), v.redactions.end(), std::back_inserter(out.verdict.redactions));
        out.excluded.insert(g.losers.begin(), g.losers.end());
    }
    return out;
}

AuditRecord Gateway::audit_side(const Exchange& ex, Direction direction, Action action,
                                std::vector<std::string> triggered, std::size_t redactions, bool upstream_called,
                                std::optional<std::string> review_id, std::string note) {
    AuditRecord r;
    r.timestamp_ms = options_.clock();
    r.session_id = ex.session_id;
    r.direction = std::string(to_string(direction));
    r.assistant_id = ex.assistant ? ex.assistant->id : std::string{};
    r.verdict_action = std::string(to_string(action));
    r.triggered_rule_ids = std::move(triggered);
    r.redaction_count = redactions;
    r.upstream_called = upstream_called;
    r.review_id = std::move(review_id);
    r.note = std::move(note);
    return audit_->append(std::move(r));
}

GatewayResponse Gateway::completion(const Exchange& ex, const std::string& content, const json& guardrails) const {
    json body{{"id", "chatcmpl-gg-" + std::to_string(next_completion_id_++)},
              {"object", "chat.completion"},
              {"model", ex.model},
              {"choices", json::array({json{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})},
              {"guardrails", guardrails}};
    return {200, std::move(body)};
}

GatewayResponse Gateway::refusal(const Exchange& ex, const std::string& message, const json& guardrails) const {
    GatewayResponse r = completion(ex, message, guardrails);
    r.body["choices"][0]["finish_reason"] = "content_filter";
    return r;
}

GatewayResponse Gateway::hold(Exchange ex, Direction stage, std::string reply, const SideResult& side,
                              ReviewReason reason, std::optional<ConflictSnapshot> conflict, const std::string& detail,
                              const std::string& fingerprint) {
    const std::int64_t now = options_.clock();
    ReviewItem item;
    try {
        item = reviews_.escalate(ex.session_id, ex.assistant->id, reason, conflict, detail, fingerprint, now);
    } catch (const Error& e) {
        audit_side(ex, stage, Action::Block, side.verdict.triggered_rule_ids(), side.verdict.redactions.size(),
                   stage == Direction::Output, std::nullopt, "review queue unavailable");
        return error_response(e);
    }
    audit_side(ex, stage, Action::Escalate, side.verdict.triggered_rule_ids(), side.verdict.redactions.size(),
               stage == Direction::Output, item.id, std::string(to_string(reason)));

    json guardrails{{"status", "pending_review"},
                    {"review_id", item.id},
                    {"session_id", ex.session_id},
                    {"reason", to_string(reason)},
                    {"stage", to_string(stage)}};
    if (conflict) guardrails["conflict"] = *conflict;
    if (stage == Direction::Output) guardrails["input"] = ex.input_summary;

    auto held = std::make_unique<Held>();
    held->exchange = std::move(ex);
    held->stage = stage;
    held->reply = std::move(reply);
    held->conflict = std::move(conflict);
    held->reason = reason;
    held->created_at = now;
    {
        std::lock_guard lock(held_mu_);
        held_[item.id] = std::move(held);
    }
    return {202, json{{"object", "guardrails.pending"}, {"guardrails", std::move(guardrails)}}};
}

GatewayResponse Gateway::run_input(Exchange ex, const std::set<std::string>& excluded, bool resumed,
                                   std::optional<std::string> review_id) {
    const Assistant& assistant = *ex.assistant;
    std::vector<std::string> texts;
    for (const auto& m : ex.messages) texts.push_back(m.content);

    SideResult side = evaluate_side(ex, Direction::Input, texts, excluded, !resumed);
    if (side.unresolved) {
        const std::string fp = conflict_fingerprint(*side.unresolved);
        auto snap = side.unresolved;
        return hold(std::move(ex), Direction::Input, {}, side, ReviewReason::Conflict, std::move(snap),
                    "guardrail conflict could not be resolved automatically", fp);
    }
    Action action = side.verdict.action;
    if (resumed && action == Action::Escalate) action = Action::Warn;
    ex.input_summary = side.summary(action);
    const std::string policy_id = side.verdict.deciding_policy.value_or("");
    const std::string rule_id = side.verdict.deciding_rule.value_or("");

    if (!resumed && action >= Action::Warn) {
        const std::int64_t now = options_.clock();
        const auto state = restrictions_.record_violation(ex.session_id, action, now, assistant.actions.escalation);
        if (state.triggered_now) {
            ex.input_summary["restriction"] = to_string(state.kind);
            if (state.kind == RestrictionKind::HumanReview) {
                try {
                    const auto item = reviews_.escalate(ex.session_id, assistant.id, ReviewReason::RepeatViolation,
                                                        std::nullopt, "repeated policy violations",
                                                        "repeat-violation", now);
                    ex.input_summary["restriction_review_id"] = item.id;
                } catch (const Error& e) {
                    spdlog::error("could not file repeat-violation review: {}", e.what());
                }
            }
        }
    }

    if (action == Action::Block) {
        const std::string message = render_template(assistant.actions.block.message, policy_id, rule_id);
        audit_side(ex, Direction::Input, action, side.verdict.triggered_rule_ids(), side.verdict.redactions.size(),
                   false, review_id, "");
        if (assistant.actions.block.notify) {
            options_.notifier("session " + ex.session_id + ": input blocked by " + policy_id + "/" + rule_id);
        }
        if (assistant.actions.block.log) {
            spdlog::info("blocked input session={} assistant={} policy={} rule={}", ex.session_id, assistant.id,
                         policy_id, rule_id);
        }
        json guardrails{{"status", "blocked"}, {"session_id", ex.session_id}, {"input", ex.input_summary}};
        if (review_id) guardrails["review_id"] = *review_id;
        return refusal(ex, message, guardrails);
    }
    if (action == Action::Escalate) {
        return hold(std::move(ex), Direction::Input, {}, side, ReviewReason::Escalation, std::nullopt,
                    "rule '" + rule_id + "' of policy '" + policy_id + "' requested human review",
                    "escalation|input|" + policy_id + "|" + rule_id);
    }
    if (action == Action::Warn) {
        ex.warnings.push_back(render_template(assistant.actions.warn_message, policy_id, rule_id));
    }

    for (std::size_t i = 0; i < ex.messages.size(); ++i) ex.messages[i].content = side.transformed[i];
    audit_side(ex, Direction::Input, action, side.verdict.triggered_rule_ids(), side.verdict.redactions.size(), true,
               review_id, "");

    ChatRequest upstream_request;
    upstream_request.model = !assistant.upstream.model.empty() ? assistant.upstream.model
                             : !ex.model.empty()              ? ex.model
                                                              : std::string("default");
    if (!assistant.system_prompt.empty()) upstream_request.messages.push_back({"system", assistant.system_prompt});
    upstream_request.messages.insert(upstream_request.messages.end(), ex.messages.begin(), ex.messages.end());

    UpstreamReply reply;
    try {
        reply = upstream_for(assistant).complete(upstream_request, assistant.upstream);
    } catch (const Error& e) {
        spdlog::error("upstream failure session={} assistant={}: {}", ex.session_id, assistant.id, e.what());
        return error_response(e);
    }
    return run_output(std::move(ex), std::move(reply.content), {}, false, std::nullopt);
}

GatewayResponse Gateway::run_output(Exchange ex, std::string reply, const std::set<std::string>& excluded,
                                    bool resumed, std::optional<std::string> review_id) {
    const Assistant& assistant = *ex.assistant;
    SideResult side = evaluate_side(ex, Direction::Output, {reply}, excluded, !resumed);
    if (side.unresolved) {
        const std::string fp = conflict_fingerprint(*side.unresolved);
        auto snap = side.unresolved;
        return hold(std::move(ex), Direction::Output, std::move(reply), side, ReviewReason::Conflict,
                    std::move(snap), "guardrail conflict could not be resolved automatically", fp);
    }
    Action action = side.verdict.action;
    if (resumed && action == Action::Escalate) action = Action::Warn;
    const json output_summary = side.summary(action);
    const std::string policy_id = side.verdict.deciding_policy.value_or("");
    const std::string rule_id = side.verdict.deciding_rule.value_or("");

    json guardrails{{"session_id", ex.session_id}, {"input", ex.input_summary}, {"output", output_summary}};
    if (review_id) guardrails["review_id"] = *review_id;

    if (action == Action::Block) {
        audit_side(ex, Direction::Output, action, side.verdict.triggered_rule_ids(), side.verdict.redactions.size(),
                   true, review_id, "");
        if (assistant.actions.block.notify) {
            options_.notifier("session " + ex.session_id + ": output blocked by " + policy_id + "/" + rule_id);
        }
        guardrails["status"] = "blocked";
        guardrails["warnings"] = ex.warnings;
        return refusal(ex, render_template(assistant.actions.block.message, policy_id, rule_id), guardrails);
    }
    if (action == Action::Escalate) {
        return hold(std::move(ex), Direction::Output, std::move(reply), side, ReviewReason::Escalation, std::nullopt,
                    "rule '" + rule_id + "' of policy '" + policy_id + "' requested human review",
                    "escalation|output|" + policy_id + "|" + rule_id);
    }
    if (action == Action::Warn) {
        ex.warnings.push_back(render_template(assistant.actions.warn_message, policy_id, rule_id));
    }
    audit_side(ex, Direction::Output, action, side.verdict.triggered_rule_ids(), side.verdict.redactions.size(), true,
               review_id, "");
    guardrails["status"] = "completed";
    guardrails["warnings"] = ex.warnings;
    return completion(ex, side.transformed.front(), guardrails);
}

GatewayResponse Gateway::handle_chat(const ChatCall& call) {
    auto dep = deployment();
    if (!dep) return error_response(Error(ErrorCode::ConfigNotLoaded, "no assistant configuration loaded"));
    const Assistant* assistant = call.assistant_id.empty() ? &dep->assistants.front() : dep->find(call.assistant_id);
    if (assistant == nullptr) {
        return error_response(Error(ErrorCode::UnknownAssistant, "unknown assistant '" + call.assistant_id + "'"));
    }

    ChatRequest request;
    try {
        request = chat_request_from_wire(call.body);
    } catch (const Error& e) {
        return error_response(e);
    }

    expire_held();
    const auto session_lock = session_mutex(call.session_id);
    std::lock_guard lock(*session_lock);

    Exchange ex;
    ex.deployment = dep;
    ex.assistant = assistant;
    ex.session_id = call.session_id;
    ex.context = call.context;
    ex.model = request.model;
    for (auto& m : request.messages) {
        // The configured system prompt replaces client-supplied ones.
        if (m.role == "system" && !assistant->system_prompt.empty()) continue;
        ex.messages.push_back(std::move(m));
    }

    const std::int64_t now = options_.clock();
    const auto restriction = restrictions_.state(call.session_id, now);
    if (restriction.kind != RestrictionKind::None) {
        audit_side(ex, Direction::Input, Action::Block, {}, 0, false, std::nullopt,
                   "restricted: " + std::string(to_string(restriction.kind)));
        json body = error_json(Error(ErrorCode::ValidationFailed, "session is restricted"));
        body["error"] = "SessionRestricted";
        body["restriction"] = to_string(restriction.kind);
        if (restriction.kind == RestrictionKind::TempBlock) body["retry_after_ms"] = restriction.until_ms - now;
        return {429, std::move(body)};
    }
    {
        std::lock_guard held_lock(held_mu_);
        for (const auto& [id, h] : held_) {
            if (h->exchange.session_id != call.session_id) continue;
            audit_side(ex, Direction::Input, Action::Block, {}, 0, false, id, "session held for review");
            return {409, json{{"error", "SessionHeld"},
                              {"message", "session has an interaction awaiting human review"},
                              {"review_id", id}}};
        }
    }
    return run_input(std::move(ex), {}, false, std::nullopt);
}

GatewayResponse Gateway::resolve_review(const std::string& review_id, const ReviewDecision& decision,
                                        const std::string& operator_id) {
    expire_held();
    const auto existing = reviews_.get(review_id);
    if (!existing) return error_response(Error(ErrorCode::UnknownReview, "unknown review '" + review_id + "'"));

    const auto session_lock = session_mutex(existing->session_id);
    std::lock_guard lock(*session_lock);

    if (decision.kind == ReviewDecision::Kind::Precedence) {
        bool known = false;
        if (existing->conflict) {
            const auto& ids = existing->conflict->policy_ids;
            known = std::find(ids.begin(), ids.end(), decision.policy_id) != ids.end();
        } else {
            std::lock_guard held_lock(held_mu_);
            if (const auto it = held_.find(review_id); it != held_.end()) {
                const Held& h = *it->second;
                const Policy* p = h.exchange.assistant->find_policy(decision.policy_id);
                known = p != nullptr && p->direction == h.stage;
            } else {
                known = existing->reason == ReviewReason::RepeatViolation;
            }
        }
        if (!known) {
            return error_response(ValidationError(std::vector<ValidationFinding>{{"/policy_id", "policy '" + decision.policy_id + "' is not part of this review"}}));
        }
    }

    const std::int64_t now = options_.clock();
    ReviewItem item;
    try {
        item = reviews_.resolve(review_id, decision, operator_id, now);
    } catch (const Error& e) {
        return error_response(e);
    }

    if (item.reason == ReviewReason::RepeatViolation) {
        if (decision.kind == ReviewDecision::Kind::Block) {
            int window = EscalationConfig{}.window_seconds;
            if (auto dep = deployment()) {
                if (const Assistant* a = dep->find(item.assistant_id)) window = a->actions.escalation.window_seconds;
            }
            restrictions_.temp_block(item.session_id, now + static_cast<std::int64_t>(window) * 1000);
        } else {
            restrictions_.clear(item.session_id);
        }
        return {200, json{{"review", item}, {"outcome", nullptr}}};
    }

    std::unique_ptr<Held> held;
    {
        std::lock_guard held_lock(held_mu_);
        if (const auto it = held_.find(review_id); it != held_.end()) {
            held = std::move(it->second);
            held_.erase(it);
        }
    }
    if (!held) return {200, json{{"review", item}, {"outcome", nullptr}}};

    Exchange ex = std::move(held->exchange);
    const Direction stage = held->stage;
    GatewayResponse outcome;
    if (decision.kind == ReviewDecision::Kind::Block) {
        audit_side(ex, stage, Action::Block, {}, 0, stage == Direction::Output, review_id, "operator block");
        json guardrails{{"status", "blocked"}, {"session_id", ex.session_id}, {"review_id", review_id}};
        outcome = refusal(ex, render_template(ex.assistant->actions.block.message, "human-review", ""), guardrails);
    } else {
        std::set<std::string> excluded;
        if (held->conflict) {
            for (const auto& id : held->conflict->policy_ids) {
                if (decision.kind == ReviewDecision::Kind::Allow || id != decision.policy_id) excluded.insert(id);
            }
        } else if (decision.kind == ReviewDecision::Kind::Precedence) {
            for (const Policy* p : ex.assistant->policies(stage)) {
                if (p->id != decision.policy_id) excluded.insert(p->id);
            }
        }
        outcome = stage == Direction::Input
                      ? run_input(std::move(ex), excluded, true, review_id)
                      : run_output(std::move(ex), std::move(held->reply), excluded, true, review_id);
    }
    {
        std::lock_guard held_lock(held_mu_);
        outcomes_[review_id] = json{{"status", outcome.status}, {"body", outcome.body}};
    }
    return {200, json{{"review", item}, {"outcome", {{"status", outcome.status}, {"body", outcome.body}}}}};
}

void Gateway::expire_held() { expire_held_locked(options_.clock()); }

void Gateway::expire_held_locked(std::int64_t now) {
    std::vector<std::unique_ptr<Held>> expired;
    std::vector<std::string> ids;
    {
        std::lock_guard lock(held_mu_);
        for (auto it = held_.begin(); it != held_.end();) {
            if (now - it->second->created_at >= options_.hold_ttl_ms) {
                ids.push_back(it->first);
                expired.push_back(std::move(it->second));
                it = held_.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        try {
            reviews_.resolve(ids[i], ReviewDecision{ReviewDecision::Kind::Block, {}}, "system:ttl", now);
        } catch (const Error&) {
            continue;
        }
        const Exchange& ex = expired[i]->exchange;
        audit_side(ex, expired[i]->stage, Action::Block, {}, 0, expired[i]->stage == Direction::Output, ids[i],
                   "hold expired");
        json guardrails{{"status", "blocked"}, {"session_id", ex.session_id}, {"review_id", ids[i]}};
        const auto outcome = refusal(ex, render_template(ex.assistant->actions.block.message, "human-review", ""),
                                     guardrails);
        std::lock_guard lock(held_mu_);
        outcomes_[ids[i]] = json{{"status", outcome.status}, {"body", outcome.body}};
    }
}

GatewayResponse Gateway::load_config(const json& doc, bool validate_only) {
    json report = nullptr;
    try {
        auto dep = std::make_shared<Deployment>(parse_deployment(doc, options_.config_base_dir));
        report = analyze_deployment(*dep);
        require_deployable(*dep);
        std::vector<std::string> ids;
        for (const auto& a : dep->assistants) ids.push_back(a.id);
        json body{{"valid", true}, {"loaded", !validate_only}, {"assistants", ids}, {"report", report},
                  {"lint", lint_deployment(*dep)}};
        if (!validate_only) load(std::move(dep));
        return {200, std::move(body)};
    } catch (const Error& e) {
        GatewayResponse r = error_response(e);
        r.body["report"] = report;
        return r;
    }
}

GatewayResponse Gateway::list_assistants() const {
    auto dep = deployment();
    if (!dep) return error_response(Error(ErrorCode::ConfigNotLoaded, "no assistant configuration loaded"));
    json list = json::array();
    for (const auto& a : dep->assistants) {
        json in = json::array();
        json out = json::array();
        for (const auto& p : a.input_policies) in.push_back(p.id);
        for (const auto& p : a.output_policies) out.push_back(p.id);
        list.push_back(json{{"id", a.id},
                            {"system_prompt", a.system_prompt},
                            {"conflict_strategy", to_string(a.conflict_strategy)},
                            {"upstream_mode", a.upstream.mode == UpstreamMode::Mock ? "mock" : "live"},
                            {"input_policies", std::move(in)},
                            {"output_policies", std::move(out)}});
    }
    return {200, json{{"schema_version", dep->schema_version}, {"assistants", std::move(list)}, {"config", dep->source}}};
}

GatewayResponse Gateway::analyze(const std::string& assistant_id) const {
    auto dep = deployment();
    if (!dep) return error_response(Error(ErrorCode::ConfigNotLoaded, "no assistant configuration loaded"));
    const Assistant* a = dep->find(assistant_id);
    if (a == nullptr) return error_response(Error(ErrorCode::UnknownAssistant, "unknown assistant '" + assistant_id + "'"));
    json body = static_conflict_analysis(*a, *dep);
    body["assistant_id"] = assistant_id;
    json contexts = json::array();
    for (const auto& c : dep->context_universe) contexts.push_back(context_json(c));
    body["context_universe"] = std::move(contexts);
    return {200, std::move(body)};
}

GatewayResponse Gateway::audit(const std::optional<std::string>& session_id) const {
    return {200, json{{"records", audit_->query(session_id)}}};
}

GatewayResponse Gateway::reviews(const std::optional<ReviewStatus>& status) const {
    return {200, json{{"reviews", reviews_.list(status)}}};
}

GatewayResponse Gateway::review(const std::string& review_id) const {
    const auto item = reviews_.get(review_id);
    if (!item) return error_response(Error(ErrorCode::UnknownReview, "unknown review '" + review_id + "'"));
    json outcome = nullptr;
    {
        std::lock_guard lock(held_mu_);
        if (const auto it = outcomes_.find(review_id); it != outcomes_.end()) outcome = it->second;
    }
    return {200, json{{"review", *item}, {"outcome", std::move(outcome)}}};
}

} // namespace guardgate
