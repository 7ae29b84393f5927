#include "guardgate/policy.hpp"

#include "guardgate/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace guardgate {

namespace {

void finalize_text(Verdict& v, std::string_view text) {
    if (v.action == Action::Redact || v.action == Action::Warn || v.action == Action::Escalate) {
        v.transformed_text = redact(text, v.redactions);
    } else {
        v.transformed_text.reset();
    }
}

void trace_unevaluated(const Policy& policy, std::vector<TraceEntry>& trace) {
    for (const CompiledRule* rule : policy.effective_order()) {
        trace.push_back(TraceEntry{policy.id, rule->id(), rule->kind(), false, RuleOutcome::NotEvaluated,
                                   rule->action()});
    }
}

// Evaluates `policy` into `acc`. Returns true when a Block stopped evaluation.
bool evaluate_into(const Policy& policy, std::string_view text, const ContextSet& context, Verdict& acc) {
    if (!policy.active_in(context)) {
        trace_unevaluated(policy, acc.trace);
        return false;
    }
    const auto order = policy.effective_order();
    bool blocked = false;
    for (const CompiledRule* rule : order) {
        TraceEntry entry{policy.id, rule->id(), rule->kind(), false, RuleOutcome::NotEvaluated, rule->action()};
        if (blocked) {
            acc.trace.push_back(std::move(entry));
            continue;
        }
        Finding finding = rule->evaluate(text);
        entry.evaluated = true;
        entry.outcome = finding.triggered ? RuleOutcome::Triggered : RuleOutcome::Passed;
        if (finding.triggered) {
            if (rule->action() == Action::Redact) {
                acc.redactions.insert(acc.redactions.end(), finding.spans.begin(), finding.spans.end());
            }
            if (rule->action() > acc.action) {
                acc.action = rule->action();
                acc.deciding_policy = policy.id;
                acc.deciding_rule = rule->id();
            }
            if (rule->action() == Action::Block) blocked = true;
        }
        acc.trace.push_back(std::move(entry));
        acc.findings.push_back(std::move(finding));
    }
    return blocked;
}

} // namespace

std::vector<const CompiledRule*> Policy::effective_order() const {
    std::vector<const CompiledRule*> out;
    out.reserve(rules.size());
    for (const auto& r : rules) out.push_back(&r);
    if (order == OrderMode::Default) {
        std::stable_sort(out.begin(), out.end(), [](const CompiledRule* a, const CompiledRule* b) {
            return static_cast<int>(a->kind()) < static_cast<int>(b->kind());
        });
    }
    return out;
}

bool Policy::active_in(const ContextSet& context) const {
    if (context_tags.empty()) return true;
    return std::any_of(context_tags.begin(), context_tags.end(),
                       [&](const std::string& t) { return context.contains(t); });
}

GuardrailHandle Policy::handle() const {
    return GuardrailHandle{id, ethical_vector, weight, priority, context_tags};
}

void validate_policy(const Policy& policy) {
    std::vector<ValidationFinding> findings;
    const std::string where = "policy '" + policy.id + "'";
    if (policy.id.empty()) findings.push_back({where, "policy id must be non-empty"});
    std::set<std::string> ids;
    for (const auto& r : policy.rules) {
        if (!ids.insert(r.id()).second) findings.push_back({where, "duplicate rule id '" + r.id() + "'"});
    }
    if (!(policy.weight > 0.0) || !std::isfinite(policy.weight)) {
        findings.push_back({where, "weight must be a positive finite number"});
    }
    double n2 = 0.0;
    for (double x : policy.ethical_vector.values()) n2 += x * x;
    if (policy.ethical_vector.empty() || std::abs(std::sqrt(n2) - 1.0) > 1e-9) {
        findings.push_back({where, "ethical vector must have unit norm"});
    }
    if (!findings.empty()) throw ValidationError(std::move(findings));
}

std::vector<std::string> Verdict::triggered_rule_ids() const {
    std::vector<std::string> ids;
    for (const auto& f : findings) {
        if (f.triggered) ids.push_back(f.rule_id);
    }
    return ids;
}

Verdict evaluate_policy(const Policy& policy, std::string_view text, const ContextSet& context) {
    Verdict v;
    evaluate_into(policy, text, context, v);
    finalize_text(v, text);
    return v;
}

Verdict evaluate_assistant_side(std::span<const Policy* const> policies, std::string_view text,
                                const ContextSet& context) {
    Verdict v;
    if (policies.empty()) return v;
    const Direction direction = policies.front()->direction;
    for (const Policy* p : policies) {
        if (p->direction != direction) {
            throw Error(ErrorCode::MixedDirections, "policy '" + p->id + "' has a different direction than '" +
                                                        policies.front()->id + "'");
        }
    }
    std::vector<const Policy*> ordered(policies.begin(), policies.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Policy* a, const Policy* b) { return a->priority < b->priority; });

    bool blocked = false;
    for (const Policy* p : ordered) {
        if (blocked) {
            trace_unevaluated(*p, v.trace);
            continue;
        }
        blocked = evaluate_into(*p, text, context, v);
    }
    finalize_text(v, text);
    return v;
}

std::string_view to_string(Direction direction) { return direction == Direction::Input ? "input" : "output"; }

std::string_view to_string(OrderMode mode) { return mode == OrderMode::Default ? "default" : "custom"; }

std::string_view to_string(RuleOutcome outcome) {
    switch (outcome) {
        case RuleOutcome::NotEvaluated: return "not_evaluated";
        case RuleOutcome::Passed:       return "passed";
        case RuleOutcome::Triggered:    return "triggered";
    }
    return "unknown";
}

std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "input") return Direction::Input;
    if (s == "output") return Direction::Output;
    return std::nullopt;
}

} // namespace guardgate
