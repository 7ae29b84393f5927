#pragma once

#include "guardgate/conflict.hpp"
#include "guardgate/rules.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace guardgate {

enum class Direction { Input, Output };

// Default evaluates Static, then NaturalLanguage, then Classifier rules
// (stable within a kind); Custom keeps the configured order.
enum class OrderMode { Default, Custom };

struct Policy {
    std::string id;
    Direction direction = Direction::Input;
    std::vector<CompiledRule> rules;
    OrderMode order = OrderMode::Default;
    EthicalVector ethical_vector;
    double weight = 1.0;
    int priority = 0;
    ContextSet context_tags;

    std::vector<const CompiledRule*> effective_order() const;
    bool active_in(const ContextSet& context) const;
    GuardrailHandle handle() const;
};

// Throws ValidationError listing every violated invariant (duplicate rule ids,
// non-positive weight, non-unit vector).
void validate_policy(const Policy& policy);

enum class RuleOutcome { NotEvaluated, Passed, Triggered };

struct TraceEntry {
    std::string policy_id;
    std::string rule_id;
    RuleKind kind = RuleKind::Static;
    bool evaluated = false;
    RuleOutcome outcome = RuleOutcome::NotEvaluated;
    Action action = Action::Allow;  // the rule's configured action

    bool operator==(const TraceEntry&) const = default;
};

struct Verdict {
    Action action = Action::Allow;
    std::vector<Finding> findings;  // one per evaluated rule, in evaluation order
    std::optional<std::string> transformed_text;
    std::vector<TraceEntry> trace;
    std::vector<MatchSpan> redactions;  // spans of triggered Redact-action rules
    // The rule that set the final action (first one to reach it).
    std::optional<std::string> deciding_policy;
    std::optional<std::string> deciding_rule;

    std::vector<std::string> triggered_rule_ids() const;
};

Verdict evaluate_policy(const Policy& policy, std::string_view text, const ContextSet& context = {});

// Policies run in ascending priority; a Block from any policy ends evaluation
// and later policies are traced as not evaluated. Throws MixedDirections.
Verdict evaluate_assistant_side(std::span<const Policy* const> policies, std::string_view text,
                                const ContextSet& context = {});

std::string_view to_string(Direction direction);
std::string_view to_string(OrderMode mode);
std::string_view to_string(RuleOutcome outcome);
std::optional<Direction> parse_direction(std::string_view s);

} // namespace guardgate
