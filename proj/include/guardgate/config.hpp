#pragma once

#include "guardgate/conflict.hpp"
#include "guardgate/error.hpp"
#include "guardgate/policy.hpp"
#include "guardgate/restriction.hpp"
#include "guardgate/review.hpp"
#include "guardgate/rules.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace guardgate {

inline constexpr int kConfigSchemaVersion = 1;

enum class UpstreamMode { Live, Mock };

struct UpstreamConfig {
    std::string base_url;
    UpstreamMode mode = UpstreamMode::Mock;
    int timeout_ms = 30000;
    // Name of the environment variable holding the bearer token (Live only).
    std::string auth_token_env;
    // Overrides the client's "model" field when non-empty.
    std::string model;
};

struct Assistant {
    std::string id;
    std::string system_prompt;
    std::vector<Policy> input_policies;
    std::vector<Policy> output_policies;
    ActionConfig actions;
    ResolutionMethod conflict_strategy = ResolutionMethod::Hybrid;
    bool allow_blocking_conflicts = false;
    UpstreamConfig upstream;

    std::vector<const Policy*> policies(Direction direction) const;
    const Policy* find_policy(std::string_view policy_id) const;
};

// A fully compiled configuration document. Immutable once built.
struct Deployment {
    int schema_version = kConfigSchemaVersion;
    std::shared_ptr<const AxisSpace> axes;
    ConflictThresholds thresholds;
    // Declared contexts plus one singleton per tag that appears on an axis or
    // policy; the universal context {} is implied.
    std::vector<ContextSet> context_universe;
    RuleResources resources;
    std::vector<Assistant> assistants;
    nlohmann::json source;

    const Assistant* find(std::string_view assistant_id) const;
};

// Throws ValidationError with one finding per problem. Relative lexicon and
// model paths resolve against `base_dir`.
Deployment parse_deployment(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

// Throws IoError / ParseError / ValidationError.
Deployment load_deployment(const std::filesystem::path& path);

// Classifies every same-direction policy pair of the assistant.
ConflictReport static_conflict_analysis(const Assistant& assistant, const Deployment& deployment);

ConflictReport analyze_deployment(const Deployment& deployment);

// Throws ValidationError naming each blocking finding.
void require_deployable(const Deployment& deployment);

// Non-fatal remarks about a valid config (e.g. non-enforcing rules).
std::vector<ValidationFinding> lint_deployment(const Deployment& deployment);

// One message through one side of an assistant, including automatic conflict
// resolution between opposed active policies that disagree on the text.
struct GuardedVerdict {
    Verdict verdict;
    std::optional<Resolution> resolution;
    std::set<std::string> losers;                // set aside by the resolution
    std::optional<ConflictSnapshot> unresolved;  // needs a human; verdict is empty
};

GuardedVerdict evaluate_guarded(const Deployment& deployment, const Assistant& assistant, Direction direction,
                                const std::string& text, const ContextSet& context,
                                const std::set<std::string>& excluded = {}, bool resolve_conflicts = true);

} // namespace guardgate
