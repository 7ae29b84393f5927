#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace guardgate {

using ContextSet = std::set<std::string, std::less<>>;

// Deployment-wide ordered list of ethical axes. An axis with tags is only
// "live" in contexts that contain at least one of its tags; untagged axes are
// always live.
struct AxisSpace {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> tags;  // parallel to names

    std::size_t dimension() const { return names.size(); }
    bool operator==(const AxisSpace&) const = default;

    static std::shared_ptr<const AxisSpace> make(std::vector<std::string> names,
                                                 std::vector<std::vector<std::string>> tags = {});
};

class EthicalVector {
public:
    EthicalVector() = default;

    // Scales `raw` to unit norm. Throws InvalidVector for zero/non-finite
    // input or dimension < 2, AxisMismatch when the size differs from the
    // axis list.
    static EthicalVector normalized(std::shared_ptr<const AxisSpace> space, std::vector<double> raw);

    const std::vector<double>& values() const { return values_; }
    const std::shared_ptr<const AxisSpace>& space() const { return space_; }
    std::size_t dimension() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

private:
    std::shared_ptr<const AxisSpace> space_;
    std::vector<double> values_;
};

struct ConflictThresholds {
    double epsilon = 1e-6;  // complete opposition: dot <= -1 + epsilon
    double theta = -0.8;    // limited disagreement: dot <= theta
    double delta = 1e-6;    // ethically blind: aggregate norm < delta
};

struct GuardrailHandle {
    std::string policy_id;
    EthicalVector vector;
    double weight = 1.0;
    int priority = 0;
    ContextSet context_tags;
};

// Throws AxisMismatch when the vectors live in different axis spaces.
double dot(const EthicalVector& a, const EthicalVector& b);

// Active iff the guardrail is untagged or shares a tag with `context`, and its
// vector keeps a non-zero component after axis masking.
std::optional<EthicalVector> mask_for_context(const EthicalVector& v, const ContextSet& context);

// Active guardrails for `context`, each carrying its masked, renormalized vector.
std::vector<GuardrailHandle> contextual_activation(const ContextSet& context,
                                                   std::span<const GuardrailHandle> guardrails);

enum class ConflictKind { NoConflict, Case1, Case2, Case3, Case4 };
enum class Variant { I, II, III };

struct ConflictCase {
    ConflictKind kind = ConflictKind::NoConflict;
    std::optional<Variant> variant;
    // Minimum context-wise dot (equals `min_dot`); NaN when the two guardrails
    // are never active together.
    double dot = 0.0;
    double min_dot = 0.0;
    double max_dot = 0.0;
    std::vector<ContextSet> contexts_where_opposed;  // dot <= theta
};

// Classification of a set of context-wise dot products.
ConflictKind classify_dots(std::span<const double> dots, const ConflictThresholds& th = {});

// The universal context {} is always considered in addition to `contexts`.
ConflictCase classify_pair(const GuardrailHandle& a, const GuardrailHandle& b,
                           std::span<const ContextSet> contexts, const ConflictThresholds& th = {});

// nullopt when no pair in the set is in complete opposition.
std::optional<Variant> detect_variant(std::span<const GuardrailHandle> active, const ConflictThresholds& th = {});

enum class ResolutionMethod { WeightedAverage, Precedence, Hybrid, Contextual, Human };

struct DirectionResult {
    EthicalVector direction;
};
struct WinnerResult {
    std::string policy_id;
};
struct EthicallyBlind {};
struct PendingHuman {
    std::string review_id;
};

struct Resolution {
    ResolutionMethod method = ResolutionMethod::WeightedAverage;
    std::variant<DirectionResult, WinnerResult, EthicallyBlind, PendingHuman> result;
    std::optional<std::string> alert;

    bool is_direction() const { return std::holds_alternative<DirectionResult>(result); }
    bool is_winner() const { return std::holds_alternative<WinnerResult>(result); }
    bool is_blind() const { return std::holds_alternative<EthicallyBlind>(result); }
    bool is_pending() const { return std::holds_alternative<PendingHuman>(result); }
};

inline constexpr std::string_view kConstrainedGuidanceAlert =
    "opposing guardrails cancel out; constrained ethical guidance in effect, highest-precedence guardrail applied";

Resolution weighted_average(std::span<const GuardrailHandle> guardrails, const ConflictThresholds& th = {});

// Throws DuplicatePriority.
Resolution precedence_resolve(std::span<const GuardrailHandle> guardrails);

Resolution hybrid_resolve(std::span<const GuardrailHandle> guardrails, const ConflictThresholds& th = {});

// Activates guardrails for `context`; a single survivor wins outright,
// otherwise the masked vectors are averaged. EthicallyBlind when nothing
// survives or the average cancels out.
Resolution contextual_resolve(const ContextSet& context, std::span<const GuardrailHandle> guardrails,
                              const ConflictThresholds& th = {});

// Which policy's verdict governs after a resolution: the winner, or for a
// direction the guardrail with the largest dot (ties to lower priority value).
std::optional<std::string> governing_policy(const Resolution& resolution,
                                            std::span<const GuardrailHandle> guardrails);

enum class FindingSeverity { Info, Warning, Blocking };

struct PairFinding {
    std::string direction;
    std::string policy_a;
    std::string policy_b;
    ConflictCase conflict;
    FindingSeverity severity = FindingSeverity::Info;
    bool overridden = false;  // Case1 downgraded by the config override flag
};

struct VariantScenario {
    std::string direction;
    ContextSet context;
    std::vector<std::string> active;
    Variant variant = Variant::I;
};

struct ConflictReport {
    std::vector<PairFinding> findings;
    std::vector<VariantScenario> scenarios;

    std::size_t count(FindingSeverity severity) const;
    // 0 clean, 1 warnings only, 2 blocking findings.
    int exit_status() const;
};

// Classifies every unordered pair within `guardrails` over `{} ∪ contexts`
// and predicts a variant for each context's active set. Appends to `report`.
void analyze_guardrails(std::string_view direction, std::span<const GuardrailHandle> guardrails,
                        std::span<const ContextSet> contexts, const ConflictThresholds& th,
                        bool allow_blocking, ConflictReport& report);

std::string_view to_string(ConflictKind kind);
std::string_view to_string(Variant variant);
std::string_view to_string(ResolutionMethod method);
std::string_view to_string(FindingSeverity severity);
std::optional<ResolutionMethod> parse_resolution_method(std::string_view s);

} // namespace guardgate
