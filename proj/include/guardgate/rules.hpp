#pragma once

#include "guardgate/classifier.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace guardgate {

enum class RuleKind { Static, NaturalLanguage, Classifier };

// Ordered by severity: Allow < Redact < Warn < Escalate < Block.
enum class Action { Allow = 0, Redact = 1, Warn = 2, Escalate = 3, Block = 4 };

// Natural-language rules can describe behavior to avoid or to encourage.
// Only avoidance is enforced; encouragement rules never trigger.
enum class RuleIntent { Avoid, Encourage };

struct StaticBody {
    // Exactly one of these is set.
    std::optional<std::string> builtin;
    std::optional<std::string> pattern;
};

struct NaturalLanguageBody {
    std::string description;
    std::vector<std::string> keywords;
    std::optional<std::string> lexicon;
    double threshold = 0.5;
    RuleIntent intent = RuleIntent::Avoid;
};

struct ClassifierBody {
    std::string model;
    double threshold = 0.5;
};

struct RuleSpec {
    std::string id;
    Action action = Action::Block;
    int severity = 5;
    std::variant<StaticBody, NaturalLanguageBody, ClassifierBody> body;

    RuleKind kind() const { return static_cast<RuleKind>(body.index()); }
};

struct MatchSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string rule_id;
    std::string excerpt;

    bool operator==(const MatchSpan&) const = default;
};

// Validates bounds and UTF-8 boundaries; throws SpanOutOfBounds.
MatchSpan make_span(std::string_view text, std::size_t start, std::size_t end, std::string rule_id);

struct Finding {
    std::string rule_id;
    bool triggered = false;
    double score = 0.0;
    std::vector<MatchSpan> spans;
    std::string explanation;

    bool operator==(const Finding&) const = default;
};

struct LexiconEntry {
    std::string term;
    std::vector<std::string> words;  // normalized
    double weight = 0.0;
};

struct Lexicon {
    std::vector<LexiconEntry> entries;
};

// `term<TAB>weight` per line, weight a decimal in [-1, 1]. Blank lines and
// lines starting with '#' are ignored.
Lexicon parse_lexicon(std::string_view content);
Lexicon load_lexicon(const std::filesystem::path& path);

// Named external resources a rule may reference.
struct RuleResources {
    std::map<std::string, std::shared_ptr<const Lexicon>, std::less<>> lexicons;
    std::map<std::string, std::shared_ptr<const classifier::ClassifierModel>, std::less<>> models;
};

// Checks id, severity, action and threshold ranges. Throws InvalidRuleSpec.
void validate_rule_spec(const RuleSpec& spec);

class CompiledRule {
public:
    const RuleSpec& spec() const { return spec_; }
    const std::string& id() const { return spec_.id; }
    RuleKind kind() const { return spec_.kind(); }
    Action action() const { return spec_.action; }

    // Kind-dispatching evaluation used by the policy engine.
    Finding evaluate(std::string_view text) const;

private:
    struct StaticImpl {
        std::string source;
        std::string label;  // "builtin 'ssn'" or "pattern"
        std::regex regex;
    };
    struct PhraseImpl {
        std::string phrase;
        std::vector<std::string> words;
    };
    struct NaturalLanguageImpl {
        std::vector<PhraseImpl> phrases;
        std::shared_ptr<const Lexicon> lexicon;
        double threshold = 0.5;
        RuleIntent intent = RuleIntent::Avoid;
    };
    struct ClassifierImpl {
        std::shared_ptr<const classifier::ClassifierModel> model;
        double threshold = 0.5;
    };

    CompiledRule() = default;

    RuleSpec spec_;
    std::variant<StaticImpl, NaturalLanguageImpl, ClassifierImpl> impl_;

    friend CompiledRule compile_rule(const RuleSpec&, const RuleResources&);
    friend std::vector<MatchSpan> match_static(const CompiledRule&, std::string_view);
    friend Finding eval_natural_language(const CompiledRule&, std::string_view);
    friend Finding eval_classifier(const CompiledRule&, std::string_view);
};

// Throws InvalidPattern, EmptyKeywordList, UnknownBuiltinPattern,
// UnknownModelReference, UnknownLexicon or InvalidRuleSpec.
CompiledRule compile_rule(const RuleSpec& spec, const RuleResources& resources = {});

// All non-overlapping leftmost matches in ascending order. Matches touching a
// redaction placeholder are dropped, so redacted text is never re-matched.
std::vector<MatchSpan> match_static(const CompiledRule& rule, std::string_view text);

// Score = max(1 if any keyword/phrase matches else 0, clamp(sum of matched
// lexicon weights, 0, 1)); matching is on NFKC-casefolded word tokens.
Finding eval_natural_language(const CompiledRule& rule, std::string_view text);

// Score = Deny probability. A triggered Redact-action classifier rule spans
// the whole message, since the model gives no localization.
Finding eval_classifier(const CompiledRule& rule, std::string_view text);

// Replaces each merged group of overlapping/adjacent spans with
// `[REDACTED:<ruleId>]`; the id is that of the earliest span (ties broken by
// the lexicographically smallest rule id). Throws SpanOutOfBounds.
std::string redact(std::string_view text, std::vector<MatchSpan> spans);

std::string_view to_string(RuleKind kind);
std::string_view to_string(Action action);
std::string_view to_string(RuleIntent intent);
std::optional<RuleKind> parse_rule_kind(std::string_view s);
std::optional<Action> parse_action(std::string_view s);

} // namespace guardgate
