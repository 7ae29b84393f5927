#include "guardgate/rules.hpp"

#include "guardgate/catalog.hpp"
#include "guardgate/error.hpp"
#include "guardgate/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace guardgate {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string format_score(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Occurrences of `words` as a contiguous token subsequence.
template <typename OnMatch>
void for_each_phrase_match(const std::vector<text::Token>& tokens, const std::vector<std::string>& words,
                           OnMatch&& on_match) {
    if (words.empty() || words.size() > tokens.size()) return;
    for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
        bool hit = true;
        for (std::size_t k = 0; k < words.size(); ++k) {
            if (tokens[i + k].norm != words[k]) {
                hit = false;
                break;
            }
        }
        if (hit) on_match(tokens[i].start, tokens[i + words.size() - 1].end);
    }
}

void sort_spans(std::vector<MatchSpan>& spans) {
    std::sort(spans.begin(), spans.end(), [](const MatchSpan& a, const MatchSpan& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.end != b.end) return a.end < b.end;
        return a.rule_id < b.rule_id;
    });
    spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
}

} // namespace

MatchSpan make_span(std::string_view text, std::size_t start, std::size_t end, std::string rule_id) {
    if (!(start < end && end <= text.size())) {
        throw Error(ErrorCode::SpanOutOfBounds, "span [" + std::to_string(start) + "," + std::to_string(end) +
                                                    ") invalid for text of length " +
                                                    std::to_string(text.size()));
    }
    if (!text::is_char_boundary(text, start) || !text::is_char_boundary(text, end)) {
        throw Error(ErrorCode::SpanOutOfBounds, "span [" + std::to_string(start) + "," + std::to_string(end) +
                                                    ") splits a UTF-8 character");
    }
    return MatchSpan{start, end, std::move(rule_id), std::string(text.substr(start, end - start))};
}

Lexicon parse_lexicon(std::string_view content) {
    Lexicon lex;
    std::size_t line_no = 0;
    std::istringstream in{std::string(content)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t tab = line.rfind('\t');
        if (tab == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "lexicon line " + std::to_string(line_no) + ": expected term<TAB>weight");
        }
        const std::string_view term = trim(line.substr(0, tab));
        const std::string_view weight_text = trim(line.substr(tab + 1));
        double weight = 0.0;
        const auto [ptr, ec] = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), weight);
        if (ec != std::errc{} || ptr != weight_text.data() + weight_text.size() || !std::isfinite(weight) ||
            weight < -1.0 || weight > 1.0) {
            throw Error(ErrorCode::ParseError,
                        "lexicon line " + std::to_string(line_no) + ": weight must be a decimal in [-1,1]");
        }
        auto words = text::words(term);
        if (words.empty()) {
            throw Error(ErrorCode::ParseError, "lexicon line " + std::to_string(line_no) + ": term has no words");
        }
        lex.entries.push_back(LexiconEntry{std::string(term), std::move(words), weight});
    }
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open lexicon " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str());
}

void validate_rule_spec(const RuleSpec& spec) {
    if (spec.id.empty()) throw Error(ErrorCode::InvalidRuleSpec, "rule id must be non-empty");
    if (spec.severity < 1 || spec.severity > 10) {
        throw Error(ErrorCode::InvalidRuleSpec, "rule '" + spec.id + "': severity must be within 1..10");
    }
    if (spec.action == Action::Allow) {
        throw Error(ErrorCode::InvalidRuleSpec, "rule '" + spec.id + "': action must be redact, warn, escalate or block");
    }
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, StaticBody>) {
                if (body.builtin.has_value() == body.pattern.has_value()) {
                    throw Error(ErrorCode::InvalidRuleSpec,
                                "rule '" + spec.id + "': static rule needs exactly one of builtin or pattern");
                }
            } else {
                if (!in_unit_interval(body.threshold)) {
                    throw Error(ErrorCode::InvalidRuleSpec, "rule '" + spec.id + "': threshold must be within [0,1]");
                }
            }
        },
        spec.body);
}

CompiledRule compile_rule(const RuleSpec& spec, const RuleResources& resources) {
    validate_rule_spec(spec);
    CompiledRule rule;
    rule.spec_ = spec;

    if (const auto* body = std::get_if<StaticBody>(&spec.body)) {
        CompiledRule::StaticImpl impl;
        if (body->builtin) {
            const auto source = find_builtin_pattern(*body->builtin);
            if (!source) {
                throw Error(ErrorCode::UnknownBuiltinPattern,
                            "rule '" + spec.id + "': unknown builtin pattern '" + *body->builtin + "'");
            }
            impl.source = std::string(*source);
            impl.label = "builtin '" + *body->builtin + "'";
        } else {
            impl.source = *body->pattern;
            impl.label = "pattern";
        }
        try {
            impl.regex = std::regex(impl.source, std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw Error(ErrorCode::InvalidPattern, "rule '" + spec.id + "': invalid pattern: " + e.what());
        }
        rule.impl_ = std::move(impl);
    } else if (const auto* body = std::get_if<NaturalLanguageBody>(&spec.body)) {
        CompiledRule::NaturalLanguageImpl impl;
        impl.threshold = body->threshold;
        impl.intent = body->intent;
        for (const auto& phrase : body->keywords) {
            auto words = text::words(phrase);
            if (words.empty()) {
                throw Error(ErrorCode::InvalidRuleSpec,
                            "rule '" + spec.id + "': keyword '" + phrase + "' contains no words");
            }
            impl.phrases.push_back({phrase, std::move(words)});
        }
        if (body->lexicon) {
            const auto it = resources.lexicons.find(*body->lexicon);
            if (it == resources.lexicons.end() || !it->second) {
                throw Error(ErrorCode::UnknownLexicon,
                            "rule '" + spec.id + "': unknown lexicon '" + *body->lexicon + "'");
            }
            impl.lexicon = it->second;
        } else if (impl.phrases.empty()) {
            throw Error(ErrorCode::EmptyKeywordList,
                        "rule '" + spec.id + "': natural-language rule needs keywords or a lexicon");
        }
        rule.impl_ = std::move(impl);
    } else {
        const auto& body_c = std::get<ClassifierBody>(spec.body);
        const auto it = resources.models.find(body_c.model);
        if (it == resources.models.end() || !it->second) {
            throw Error(ErrorCode::UnknownModelReference,
                        "rule '" + spec.id + "': unknown classifier model '" + body_c.model + "'");
        }
        rule.impl_ = CompiledRule::ClassifierImpl{it->second, body_c.threshold};
    }
    return rule;
}

std::vector<MatchSpan> match_static(const CompiledRule& rule, std::string_view input) {
    const auto* impl = std::get_if<CompiledRule::StaticImpl>(&rule.impl_);
    if (impl == nullptr) throw Error(ErrorCode::InvalidRuleSpec, "rule '" + rule.id() + "' is not a static rule");

    const auto placeholders = text::placeholder_ranges(input);
    const auto touches_placeholder = [&](std::size_t s, std::size_t e) {
        return std::any_of(placeholders.begin(), placeholders.end(),
                           [&](const auto& r) { return s < r.second && r.first < e; });
    };

    std::vector<MatchSpan> spans;
    std::size_t last_end = 0;
    const char* begin = input.data();
    const char* end = input.data() + input.size();
    for (std::cregex_iterator it(begin, end, impl->regex), stop; it != stop; ++it) {
        const auto& m = *it;
        auto s = static_cast<std::size_t>(m.position(0));
        auto e = s + static_cast<std::size_t>(m.length(0));
        if (s == e) continue;
        // Widen byte-level matches to whole UTF-8 characters.
        while (!text::is_char_boundary(input, s)) --s;
        while (!text::is_char_boundary(input, e)) ++e;
        if (s < last_end || touches_placeholder(s, e)) continue;
        spans.push_back(make_span(input, s, e, rule.id()));
        last_end = e;
    }
    return spans;
}

Finding eval_natural_language(const CompiledRule& rule, std::string_view input) {
    const auto* impl = std::get_if<CompiledRule::NaturalLanguageImpl>(&rule.impl_);
    if (impl == nullptr) {
        throw Error(ErrorCode::InvalidRuleSpec, "rule '" + rule.id() + "' is not a natural-language rule");
    }
    const std::string masked = text::mask_placeholders(input);
    const auto tokens = text::tokenize(masked);

    Finding finding;
    finding.rule_id = rule.id();
    std::vector<std::string> hits;

    double keyword_score = 0.0;
    for (const auto& phrase : impl->phrases) {
        bool matched = false;
        for_each_phrase_match(tokens, phrase.words, [&](std::size_t s, std::size_t e) {
            finding.spans.push_back(make_span(input, s, e, rule.id()));
            matched = true;
        });
        if (matched) {
            keyword_score = 1.0;
            hits.push_back("keyword '" + phrase.phrase + "'");
        }
    }

    double lexicon_sum = 0.0;
    if (impl->lexicon) {
        for (const auto& entry : impl->lexicon->entries) {
            std::size_t count = 0;
            for_each_phrase_match(tokens, entry.words, [&](std::size_t s, std::size_t e) {
                lexicon_sum += entry.weight;
                ++count;
                if (entry.weight > 0) finding.spans.push_back(make_span(input, s, e, rule.id()));
            });
            if (count > 0) {
                hits.push_back("lexicon term '" + entry.term + "' x" + std::to_string(count) + " (" +
                               format_score(entry.weight) + ")");
            }
        }
    }
    const double lexicon_score = std::clamp(lexicon_sum, 0.0, 1.0);
    finding.score = std::max(keyword_score, lexicon_score);
    sort_spans(finding.spans);

    const bool over_threshold = finding.score >= impl->threshold;
    if (impl->intent == RuleIntent::Encourage) {
        finding.triggered = false;
        finding.spans.clear();
        finding.explanation = "encouragement rule recorded but not enforced";
        return finding;
    }
    finding.triggered = over_threshold;
    if (finding.triggered) {
        std::string joined;
        for (const auto& h : hits) {
            if (!joined.empty()) joined += ", ";
            joined += h;
        }
        finding.explanation = "score " + format_score(finding.score) + " >= threshold " +
                              format_score(impl->threshold) + (joined.empty() ? "" : ": " + joined);
    } else if (!hits.empty()) {
        finding.explanation = "score " + format_score(finding.score) + " below threshold " +
                              format_score(impl->threshold);
    }
    return finding;
}

Finding eval_classifier(const CompiledRule& rule, std::string_view input) {
    const auto* impl = std::get_if<CompiledRule::ClassifierImpl>(&rule.impl_);
    if (impl == nullptr) throw Error(ErrorCode::InvalidRuleSpec, "rule '" + rule.id() + "' is not a classifier rule");

    Finding finding;
    finding.rule_id = rule.id();
    finding.score = classifier::deny_probability(*impl->model, text::mask_placeholders(input));
    finding.triggered = finding.score >= impl->threshold;
    if (finding.triggered) {
        finding.explanation = "deny probability " + format_score(finding.score) + " >= threshold " +
                              format_score(impl->threshold);
        if (rule.action() == Action::Redact && !input.empty()) {
            finding.spans.push_back(make_span(input, 0, input.size(), rule.id()));
        }
    }
    return finding;
}

Finding CompiledRule::evaluate(std::string_view input) const {
    switch (kind()) {
        case RuleKind::Static: {
            Finding finding;
            finding.rule_id = id();
            finding.spans = match_static(*this, input);
            finding.triggered = !finding.spans.empty();
            finding.score = finding.triggered ? 1.0 : 0.0;
            if (finding.triggered) {
                const auto& impl = std::get<StaticImpl>(impl_);
                finding.explanation = std::to_string(finding.spans.size()) + " match(es) of " + impl.label;
            }
            return finding;
        }
        case RuleKind::NaturalLanguage: return eval_natural_language(*this, input);
        case RuleKind::Classifier:      return eval_classifier(*this, input);
    }
    return {};
}

std::string redact(std::string_view input, std::vector<MatchSpan> spans) {
    for (const auto& s : spans) {
        // Re-validates bounds and boundaries.
        (void)make_span(input, s.start, s.end, s.rule_id);
    }
    std::sort(spans.begin(), spans.end(), [](const MatchSpan& a, const MatchSpan& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.rule_id < b.rule_id;
    });

    std::string out;
    out.reserve(input.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < spans.size();) {
        const std::size_t group_start = spans[i].start;
        std::size_t group_end = spans[i].end;
        const std::string& id = spans[i].rule_id;
        std::size_t j = i + 1;
        while (j < spans.size() && spans[j].start <= group_end) {
            group_end = std::max(group_end, spans[j].end);
            ++j;
        }
        out.append(input.substr(cursor, group_start - cursor));
        out += text::placeholder(id);
        cursor = group_end;
        i = j;
    }
    out.append(input.substr(cursor));
    return out;
}

std::string_view to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::Static:          return "static";
        case RuleKind::NaturalLanguage: return "natural_language";
        case RuleKind::Classifier:      return "classifier";
    }
    return "unknown";
}

std::string_view to_string(Action action) {
    switch (action) {
        case Action::Allow:    return "allow";
        case Action::Redact:   return "redact";
        case Action::Warn:     return "warn";
        case Action::Escalate: return "escalate";
        case Action::Block:    return "block";
    }
    return "unknown";
}

std::string_view to_string(RuleIntent intent) { return intent == RuleIntent::Avoid ? "avoid" : "encourage"; }

std::optional<RuleKind> parse_rule_kind(std::string_view s) {
    if (s == "static") return RuleKind::Static;
    if (s == "natural_language") return RuleKind::NaturalLanguage;
    if (s == "classifier") return RuleKind::Classifier;
    return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) {
    if (s == "allow") return Action::Allow;
    if (s == "redact") return Action::Redact;
    if (s == "warn") return Action::Warn;
    if (s == "escalate") return Action::Escalate;
    if (s == "block") return Action::Block;
    return std::nullopt;
}

} // namespace guardgate
