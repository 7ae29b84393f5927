#include "guardgate/error.hpp"
#include "guardgate/rules.hpp"
#include "guardgate/text.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace guardgate;
using gg_test::builtin_rule;
using gg_test::keyword_rule;
using gg_test::static_rule;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

// ---- independent email recognizer, used by the brute-force scan oracle ----

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_email(std::string_view s) {
    const auto at = s.find('@');
    if (at == std::string_view::npos || at == 0 || s.find('@', at + 1) != std::string_view::npos) return false;
    for (char c : s.substr(0, at)) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && std::string_view("._%+-").find(c) == std::string_view::npos)
            return false;
    }
    std::vector<std::string_view> labels;
    std::string_view domain = s.substr(at + 1);
    for (std::size_t pos = 0;;) {
        const auto dot = domain.find('.', pos);
        labels.push_back(domain.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    if (labels.size() < 2) return false;
    for (auto l : labels) {
        if (l.empty()) return false;
        for (char c : l) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') return false;
        }
    }
    const auto tld = labels.back();
    return tld.size() >= 2 && std::all_of(tld.begin(), tld.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

bool boundary(std::string_view t, std::size_t i) {
    const bool before = i > 0 && is_word(t[i - 1]);
    const bool after = i < t.size() && is_word(t[i]);
    return before != after;
}

// Leftmost, then longest, non-overlapping substrings that are emails with a
// word boundary on each side.
std::vector<std::pair<std::size_t, std::size_t>> email_oracle(std::string_view t) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < t.size()) {
        std::size_t best = 0;
        for (std::size_t j = t.size(); j > i; --j) {
            if (boundary(t, i) && boundary(t, j) && is_email(t.substr(i, j - i))) {
                best = j;
                break;
            }
        }
        if (best) {
            out.emplace_back(i, best);
            i = best;
        } else {
            ++i;
        }
    }
    return out;
}

// ---- interval-merge oracle for redact(): a per-byte coverage mask ----

std::string redact_oracle(const std::string& text, const std::vector<MatchSpan>& spans) {
    std::vector<bool> covered(text.size(), false);
    for (const auto& s : spans) {
        for (auto k = s.start; k < s.end; ++k) covered[k] = true;
    }
    std::string out;
    std::size_t k = 0;
    while (k < text.size()) {
        if (!covered[k]) {
            out += text[k++];
            continue;
        }
        const std::size_t run_start = k;
        while (k < text.size() && covered[k]) ++k;
        // spans touching the run; adjacency merges because the mask is contiguous
        std::optional<std::pair<std::size_t, std::string>> first;
        for (const auto& s : spans) {
            if (s.start >= run_start && s.end <= k) {
                const std::pair<std::size_t, std::string> key{s.start, s.rule_id};
                if (!first || key < *first) first = key;
            }
        }
        out += "[REDACTED:" + first->second + "]";
    }
    return out;
}

} // namespace

TEST(CompileRule, Errors) {
    EXPECT_EQ(code_of([] { compile_rule(static_rule("r", Action::Block, "(")); }), ErrorCode::InvalidPattern);
    EXPECT_EQ(code_of([] { compile_rule(keyword_rule("r", Action::Block, {})); }), ErrorCode::EmptyKeywordList);
    EXPECT_EQ(code_of([] { compile_rule(builtin_rule("r", Action::Redact, "passport")); }),
              ErrorCode::UnknownBuiltinPattern);
    RuleSpec c;
    c.id = "clf";
    c.body = ClassifierBody{"missing-model", 0.5};
    EXPECT_EQ(code_of([&] { compile_rule(c); }), ErrorCode::UnknownModelReference);
    RuleSpec bad = keyword_rule("r", Action::Block, {"x"}, 1.5);
    EXPECT_EQ(code_of([&] { compile_rule(bad); }), ErrorCode::InvalidRuleSpec);
    RuleSpec sev = keyword_rule("r", Action::Block, {"x"});
    sev.severity = 11;
    EXPECT_EQ(code_of([&] { compile_rule(sev); }), ErrorCode::InvalidRuleSpec);
    RuleSpec noid = keyword_rule("", Action::Block, {"x"});
    EXPECT_EQ(code_of([&] { compile_rule(noid); }), ErrorCode::InvalidRuleSpec);
}

TEST(MatchStatic, SsnExamples) {
    const auto rule = compile_rule(builtin_rule("ssn", Action::Redact, "ssn"));
    const std::string text = "my ssn is 123-45-6789.";
    const auto spans = match_static(rule, text);
    ASSERT_EQ(spans.size(), 1u);
    EXPECT_EQ(spans[0].excerpt, "123-45-6789");
    EXPECT_EQ(spans[0].start, text.find("123"));
    EXPECT_EQ(spans[0].end, spans[0].start + 11);
    EXPECT_EQ(spans[0].rule_id, "ssn");
    EXPECT_TRUE(match_static(rule, "").empty());
    // word boundaries: embedded in a longer digit run is not an ssn
    EXPECT_TRUE(match_static(rule, "9123-45-67890").empty());
}

TEST(MatchStatic, TwoEmailsAscending) {
    const auto rule = compile_rule(builtin_rule("email", Action::Redact, "email"));
    const std::string text = "a@b.com and c@d.org";
    const auto spans = match_static(rule, text);
    const auto expected = email_oracle(text);
    ASSERT_EQ(expected.size(), 2u);
    ASSERT_EQ(spans.size(), expected.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        EXPECT_EQ(spans[i].start, expected[i].first);
        EXPECT_EQ(spans[i].end, expected[i].second);
    }
    EXPECT_EQ(spans[0].excerpt, "a@b.com");
    EXPECT_EQ(spans[1].excerpt, "c@d.org");
}

TEST(MatchStatic, EmailAgreesWithBruteForceOracleOnRandomText) {
    const auto rule = compile_rule(builtin_rule("email", Action::Redact, "email"));
    std::mt19937_64 rng(7);
    const std::string alphabet = "ab1._-@ +co";
    const std::vector<std::string> seeds = {"x@y.io", "first.last@mail.example.com", "a-b@c-d.ef", "q@w.e"};
    for (int iter = 0; iter < 3000; ++iter) {
        std::string t;
        const int len = static_cast<int>(rng() % 20);
        for (int i = 0; i < len; ++i) {
            if (rng() % 8 == 0) t += seeds[rng() % seeds.size()];
            else t += alphabet[rng() % alphabet.size()];
        }
        const auto spans = match_static(rule, t);
        const auto expected = email_oracle(t);
        ASSERT_EQ(spans.size(), expected.size()) << "text: '" << t << "'";
        for (std::size_t i = 0; i < spans.size(); ++i) {
            ASSERT_EQ(spans[i].start, expected[i].first) << t;
            ASSERT_EQ(spans[i].end, expected[i].second) << t;
        }
    }
}

TEST(MatchStatic, FuzzSpansDisjointSortedInBounds) {
    std::mt19937_64 rng(11);
    const std::vector<std::string> pieces = {"a", "Z", "7", " ", "-", "\xC3\xA9", "\xE2\x82\xAC", "\xF0\x9F\x98\x80",
                                             "[REDACTED:x]", "\n", "\xFF"};
    const std::vector<std::string> patterns = {".", "\\w+", "[^ ]{1,3}", "a|aZ", "\\d*", "(?:)", "-?7"};
    std::vector<CompiledRule> rules;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        rules.push_back(compile_rule(static_rule("p" + std::to_string(i), Action::Redact, patterns[i])));
    }
    for (int iter = 0; iter < 2000; ++iter) {
        std::string t;
        const int n = static_cast<int>(rng() % 16);
        for (int i = 0; i < n; ++i) t += pieces[rng() % pieces.size()];
        for (const auto& rule : rules) {
            const auto spans = match_static(rule, t);
            std::size_t last_end = 0;
            for (const auto& s : spans) {
                ASSERT_LT(s.start, s.end);
                ASSERT_LE(s.end, t.size());
                ASSERT_GE(s.start, last_end);
                ASSERT_TRUE(text::is_char_boundary(t, s.start));
                ASSERT_TRUE(text::is_char_boundary(t, s.end));
                ASSERT_EQ(s.excerpt, t.substr(s.start, s.end - s.start));
                ASSERT_EQ(s.excerpt.find("[REDACTED:"), std::string::npos);
                last_end = s.end;
            }
        }
    }
}

TEST(MatchStatic, Deterministic) {
    const auto a = compile_rule(builtin_rule("email", Action::Redact, "email"));
    const auto b = compile_rule(builtin_rule("email", Action::Redact, "email"));
    const std::string t = "x@y.io, z@w.org; v@u.net";
    EXPECT_EQ(match_static(a, t), match_static(b, t));
    EXPECT_EQ(a.evaluate(t), a.evaluate(t));
}

TEST(NaturalLanguage, Examples) {
    const auto religion = compile_rule(keyword_rule("topic", Action::Block, {"religion"}, 0.5));
    const auto hit = eval_natural_language(religion, "let's discuss RELIGION");
    EXPECT_EQ(text::nfkc_casefold("RELIGION"), text::nfkc_casefold("religion"));
    EXPECT_TRUE(hit.triggered);
    EXPECT_DOUBLE_EQ(hit.score, 1.0);
    EXPECT_FALSE(hit.explanation.empty());

    const auto miss = eval_natural_language(religion, "we discussed the weather");
    EXPECT_FALSE(miss.triggered);
    EXPECT_DOUBLE_EQ(miss.score, 0.0);

    const auto card = compile_rule(keyword_rule("cc", Action::Block, {"credit card"}));
    // tokenizer oracle: "creditcard" is one token, not the sequence [credit, card]
    EXPECT_NE(text::words("my creditcard"), (std::vector<std::string>{"my", "credit", "card"}));
    EXPECT_FALSE(eval_natural_language(card, "my creditcard").triggered);
    EXPECT_TRUE(eval_natural_language(card, "my Credit   CARD").triggered);
    EXPECT_FALSE(eval_natural_language(religion, "irreligion").triggered);
}

TEST(NaturalLanguage, LexiconScoreClampedSum) {
    RuleResources res;
    res.lexicons["mood"] = std::make_shared<Lexicon>(parse_lexicon("# mood\nawful\t0.4\nterrible\t0.5\nnice\t-0.3\n"));
    RuleSpec spec;
    spec.id = "mood";
    spec.action = Action::Warn;
    NaturalLanguageBody b;
    b.description = "negative mood";
    b.lexicon = "mood";
    b.threshold = 0.8;
    spec.body = b;
    const auto rule = compile_rule(spec, res);

    const auto one = eval_natural_language(rule, "awful day");
    EXPECT_NEAR(one.score, 0.4, 1e-12);
    EXPECT_FALSE(one.triggered);
    const auto two = eval_natural_language(rule, "awful and terrible");
    EXPECT_NEAR(two.score, 0.9, 1e-12);
    EXPECT_TRUE(two.triggered);
    EXPECT_NEAR(eval_natural_language(rule, "awful terrible terrible").score, 1.0, 1e-12);
    EXPECT_NEAR(eval_natural_language(rule, "nice nice").score, 0.0, 1e-12);
    EXPECT_NEAR(eval_natural_language(rule, "awful but nice").score, 0.1, 1e-12);
}

TEST(NaturalLanguage, LexiconParsing) {
    EXPECT_THROW(parse_lexicon("bad\t2.0\n"), Error);
    EXPECT_THROW(parse_lexicon("noweight\n"), Error);
    const auto lex = parse_lexicon("\n# c\nend it all\t0.8\n");
    ASSERT_EQ(lex.entries.size(), 1u);
    EXPECT_EQ(lex.entries[0].words, (std::vector<std::string>{"end", "it", "all"}));
}

TEST(NaturalLanguage, InvariantUnderCaseAndNfkc) {
    const auto rule = compile_rule(keyword_rule("k", Action::Block, {"secret plan", "religion"}));
    std::mt19937_64 rng(3);
    const std::vector<std::string> base = {"the secret plan is here", "talk about religion", "nothing to see",
                                           "secretplan", "plan secret"};
    for (const auto& s : base) {
        const auto reference = eval_natural_language(rule, s);
        for (int k = 0; k < 50; ++k) {
            std::string v = s;
            for (char& c : v) {
                if (rng() % 2) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
            const auto f = eval_natural_language(rule, v);
            EXPECT_EQ(f.triggered, reference.triggered) << v;
            EXPECT_EQ(f.score, reference.score) << v;
        }
        // fullwidth compatibility forms of ASCII letters (U+FF21.. / U+FF41..)
        std::string wide;
        for (char c : s) {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const char32_t cp = (std::islower(static_cast<unsigned char>(c)) ? 0xFF41 + (c - 'a') : 0xFF21 + (c - 'A'));
                wide += static_cast<char>(0xE0 | (cp >> 12));
                wide += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                wide += static_cast<char>(0x80 | (cp & 0x3F));
            } else {
                wide += c;
            }
        }
        const auto f = eval_natural_language(rule, wide);
        EXPECT_EQ(f.triggered, reference.triggered) << s;
        EXPECT_EQ(f.score, reference.score) << s;
    }
}

TEST(NaturalLanguage, EncourageRulesNeverTrigger) {
    RuleSpec spec = keyword_rule("kind", Action::Warn, {"please"});
    std::get<NaturalLanguageBody>(spec.body).intent = RuleIntent::Encourage;
    const auto rule = compile_rule(spec);
    EXPECT_FALSE(eval_natural_language(rule, "please help").triggered);
}

TEST(Redact, Examples) {
    const std::string t = "ssn 123-45-6789 ok";
    const auto span = make_span(t, 4, 15, "pii.ssn");
    EXPECT_EQ(redact(t, {span}), "ssn [REDACTED:pii.ssn] ok");
    EXPECT_EQ(redact(t, {}), t);

    const std::string u = "0123456789AB";
    const std::vector<MatchSpan> overlap = {make_span(u, 2, 6, "a"), make_span(u, 4, 9, "b")};
    EXPECT_EQ(redact(u, overlap), redact_oracle(u, overlap));
    EXPECT_EQ(redact(u, overlap), "01[REDACTED:a]9AB");
}

TEST(Redact, SpanValidation) {
    EXPECT_THROW(make_span("abc", 1, 5, "r"), Error);
    EXPECT_THROW(make_span("abc", 2, 2, "r"), Error);
    EXPECT_THROW(make_span("a\xC3\xA9", 0, 2, "r"), Error);
    MatchSpan forged{0, 99, "r", "x"};
    EXPECT_THROW(redact("abc", {forged}), Error);
}

TEST(Redact, AgreesWithIntervalMergeOracle) {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 3000; ++iter) {
        const std::size_t n = 1 + rng() % 20;
        std::string t;
        for (std::size_t i = 0; i < n; ++i) t += static_cast<char>('a' + rng() % 26);
        std::vector<MatchSpan> spans;
        const int k = static_cast<int>(rng() % 5);
        for (int i = 0; i < k; ++i) {
            const std::size_t s = rng() % n;
            const std::size_t e = s + 1 + rng() % (n - s);
            spans.push_back(make_span(t, s, e, std::string(1, static_cast<char>('p' + rng() % 4))));
        }
        ASSERT_EQ(redact(t, spans), redact_oracle(t, spans)) << t;
    }
}

TEST(Redact, SoundnessAndIdempotenceWithSeededPii) {
    const auto ssn = compile_rule(builtin_rule("pii.ssn", Action::Redact, "ssn"));
    const auto email = compile_rule(builtin_rule("pii.email", Action::Redact, "email"));
    const auto shouty = compile_rule(static_rule("caps", Action::Redact, "[A-Z]{4,}"));
    std::mt19937_64 rng(99);
    const std::vector<std::string> filler = {"hello", "my", "number", "is", "and", "REDACTED", "mail", ":", ","};
    for (int iter = 0; iter < 500; ++iter) {
        std::string t;
        std::vector<std::string> seeded;
        const int n = 3 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            const auto r = rng() % 5;
            if (r == 0) {
                seeded.push_back(gg_test::digits(rng, 3) + "-" + gg_test::digits(rng, 2) + "-" + gg_test::digits(rng, 4));
                t += seeded.back();
            } else if (r == 1) {
                seeded.push_back("user" + gg_test::digits(rng, 3) + "@example.org");
                t += seeded.back();
            } else {
                t += filler[rng() % filler.size()];
            }
            t += ' ';
        }
        std::vector<MatchSpan> spans = match_static(ssn, t);
        const auto e = match_static(email, t);
        spans.insert(spans.end(), e.begin(), e.end());
        const std::string once = redact(t, spans);
        for (const auto& s : seeded) ASSERT_EQ(once.find(s), std::string::npos) << t;
        for (const auto& s : spans) ASSERT_EQ(once.find(s.excerpt), std::string::npos);

        // placeholders are never re-matched, so a second pass is a no-op
        std::vector<MatchSpan> again = match_static(ssn, once);
        const auto e2 = match_static(email, once);
        again.insert(again.end(), e2.begin(), e2.end());
        EXPECT_TRUE(again.empty());
        EXPECT_EQ(redact(once, again), once);
        // a rule that would match the placeholder text itself stays out of it
        const auto holes = text::placeholder_ranges(once);
        for (const auto& s : match_static(shouty, once)) {
            for (const auto& [b, e] : holes) EXPECT_TRUE(s.end <= b || s.start >= e) << once;
        }
    }
}

TEST(Classifier, RuleOnZeroModelIsHalf) {
    RuleResources res;
    res.models["zero"] = std::make_shared<classifier::ClassifierModel>();
    RuleSpec spec;
    spec.id = "clf";
    spec.action = Action::Block;
    spec.body = ClassifierBody{"zero", 0.5};
    const auto rule = compile_rule(spec, res);
    const auto f = eval_classifier(rule, "anything at all");
    EXPECT_DOUBLE_EQ(f.score, 0.5);
    EXPECT_TRUE(f.triggered);  // probability >= threshold
    spec.body = ClassifierBody{"zero", 0.6};
    EXPECT_FALSE(eval_classifier(compile_rule(spec, res), "anything").triggered);
}

TEST(Enums, RoundTrip) {
    for (auto a : {Action::Allow, Action::Redact, Action::Warn, Action::Escalate, Action::Block}) {
        EXPECT_EQ(parse_action(to_string(a)), a);
    }
    for (auto k : {RuleKind::Static, RuleKind::NaturalLanguage, RuleKind::Classifier}) {
        EXPECT_EQ(parse_rule_kind(to_string(k)), k);
    }
    EXPECT_LT(Action::Redact, Action::Warn);
    EXPECT_LT(Action::Escalate, Action::Block);
}
