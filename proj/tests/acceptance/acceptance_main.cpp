// Headless acceptance run: one PASS/FAIL line per criterion, nonzero exit on
// any failure. Each check computes its expectation independently of the code
// under test where that is possible.

#include "../gateway_fixture.hpp"
#include "../loopback.hpp"
#include "../test_support.hpp"

#include "guardgate/classifier.hpp"
#include "guardgate/conflict.hpp"
#include "guardgate/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace guardgate;
using nlohmann::json;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail.str("");
            detail << what;
        }
    }
};

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

GuardrailHandle handle(std::string id, std::shared_ptr<const AxisSpace> space, std::vector<double> v, int priority,
                       double weight = 1.0) {
    return GuardrailHandle{std::move(id), EthicalVector::normalized(std::move(space), std::move(v)), weight, priority, {}};
}

ConflictKind expected_case(double mn, double mx) {
    constexpr double eps = 1e-6, theta = -0.8;
    const double opp = -1 + eps;
    if (mx <= opp) return ConflictKind::Case1;
    if (mn <= opp) return ConflictKind::Case3;
    if (mx <= theta) return ConflictKind::Case2;
    if (mn <= theta) return ConflictKind::Case4;
    return ConflictKind::NoConflict;
}

// --- 1: conflict-case matrix -------------------------------------------------
Outcome conflict_matrix() {
    Outcome o;
    // Two context-tagged planes; B's angle in each plane fixes the dot seen in
    // that context. d1 == d2 is the all-contexts pattern, d1 != d2 some-contexts.
    const auto space = AxisSpace::make({"x1", "y1", "x2", "y2"}, {{"k1"}, {"k1"}, {"k2"}, {"k2"}});
    const std::vector<double> grid = {-1, -0.9, -0.8, -0.5, 0, 0.5, 1};
    const std::vector<ContextSet> contexts = {{"k1"}, {"k2"}};
    int pairs = 0, mismatches = 0;
    for (double d1 : grid) {
        for (double d2 : grid) {
            const auto a = handle("A", space, {1, 0, 1, 0}, 1);
            const auto b = handle("B", space, {d1, std::sqrt(1 - d1 * d1), d2, std::sqrt(1 - d2 * d2)}, 2);
            const auto got = classify_pair(a, b, contexts);
            const auto want = expected_case(std::min(d1, d2), std::max(d1, d2));
            ++pairs;
            if (got.kind != want) {
                ++mismatches;
                o.require(false, "d=(" + std::to_string(d1) + "," + std::to_string(d2) + ") got " +
                                     std::string(to_string(got.kind)) + " want " + std::string(to_string(want)));
            }
        }
    }
    if (o.ok) o.detail << pairs << " context patterns, " << mismatches << " mismatches";
    return o;
}

// --- 2: variants -------------------------------------------------------------
Outcome variants() {
    Outcome o;
    const auto plane = AxisSpace::make({"x", "y"});
    const auto A = handle("A", plane, {1, 0}, 1), B = handle("B", plane, {-1, 0}, 2);
    const auto C = handle("C", plane, {0, 1}, 3), D = handle("D", plane, {0, -1}, 4);
    const std::vector<GuardrailHandle> s1 = {A, B}, s2 = {A, B, C}, s3 = {A, B, C, D};
    o.require(detect_variant(s1) == Variant::I, "{A,B} is not Variant I");
    o.require(detect_variant(s2) == Variant::II, "{A,B,C} is not Variant II");
    o.require(detect_variant(s3) == Variant::III, "{A,B,C,D} is not Variant III");
    o.require(weighted_average(s3).is_blind(), "Variant III set does not average to EthicallyBlind");
    o.require(weighted_average(s2).is_direction(), "Variant II set lost its direction");
    if (o.ok) o.detail << "I, II, III detected; III averages to EthicallyBlind";
    return o;
}

// --- 3: hybrid equivalence ---------------------------------------------------
Outcome hybrid_equivalence() {
    Outcome o;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> weight(std::nextafter(0.0, 1.0), 10.0);
    std::normal_distribution<double> normal;
    int sets = 0, blind = 0, directional = 0;
    for (int i = 0; i < 1500 && o.ok; ++i) {
        const std::size_t dim = 2 + rng() % 7;
        std::vector<std::string> names;
        for (std::size_t k = 0; k < dim; ++k) names.push_back("a" + std::to_string(k));
        const auto space = AxisSpace::make(names);
        const bool paired = rng() % 3 == 0;  // every member has an equal-weight opposite
        const int n = 1 + static_cast<int>(rng() % 5);
        std::vector<GuardrailHandle> hs;
        std::vector<double> sum(dim, 0.0);
        int priority = static_cast<int>(rng() % 4);
        for (int k = 0; k < n; ++k) {
            std::vector<double> v(dim);
            for (auto& x : v) x = normal(rng);
            const double w = weight(rng);
            hs.push_back(handle("p" + std::to_string(k), space, v, priority += 1 + rng() % 3, w));
            if (paired) {
                for (auto& x : v) x = -x;
                hs.push_back(handle("q" + std::to_string(k), space, v, priority += 1 + rng() % 3, w));
            }
        }
        std::shuffle(hs.begin(), hs.end(), rng);
        for (const auto& h : hs) {
            for (std::size_t k = 0; k < dim; ++k) sum[k] += h.weight * h.vector.values()[k];
        }
        double norm = 0;
        for (double x : sum) norm += x * x;
        norm = std::sqrt(norm);
        const auto top = std::min_element(hs.begin(), hs.end(), [](const auto& a, const auto& b) {
                             return a.priority < b.priority;
                         })->policy_id;

        const auto h = hybrid_resolve(hs);
        ++sets;
        if (norm >= 1e-6) {
            ++directional;
            o.require(h.is_direction() && !h.alert, "set " + std::to_string(i) + ": expected a direction");
            if (!o.ok) break;
            const auto& got = std::get<DirectionResult>(h.result).direction.values();
            const auto& wa = weighted_average(hs);
            o.require(wa.is_direction(), "set " + std::to_string(i) + ": weighted_average not a direction");
            if (!o.ok) break;
            const auto& ref = std::get<DirectionResult>(wa.result).direction.values();
            for (std::size_t k = 0; k < dim; ++k) {
                o.require(std::abs(got[k] - ref[k]) <= 1e-9, "set " + std::to_string(i) + ": direction differs");
                o.require(std::abs(got[k] - sum[k] / norm) <= 1e-9, "set " + std::to_string(i) + ": direction off");
            }
        } else {
            ++blind;
            o.require(h.is_winner(), "set " + std::to_string(i) + ": expected precedence winner");
            if (!o.ok) break;
            const auto p = precedence_resolve(hs);
            o.require(std::get<WinnerResult>(h.result).policy_id == std::get<WinnerResult>(p.result).policy_id &&
                          std::get<WinnerResult>(h.result).policy_id == top,
                      "set " + std::to_string(i) + ": winner differs from precedence");
            o.require(h.alert && !h.alert->empty(), "set " + std::to_string(i) + ": missing alert");
        }
    }
    o.require(blind > 0 && directional > 0, "randomized sets did not cover both branches");
    if (o.ok) o.detail << sets << " sets (" << directional << " directional, " << blind << " blind)";
    return o;
}

// --- 4: privacy end to end ---------------------------------------------------
std::string digits(std::mt19937_64& rng, int n) { return gg_test::digits(rng, n); }

std::string seeded_pii(std::mt19937_64& rng, int kind) {
    switch (kind) {
        case 0: return digits(rng, 3) + "-" + digits(rng, 2) + "-" + digits(rng, 4);
        case 1: {
            const char* locals[] = {"ann", "j.doe", "max+news", "k_lee", "o.b.river"};
            const char* domains[] = {"example.org", "mail.example.co.uk", "corp-x.net", "uni.edu"};
            return std::string(locals[rng() % 5]) + digits(rng, 3) + "@" + domains[rng() % 4];
        }
        default: {
            const auto a = digits(rng, 3), b = digits(rng, 3), c = digits(rng, 4);
            switch (rng() % 4) {
                case 0: return a + "-" + b + "-" + c;
                case 1: return "(" + a + ") " + b + "-" + c;
                case 2: return "+1 " + a + "." + b + "." + c;
                default: return a + " " + b + " " + c;
            }
        }
    }
}

Outcome privacy_end_to_end() {
    Outcome o;
    gg_test::GatewayHarness h;
    gg_test::LoopbackServer server(*h.gateway);
    auto client = server.client();
    std::mt19937_64 rng(4);
    const char* filler[] = {"please update", "my details are", "contact:", "as discussed,", "reach me at", "thanks"};
    std::vector<std::string> seeded;
    int requests = 0;
    for (int s = 0; s < 100 && o.ok; ++s) {
        const std::string session = "privacy-" + std::to_string(s);
        const int turns = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < turns; ++t) {
            std::string text = filler[rng() % 6];
            const int n = 1 + static_cast<int>(rng() % 4);
            for (int k = 0; k < n; ++k) {
                const auto pii = seeded_pii(rng, static_cast<int>(rng() % 3));
                seeded.push_back(pii);
                text += " " + pii + (rng() % 2 ? "," : " and") + " " + filler[rng() % 6];
            }
            auto r = client.Post("/v1/chat/completions", {{"X-Session-Id", session}}, gg_test::user_message(text).dump(),
                                 "application/json");
            o.require(r && r->status == 200, "request failed in session " + session);
            ++requests;
        }
    }
    const auto calls = h.upstream->calls();
    o.require(calls.size() == static_cast<std::size_t>(requests), "upstream call count differs from request count");
    std::size_t leaks = 0, without_placeholder = 0;
    for (const auto& call : calls) {
        std::string payload;
        for (const auto& m : call["messages"]) payload += m["content"].get<std::string>() + "\n";
        if (payload.find("[REDACTED:") == std::string::npos) ++without_placeholder;
        for (const auto& pii : seeded) {
            if (payload.find(pii) != std::string::npos) ++leaks;
        }
    }
    o.require(leaks == 0, std::to_string(leaks) + " seeded strings reached the upstream");
    o.require(without_placeholder == 0, std::to_string(without_placeholder) + " payloads without placeholders");
    if (o.ok) o.detail << seeded.size() << " seeded values over " << requests << " requests, 0 leaked";
    return o;
}

// --- 5: block isolation ------------------------------------------------------
Outcome block_isolation() {
    Outcome o;
    gg_test::GatewayHarness h;
    std::mt19937_64 rng(5);
    const std::vector<std::string> words = {"hello", "reviewme", "warnme", "123-45-6789", "Bomb", "BOMB", "bomb",
                                            "bombastic", "weather", "a@b.io", "the", "recipe"};
    int blocks = 0;
    for (int i = 0; i < 300 && o.ok; ++i) {
        std::string text;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) text += (k ? " " : "") + words[rng() % words.size()];
        bool expect_block = false;
        std::istringstream in(text);
        for (std::string w; in >> w;) expect_block |= lower(w) == "bomb";

        const std::string session = "iso-" + std::to_string(i);
        const auto before = h.upstream->call_count();
        const auto r = h.chat(session, text);
        const auto records = h.gateway->audit_log().query(session);
        o.require(!records.empty(), "no audit record for '" + text + "'");
        if (!o.ok) break;
        const bool blocked = records[0].verdict_action == "block";
        o.require(blocked == expect_block, "'" + text + "' classified " + records[0].verdict_action);
        if (!blocked) continue;
        ++blocks;
        o.require(h.upstream->call_count() == before, "upstream called for blocked '" + text + "'");
        o.require(records.size() == 1 && !records[0].upstream_called, "audit for '" + text + "' claims an upstream call");
        o.require(r.body["choices"][0]["finish_reason"] == "content_filter", "no refusal for '" + text + "'");
    }
    o.require(blocks >= 50, "too few blocked inputs generated");
    if (o.ok) o.detail << blocks << " blocked inputs, 0 upstream calls, upstream_called=false on each";
    return o;
}

// --- 6: ordering and short-circuit ------------------------------------------
Outcome ordering_short_circuit() {
    Outcome o;
    RuleResources res;
    res.models["zero"] = std::make_shared<classifier::ClassifierModel>();  // p(deny) = 0.5 everywhere
    std::mt19937_64 rng(6);
    const Action quiet[] = {Action::Redact, Action::Warn, Action::Escalate, Action::Block};

    auto rule = [&](const std::string& id, RuleKind kind, Action action, bool fires) {
        RuleSpec s;
        s.id = id;
        s.action = action;
        switch (kind) {
            case RuleKind::Static: s.body = StaticBody{std::nullopt, fires ? "\\bTRIGGER\\b" : "\\bqqqx\\b"}; break;
            case RuleKind::NaturalLanguage: {
                NaturalLanguageBody b;
                b.description = "generated";
                b.keywords = {fires ? "trigger" : "zzzq"};
                b.threshold = 0.5;
                s.body = std::move(b);
                break;
            }
            case RuleKind::Classifier: s.body = ClassifierBody{"zero", fires ? 0.5 : 0.99}; break;
        }
        return s;
    };

    int policies = 0;
    for (int p = 0; p < 100 && o.ok; ++p) {
        const int n = 3 + static_cast<int>(rng() % 8);
        std::vector<RuleSpec> specs;
        std::vector<RuleKind> kinds;
        for (int i = 0; i < n; ++i) {
            const auto kind = static_cast<RuleKind>(rng() % 3);
            specs.push_back(rule("r" + std::to_string(i), kind, quiet[rng() % 4], false));
            kinds.push_back(kind);
        }
        // expected evaluation order: stable partition by kind
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return kinds[a] < kinds[b]; });

        const auto plain = gg_test::make_policy("p" + std::to_string(p), specs, Direction::Input, 1, OrderMode::Default, res);
        const auto v0 = evaluate_policy(plain, "nothing to see TRIGGER");
        o.require(v0.trace.size() == static_cast<std::size_t>(n), "trace length");
        for (int i = 0; i < n && o.ok; ++i) {
            o.require(v0.trace[i].rule_id == specs[order[i]].id, "policy " + std::to_string(p) + ": order differs");
            o.require(v0.trace[i].evaluated, "policy " + std::to_string(p) + ": rule skipped without a block");
            if (i > 0) o.require(v0.trace[i - 1].kind <= v0.trace[i].kind, "kinds out of order");
        }

        // inject a firing Block so that it lands at evaluation position k
        const int k = static_cast<int>(rng() % (n + 1));
        auto injected = specs;
        const RuleKind kind = k < n ? kinds[order[k]] : RuleKind::Classifier;
        const auto at = k < n ? injected.begin() + order[k] : injected.end();
        injected.insert(at, rule("inject", kind, Action::Block, true));
        const auto pol = gg_test::make_policy("q" + std::to_string(p), injected, Direction::Input, 1, OrderMode::Default, res);
        const auto v = evaluate_policy(pol, "nothing to see TRIGGER");
        o.require(v.action == Action::Block, "policy " + std::to_string(p) + ": injected block did not fire");
        o.require(v.trace.size() == static_cast<std::size_t>(n + 1), "trace length with injection");
        if (!o.ok) break;
        o.require(v.trace[k].rule_id == "inject", "policy " + std::to_string(p) + ": injected rule not at position k");
        for (int i = 0; i <= n && o.ok; ++i) {
            if (i > 0) o.require(v.trace[i - 1].kind <= v.trace[i].kind, "kinds out of order with injection");
            o.require(v.trace[i].evaluated == (i <= k),
                      "policy " + std::to_string(p) + ": rule at " + std::to_string(i) + " evaluated flag wrong (k=" +
                          std::to_string(k) + ")");
        }
        ++policies;
    }
    if (o.ok) o.detail << policies << " policies, Static->NaturalLanguage->Classifier held, nothing after the block ran";
    return o;
}

// --- 7: classifier -----------------------------------------------------------
Outcome classifier_checks() {
    Outcome o;
    using namespace classifier;
    const std::vector<LabeledExample> seeds = {
        {"I will hurt you badly", Label::Deny},        {"you are a worthless idiot", Label::Deny},
        {"send me the stolen card numbers", Label::Deny}, {"how do I poison my neighbor", Label::Deny},
        {"thanks for the quick help", Label::Allow},    {"what is the weather tomorrow", Label::Allow},
        {"please summarize this report", Label::Allow}, {"recommend a good book", Label::Allow},
    };
    const auto data = generate_synthetic_stub(seeds, 200);
    o.require(data.examples.size() == 200, "synthetic dataset size");

    const auto model = train(data, TrainConfig{});
    std::size_t correct = 0;
    for (const auto& ex : data.examples) correct += predict(model, ex.text).label == ex.label;
    const double accuracy = static_cast<double>(correct) / static_cast<double>(data.examples.size());
    o.require(accuracy >= 0.95, "training accuracy " + std::to_string(accuracy));

    gg_test::TempDir dir;
    save_model(train(data, TrainConfig{}), dir / "a.model");
    save_model(train(data, TrainConfig{}), dir / "b.model");
    o.require(gg_test::read_file(dir / "a.model") == gg_test::read_file(dir / "b.model"), "model files differ");

    // the CLI path writes byte-identical files too
    const auto tsv = dir.write("d.tsv", [&] {
        std::string s;
        for (const auto& ex : data.examples) s += std::string(to_string(ex.label)) + "\t" + ex.text + "\n";
        return s;
    }());
    const auto c1 = gg_test::run_cli_binary("train " + gg_test::shell_quote(tsv) + " -o " + gg_test::shell_quote(dir / "c1"));
    const auto c2 = gg_test::run_cli_binary("train " + gg_test::shell_quote(tsv) + " -o " + gg_test::shell_quote(dir / "c2"));
    o.require(c1.exit_code == 0 && c2.exit_code == 0, "CLI training failed");
    o.require(gg_test::read_file(dir / "c1") == gg_test::read_file(dir / "c2"), "CLI model files differ");

    // analytic gradient against central differences at random points
    const auto fd = featurize_dataset(data);
    std::vector<std::uint32_t> touched;
    for (const auto& x : fd.features) {
        for (const auto& [k, v] : x.entries) touched.push_back(k);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0;
    const double h = 1e-5;
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> w(kFeatureDim, 0.0);
        for (auto k : touched) w[k] = u(rng);
        const double b = u(rng);
        const auto g = logistic_loss_gradient(w, b, fd);
        auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-3}); };
        for (std::size_t idx = 0; idx < touched.size(); idx += 1 + touched.size() / 64) {
            const auto k = touched[idx];
            auto wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            const double num = (mean_logistic_loss(wp, b, fd) - mean_logistic_loss(wm, b, fd)) / (2 * h);
            worst = std::max(worst, rel(g.weight_gradient[k], num));
        }
        const double numb = (mean_logistic_loss(w, b + h, fd) - mean_logistic_loss(w, b - h, fd)) / (2 * h);
        worst = std::max(worst, rel(g.bias_gradient, numb));
    }
    o.require(worst < 1e-6, "gradient relative error " + std::to_string(worst));
    if (o.ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "accuracy %.3f, identical model bytes, max gradient rel. error %.2e", accuracy,
                      worst);
        o.detail << buf;
    }
    return o;
}

// --- 8: static analysis gate -------------------------------------------------
Outcome validate_gate() {
    Outcome o;
    gg_test::TempDir dir;
    auto doc = [](std::vector<double> b) {
        return json{{"schema_version", 1},
                    {"axes", {"x", "y"}},
                    {"assistants",
                     {{{"id", "a"},
                       {"input_policies",
                        {{{"id", "pa"}, {"ethical_vector", {1, 0}}, {"priority", 1},
                          {"rules", {gg_test::rule("ra", "warn", "\\bhit\\b")}}},
                         {{"id", "pb"}, {"ethical_vector", b}, {"priority", 2},
                          {"rules", {gg_test::rule("rb", "block", "\\bhit\\b")}}}}}}}}};
    };
    const auto opposed = dir.write("opposed.json", doc({-1, 0}).dump());
    const auto orthogonal = dir.write("orthogonal.json", doc({0, 1}).dump());
    const auto r1 = gg_test::run_cli_binary("--config " + gg_test::shell_quote(opposed) + " --format json validate");
    o.require(r1.exit_code == 2, "opposed config exit " + std::to_string(r1.exit_code));
    bool case1 = false;
    try {
        const auto report = json::parse(r1.out);
        for (const auto& f : report["report"]["findings"]) case1 |= f["case"]["kind"] == "case1";
    } catch (const std::exception&) {
    }
    o.require(case1, "no case1 finding reported");
    const auto r2 = gg_test::run_cli_binary("--config " + gg_test::shell_quote(orthogonal) + " validate");
    o.require(r2.exit_code == 0, "orthogonal config exit " + std::to_string(r2.exit_code));
    if (o.ok) o.detail << "(1,0)/(-1,0) exits 2 with case1; (1,0)/(0,1) exits 0";
    return o;
}

// --- 9: repeat-violation restriction ----------------------------------------
Outcome repeat_violation() {
    Outcome o;
    gg_test::GatewayHarness h;  // K=3, W=60s
    auto restricted = [&](const std::string& s) { return h.chat(s, "a perfectly clean question").status == 429; };
    auto at = [&](std::int64_t seconds) { *h.now = 1'000'000 + seconds * 1000; };

    at(0);
    h.chat("flip", "warnme");
    at(10);
    h.chat("flip", "warnme");
    o.require(!restricted("flip"), "restricted after two warnings");
    at(20);
    h.chat("flip", "warnme");
    o.require(restricted("flip"), "third warning within 60s did not restrict");
    o.require(h.gateway->restrictions().state("flip", h.now->load()).kind == RestrictionKind::TempBlock, "restriction is not TempBlock");

    at(1000);
    h.chat("drain", "warnme");
    at(1010);
    h.chat("drain", "warnme");
    at(1075);  // the first two have left the window
    h.chat("drain", "warnme");
    o.require(!restricted("drain"), "warning after window drain restricted the session");
    if (o.ok) o.detail << "3rd warn at t=20s restricts; warn at t=75s after drain does not";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"conflict-case matrix", conflict_matrix},
        {"variant detection", variants},
        {"hybrid equivalence", hybrid_equivalence},
        {"privacy end to end", privacy_end_to_end},
        {"block isolation", block_isolation},
        {"ordering and short-circuit", ordering_short_circuit},
        {"classifier determinism and correctness", classifier_checks},
        {"static analysis gate", validate_gate},
        {"repeat-violation restriction", repeat_violation},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail.str("");
            o.detail << "exception: " << e.what();
        }
        std::printf("%s criterion %zu: %s - %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.str().c_str());
        failed += !o.ok;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
