#include "guardgate/cli.hpp"

#include "guardgate/classifier.hpp"
#include "guardgate/config.hpp"
#include "guardgate/error.hpp"
#include "guardgate/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace guardgate::cli {

using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string format = "text";
    bool quiet = false;

    std::string assistant;
    std::string context;

    std::string transcript;

    std::string dataset;
    std::string model_out;
    double lr = classifier::TrainConfig{}.learning_rate;
    std::uint32_t epochs = classifier::TrainConfig{}.epochs;
    std::uint64_t seed = 0;

    std::string strategy;
    std::string side = "input";
    std::vector<std::string> policies;
};

ContextSet parse_context(const std::string& s) {
    ContextSet out;
    std::stringstream in(s);
    std::string tag;
    while (std::getline(in, tag, ',')) {
        tag.erase(0, tag.find_first_not_of(' '));
        tag.erase(tag.find_last_not_of(' ') + 1);
        if (!tag.empty()) out.insert(tag);
    }
    return out;
}

const Assistant& pick_assistant(const Deployment& dep, const std::string& id) {
    if (id.empty()) return dep.assistants.front();
    const Assistant* a = dep.find(id);
    if (a == nullptr) throw Error(ErrorCode::UnknownAssistant, "unknown assistant '" + id + "'");
    return *a;
}

std::string hex(std::span<const std::uint8_t> bytes) {
    std::ostringstream s;
    for (auto b : bytes) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
    return s.str();
}

void print_findings_text(const ConflictReport& report, std::ostream& out) {
    for (const auto& f : report.findings) {
        out << to_string(f.severity) << ": " << f.direction << " " << f.policy_a << " vs " << f.policy_b << " -> "
            << to_string(f.conflict.kind);
        if (f.overridden) out << " (override)";
        out << " [min dot " << f.conflict.min_dot << ", max dot " << f.conflict.max_dot << "]\n";
    }
    for (const auto& s : report.scenarios) {
        out << "scenario: " << s.direction << " {";
        bool first = true;
        for (const auto& c : s.context) {
            out << (first ? "" : ",") << c;
            first = false;
        }
        out << "} variant " << to_string(s.variant) << "\n";
    }
}

int cmd_validate(const Options& o, std::ostream& out) {
    const Deployment dep = load_deployment(o.config);
    const ConflictReport report = analyze_deployment(dep);
    const auto lint = lint_deployment(dep);
    if (o.format == "json") {
        out << json{{"config", o.config}, {"report", report}, {"lint", lint}}.dump(2) << "\n";
    } else if (!o.quiet) {
        print_findings_text(report, out);
        for (const auto& l : lint) out << "lint: " << l.path << ": " << l.message << "\n";
        out << report.count(FindingSeverity::Blocking) << " blocking, " << report.count(FindingSeverity::Warning)
            << " warning(s), " << report.count(FindingSeverity::Info) << " info\n";
    }
    return report.exit_status();
}

int cmd_check(const Options& o, std::ostream& out) {
    const Deployment dep = load_deployment(o.config);
    const Assistant& assistant = pick_assistant(dep, o.assistant);
    const ContextSet default_context = parse_context(o.context);

    std::ifstream in(o.transcript);
    if (!in) throw Error(ErrorCode::IoError, "cannot read transcript '" + o.transcript + "'");

    json messages = json::array();
    std::map<std::string, int> by_action;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "transcript line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("role") || !rec.contains("content") || !rec["role"].is_string() ||
            !rec["content"].is_string()) {
            throw Error(ErrorCode::ParseError,
                        "transcript line " + std::to_string(lineno) + ": expected {sessionId, role, content}");
        }
        const std::string role = rec["role"];
        Direction direction;
        if (role == "user") {
            direction = Direction::Input;
        } else if (role == "assistant") {
            direction = Direction::Output;
        } else {
            throw Error(ErrorCode::ParseError,
                        "transcript line " + std::to_string(lineno) + ": role must be user or assistant");
        }
        ContextSet context = default_context;
        if (rec.contains("context") && rec["context"].is_array()) {
            for (const auto& t : rec["context"]) context.insert(t.get<std::string>());
        }
        const std::string content = rec["content"];
        GuardedVerdict g = evaluate_guarded(dep, assistant, direction, content, context);

        json m{{"line", lineno},
               {"session_id", rec.value("sessionId", "")},
               {"role", role},
               {"direction", to_string(direction)}};
        if (g.unresolved) {
            m["action"] = "escalate";
            m["unresolved_conflict"] = *g.unresolved;
            ++by_action["escalate"];
        } else {
            m["action"] = to_string(g.verdict.action);
            m["triggered_rule_ids"] = g.verdict.triggered_rule_ids();
            m["redaction_count"] = g.verdict.redactions.size();
            m["findings"] = g.verdict.findings;
            if (g.verdict.transformed_text) m["transformed_text"] = *g.verdict.transformed_text;
            if (g.resolution) m["resolution"] = *g.resolution;
            ++by_action[std::string(to_string(g.verdict.action))];
        }
        messages.push_back(std::move(m));
    }

    if (o.format == "json") {
        out << json{{"assistant", assistant.id}, {"messages", messages}, {"summary", by_action}}.dump(2) << "\n";
    } else {
        for (const auto& m : messages) {
            if (o.quiet && m["action"] == "allow") continue;
            out << "line " << m["line"].get<std::size_t>() << " [" << m["role"].get<std::string>() << "] "
                << m["action"].get<std::string>();
            if (m.contains("triggered_rule_ids") && !m["triggered_rule_ids"].empty()) {
                out << " rules=" << m["triggered_rule_ids"].dump();
            }
            if (m.contains("redaction_count") && m["redaction_count"].get<std::size_t>() > 0) {
                out << " redactions=" << m["redaction_count"].get<std::size_t>();
            }
            out << "\n";
        }
        if (!o.quiet) {
            out << messages.size() << " message(s)";
            for (const auto& [action, n] : by_action) out << ", " << action << "=" << n;
            out << "\n";
        }
    }
    return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
    const classifier::LabeledDataset data = classifier::load_dataset(o.dataset);
    classifier::TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    classifier::TrainReport report;
    const classifier::ClassifierModel model = classifier::train(data, cfg, &report);
    classifier::save_model(model, o.model_out);

    std::size_t correct = 0;
    for (const auto& ex : data.examples) {
        if (classifier::predict(model, ex.text).label == ex.label) ++correct;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(data.examples.size());
    const double final_loss = report.epoch_loss.back();
    if (o.format == "json") {
        out << json{{"model", o.model_out},
                    {"examples", data.examples.size()},
                    {"epochs", cfg.epochs},
                    {"learning_rate", cfg.learning_rate},
                    {"final_loss", final_loss},
                    {"backtracks", report.backtracks},
                    {"training_accuracy", accuracy},
                    {"dataset_fingerprint", hex(model.dataset_fingerprint)}}
                   .dump(2)
            << "\n";
    } else if (!o.quiet) {
        out << "trained on " << data.examples.size() << " examples, final loss " << final_loss
            << ", training accuracy " << accuracy << "\nwrote " << o.model_out << "\n";
    }
    return 0;
}

int cmd_resolve_demo(const Options& o, std::ostream& out) {
    const Deployment dep = load_deployment(o.config);
    const Assistant& assistant = pick_assistant(dep, o.assistant);
    const Direction side = *parse_direction(o.side);
    const ResolutionMethod strategy =
        o.strategy.empty() ? assistant.conflict_strategy : *parse_resolution_method(o.strategy);
    const ContextSet context = parse_context(o.context);

    std::vector<GuardrailHandle> handles;
    for (const Policy* p : assistant.policies(side)) {
        if (o.policies.empty() || std::find(o.policies.begin(), o.policies.end(), p->id) != o.policies.end()) {
            handles.push_back(p->handle());
        }
    }
    for (const auto& id : o.policies) {
        const bool found = std::any_of(handles.begin(), handles.end(),
                                       [&](const GuardrailHandle& g) { return g.policy_id == id; });
        if (!found) throw Error(ErrorCode::ValidationFailed, "no " + o.side + " policy '" + id + "'");
    }
    const auto active = contextual_activation(context, handles);

    Resolution r;
    switch (strategy) {
        case ResolutionMethod::WeightedAverage: r = weighted_average(active, dep.thresholds); break;
        case ResolutionMethod::Precedence:      r = precedence_resolve(active); break;
        case ResolutionMethod::Hybrid:          r = hybrid_resolve(active, dep.thresholds); break;
        case ResolutionMethod::Contextual:      r = contextual_resolve(context, handles, dep.thresholds); break;
        case ResolutionMethod::Human:
            r.method = ResolutionMethod::Human;
            r.result = PendingHuman{};
            break;
    }
    const auto governing = governing_policy(r, active);

    std::vector<std::string> active_ids;
    for (const auto& g : active) active_ids.push_back(g.policy_id);
    json pairs = json::array();
    for (std::size_t i = 0; i < active.size(); ++i) {
        for (std::size_t j = i + 1; j < active.size(); ++j) {
            pairs.push_back(json{{"a", active[i].policy_id},
                                 {"b", active[j].policy_id},
                                 {"dot", dot(active[i].vector, active[j].vector)}});
        }
    }
    const auto variant = detect_variant(active, dep.thresholds);

    if (o.format == "json") {
        json j{{"assistant", assistant.id},
               {"side", to_string(side)},
               {"strategy", to_string(strategy)},
               {"context", std::vector<std::string>(context.begin(), context.end())},
               {"active", active_ids},
               {"pairs", pairs},
               {"resolution", r},
               {"governing_policy", governing ? json(*governing) : json(nullptr)},
               {"variant", variant ? json(to_string(*variant)) : json(nullptr)}};
        out << j.dump(2) << "\n";
        return 0;
    }
    if (!o.quiet) {
        out << "strategy: " << to_string(strategy) << "\nactive:";
        for (const auto& id : active_ids) out << " " << id;
        out << "\n";
        for (const auto& p : pairs) {
            out << "dot(" << p["a"].get<std::string>() << ", " << p["b"].get<std::string>()
                << ") = " << p["dot"].get<double>() << "\n";
        }
        if (variant) out << "variant: " << to_string(*variant) << "\n";
    }
    if (const auto* w = std::get_if<WinnerResult>(&r.result)) {
        out << "result: winner " << w->policy_id << "\n";
    } else if (const auto* d = std::get_if<DirectionResult>(&r.result)) {
        out << "result: direction [";
        for (std::size_t i = 0; i < d->direction.values().size(); ++i) {
            out << (i ? ", " : "") << d->direction.values()[i];
        }
        out << "]\n";
    } else if (r.is_blind()) {
        out << "result: ethically blind\n";
    } else {
        out << "result: pending human review\n";
    }
    if (governing) out << "governing policy: " << *governing << "\n";
    if (r.alert) out << "alert: " << *r.alert << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"guardgate: guardrail configuration and policy tooling"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "assistant configuration (JSON)");
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "text"}));
    app.add_flag("-q,--quiet", o.quiet, "only print essentials");

    auto* validate = app.add_subcommand("validate", "schema check plus static conflict analysis (exit 0/1/2)");
    auto* check = app.add_subcommand("check", "apply policies to a JSONL transcript offline");
    check->add_option("transcript", o.transcript, "lines of {sessionId, role, content}")->required();
    check->add_option("--assistant", o.assistant, "assistant id (default: first)");
    check->add_option("--context", o.context, "comma separated context tags");

    auto* train = app.add_subcommand("train", "train a logistic-regression classifier");
    train->add_option("dataset", o.dataset, "label<TAB>text lines, label allow|deny")->required();
    train->add_option("-o,--out", o.model_out, "model output path")->required();
    train->add_option("--lr", o.lr, "learning rate")->check(CLI::PositiveNumber);
    train->add_option("--epochs", o.epochs, "full-batch epochs")->check(CLI::PositiveNumber);
    train->add_option("--seed", o.seed, "recorded in the model");

    auto* demo = app.add_subcommand("resolve-demo", "show how a strategy resolves a policy set");
    demo->add_option("--strategy", o.strategy, "weighted_average|precedence|hybrid|contextual|human")
        ->check(CLI::IsMember({"weighted_average", "precedence", "hybrid", "contextual", "human"}));
    demo->add_option("--context", o.context, "comma separated context tags");
    demo->add_option("--side", o.side, "input|output")->check(CLI::IsMember({"input", "output"}));
    demo->add_option("--policy", o.policies, "restrict to these policies (repeatable)");
    demo->add_option("--assistant", o.assistant, "assistant id (default: first)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if ((validate->parsed() || check->parsed() || demo->parsed()) && o.config.empty()) {
            throw CLI::RequiredError("--config");
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (check->parsed()) return cmd_check(o, out);
        if (train->parsed()) return cmd_train(o, out);
        return cmd_resolve_demo(o, out);
    } catch (const ValidationError& e) {
        if (o.format == "json") {
            out << error_json(e).dump(2) << "\n";
        } else {
            err << "invalid configuration:\n";
            for (const auto& f : e.findings()) err << "  " << f.path << ": " << f.message << "\n";
        }
        return kExitInputError;
    } catch (const Error& e) {
        if (o.format == "json") out << error_json(e).dump(2) << "\n";
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return kExitInputError;
    }
}

} // namespace guardgate::cli
