#include "guardgate/config.hpp"

#include "guardgate/error.hpp"

#include <algorithm>
#include <initializer_list>
#include <string_view>
#include <fstream>
#include <set>
#include <sstream>

namespace guardgate {

using nlohmann::json;

namespace {

class Parser {
public:
    explicit Parser(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

    Deployment run(const json& doc) {
        Deployment d;
        d.source = doc;
        if (!doc.is_object()) {
            fail("", "config must be a JSON object");
            finish();
        }
        if (!doc.contains("schema_version")) {
            fail("/schema_version", "schema_version is required");
        } else if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kConfigSchemaVersion) {
            fail("/schema_version", "unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
        }
        check_keys(doc, "", {"schema_version", "axes", "thresholds", "contexts", "lexicons", "models", "assistants"});
        d.axes = parse_axes(doc, "/axes");
        if (doc.contains("thresholds")) d.thresholds = parse_thresholds(doc["thresholds"], "/thresholds");
        parse_resources(doc, d.resources);

        std::set<ContextSet> universe;
        if (doc.contains("contexts")) {
            const json& contexts = doc["contexts"];
            if (!contexts.is_array()) fail("/contexts", "must be an array of tag arrays");
            else {
                for (std::size_t i = 0; i < contexts.size(); ++i) {
                    universe.insert(string_set(contexts[i], "/contexts/" + std::to_string(i)));
                }
            }
        }
        if (d.axes) {
            for (const auto& tags : d.axes->tags) {
                for (const auto& t : tags) universe.insert(ContextSet{t});
            }
        }

        if (!doc.contains("assistants") || !doc["assistants"].is_array() || doc["assistants"].empty()) {
            fail("/assistants", "at least one assistant is required");
        } else {
            std::set<std::string> ids;
            for (std::size_t i = 0; i < doc["assistants"].size(); ++i) {
                const std::string path = "/assistants/" + std::to_string(i);
                Assistant a = parse_assistant(doc["assistants"][i], path, d);
                if (!a.id.empty() && !ids.insert(a.id).second) fail(path + "/id", "duplicate assistant id '" + a.id + "'");
                for (const auto* list : {&a.input_policies, &a.output_policies}) {
                    for (const auto& p : *list) {
                        for (const auto& t : p.context_tags) universe.insert(ContextSet{t});
                    }
                }
                d.assistants.push_back(std::move(a));
            }
        }
        universe.erase(ContextSet{});
        d.context_universe.assign(universe.begin(), universe.end());
        finish();
        return d;
    }

private:
    void fail(std::string path, std::string message) { findings_.push_back({std::move(path), std::move(message)}); }

    // Typos in optional keys would otherwise be ignored silently.
    void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
        if (!obj.is_object()) return;
        for (const auto& [key, value] : obj.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) fail(path + "/" + key, "unknown key");
        }
    }

    void finish() {
        if (!findings_.empty()) throw ValidationError(std::move(findings_));
    }

    std::string get_string(const json& obj, const char* key, const std::string& path, bool required,
                           std::string fallback = {}) {
        if (!obj.contains(key)) {
            if (required) fail(path + "/" + key, "is required");
            return fallback;
        }
        if (!obj[key].is_string()) {
            fail(path + "/" + key, "must be a string");
            return fallback;
        }
        return obj[key].get<std::string>();
    }

    double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_number()) {
            fail(path + "/" + key, "must be a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    int get_int(const json& obj, const char* key, const std::string& path, int fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_number_integer()) {
            fail(path + "/" + key, "must be an integer");
            return fallback;
        }
        return obj[key].get<int>();
    }

    bool get_bool(const json& obj, const char* key, const std::string& path, bool fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_boolean()) {
            fail(path + "/" + key, "must be a boolean");
            return fallback;
        }
        return obj[key].get<bool>();
    }

    ContextSet string_set(const json& arr, const std::string& path) {
        ContextSet out;
        if (!arr.is_array()) {
            fail(path, "must be an array of strings");
            return out;
        }
        for (const auto& v : arr) {
            if (!v.is_string() || v.get<std::string>().empty()) fail(path, "entries must be non-empty strings");
            else out.insert(v.get<std::string>());
        }
        return out;
    }

    std::shared_ptr<const AxisSpace> parse_axes(const json& doc, const std::string& path) {
        if (!doc.contains("axes") || !doc["axes"].is_array()) {
            fail(path, "axes must be an array of axis names or {name, tags} objects");
            return nullptr;
        }
        std::vector<std::string> names;
        std::vector<std::vector<std::string>> tags;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < doc["axes"].size(); ++i) {
            const json& axis = doc["axes"][i];
            const std::string p = path + "/" + std::to_string(i);
            std::string name;
            std::vector<std::string> axis_tags;
            if (axis.is_string()) {
                name = axis.get<std::string>();
            } else if (axis.is_object()) {
                check_keys(axis, p, {"name", "tags"});
                name = get_string(axis, "name", p, true);
                if (axis.contains("tags")) {
                    const auto set = string_set(axis["tags"], p + "/tags");
                    axis_tags.assign(set.begin(), set.end());
                }
            } else {
                fail(p, "axis must be a string or an object");
                continue;
            }
            if (name.empty()) fail(p, "axis name must be non-empty");
            else if (!seen.insert(name).second) fail(p, "duplicate axis '" + name + "'");
            names.push_back(std::move(name));
            tags.push_back(std::move(axis_tags));
        }
        if (names.size() < 2) {
            fail(path, "at least two axes are required");
            return nullptr;
        }
        return AxisSpace::make(std::move(names), std::move(tags));
    }

    ConflictThresholds parse_thresholds(const json& obj, const std::string& path) {
        ConflictThresholds th;
        if (!obj.is_object()) {
            fail(path, "must be an object");
            return th;
        }
        check_keys(obj, path, {"epsilon", "theta", "delta"});
        th.epsilon = get_number(obj, "epsilon", path, th.epsilon);
        th.theta = get_number(obj, "theta", path, th.theta);
        th.delta = get_number(obj, "delta", path, th.delta);
        if (!(th.epsilon >= 0.0 && th.epsilon < 1.0)) fail(path + "/epsilon", "must be within [0,1)");
        if (!(th.theta > -1.0 + th.epsilon && th.theta < 1.0)) fail(path + "/theta", "must be within (-1+epsilon, 1)");
        if (!(th.delta > 0.0)) fail(path + "/delta", "must be positive");
        return th;
    }

    std::filesystem::path resolve(const std::string& p) const {
        std::filesystem::path path(p);
        if (path.is_relative() && !base_dir_.empty()) path = base_dir_ / path;
        return path;
    }

    void parse_resources(const json& doc, RuleResources& res) {
        if (doc.contains("lexicons")) {
            if (!doc["lexicons"].is_object()) fail("/lexicons", "must map names to file paths");
            else {
                for (const auto& [name, value] : doc["lexicons"].items()) {
                    const std::string p = "/lexicons/" + name;
                    if (!value.is_string()) {
                        fail(p, "must be a file path");
                        continue;
                    }
                    try {
                        res.lexicons.emplace(name, std::make_shared<const Lexicon>(load_lexicon(resolve(value))));
                    } catch (const Error& e) {
                        fail(p, e.what());
                    }
                }
            }
        }
        if (doc.contains("models")) {
            if (!doc["models"].is_object()) fail("/models", "must map names to file paths");
            else {
                for (const auto& [name, value] : doc["models"].items()) {
                    const std::string p = "/models/" + name;
                    if (!value.is_string()) {
                        fail(p, "must be a file path");
                        continue;
                    }
                    try {
                        res.models.emplace(name, std::make_shared<const classifier::ClassifierModel>(
                                                     classifier::load_model(resolve(value))));
                    } catch (const Error& e) {
                        fail(p, e.what());
                    }
                }
            }
        }
    }

    std::optional<RuleSpec> parse_rule(const json& r, const std::string& path) {
        if (!r.is_object()) {
            fail(path, "rule must be an object");
            return std::nullopt;
        }
        RuleSpec spec;
        check_keys(r, path, {"id", "kind", "action", "severity", "builtin", "pattern", "description", "keywords",
                             "lexicon", "threshold", "intent", "model"});
        spec.id = get_string(r, "id", path, true);
        const std::string kind_text = get_string(r, "kind", path, true);
        const auto kind = parse_rule_kind(kind_text);
        if (!kind) {
            if (!kind_text.empty()) fail(path + "/kind", "unknown rule kind '" + kind_text + "'");
            return std::nullopt;
        }
        const std::string action_text = get_string(r, "action", path, true);
        const auto action = parse_action(action_text);
        if (!action || *action == Action::Allow) {
            fail(path + "/action", "action must be one of redact, warn, escalate, block");
            return std::nullopt;
        }
        spec.action = *action;
        spec.severity = get_int(r, "severity", path, 5);
        switch (*kind) {
            case RuleKind::Static: {
                StaticBody body;
                if (r.contains("builtin")) body.builtin = get_string(r, "builtin", path, true);
                if (r.contains("pattern")) body.pattern = get_string(r, "pattern", path, true);
                spec.body = std::move(body);
                break;
            }
            case RuleKind::NaturalLanguage: {
                NaturalLanguageBody body;
                body.description = get_string(r, "description", path, false);
                if (r.contains("keywords")) {
                    if (!r["keywords"].is_array()) fail(path + "/keywords", "must be an array of strings");
                    else {
                        for (const auto& k : r["keywords"]) {
                            if (!k.is_string()) fail(path + "/keywords", "entries must be strings");
                            else body.keywords.push_back(k.get<std::string>());
                        }
                    }
                }
                if (r.contains("lexicon")) body.lexicon = get_string(r, "lexicon", path, true);
                body.threshold = get_number(r, "threshold", path, 0.5);
                const std::string intent = get_string(r, "intent", path, false, "avoid");
                if (intent == "encourage") body.intent = RuleIntent::Encourage;
                else if (intent != "avoid") fail(path + "/intent", "intent must be avoid or encourage");
                spec.body = std::move(body);
                break;
            }
            case RuleKind::Classifier: {
                ClassifierBody body;
                body.model = get_string(r, "model", path, true);
                body.threshold = get_number(r, "threshold", path, 0.5);
                spec.body = std::move(body);
                break;
            }
        }
        return spec;
    }

    std::optional<Policy> parse_policy(const json& p, const std::string& path, Direction slot, const Deployment& d) {
        if (!p.is_object()) {
            fail(path, "policy must be an object");
            return std::nullopt;
        }
        Policy policy;
        check_keys(p, path, {"id", "direction", "order", "weight", "priority", "context_tags", "ethical_vector", "rules"});
        policy.id = get_string(p, "id", path, true);
        policy.direction = slot;
        if (p.contains("direction")) {
            const auto dir = parse_direction(get_string(p, "direction", path, true));
            if (!dir) fail(path + "/direction", "direction must be input or output");
            else if (*dir != slot) {
                fail(path + "/direction", "policy direction does not match its slot (" +
                                              std::string(to_string(slot)) + "_policies)");
            }
        }
        const std::string order = get_string(p, "order", path, false, "default");
        if (order == "custom") policy.order = OrderMode::Custom;
        else if (order != "default") fail(path + "/order", "order must be default or custom");
        policy.weight = get_number(p, "weight", path, 1.0);
        if (!(policy.weight > 0.0)) fail(path + "/weight", "weight must be positive");
        policy.priority = get_int(p, "priority", path, 0);
        if (p.contains("context_tags")) policy.context_tags = string_set(p["context_tags"], path + "/context_tags");

        if (!p.contains("ethical_vector") || !p["ethical_vector"].is_array()) {
            fail(path + "/ethical_vector", "ethical_vector must be an array of numbers");
        } else if (d.axes) {
            std::vector<double> raw;
            bool ok = true;
            for (const auto& x : p["ethical_vector"]) {
                if (!x.is_number()) ok = false;
                else raw.push_back(x.get<double>());
            }
            if (!ok) fail(path + "/ethical_vector", "components must be numbers");
            else {
                try {
                    policy.ethical_vector = EthicalVector::normalized(d.axes, std::move(raw));
                } catch (const Error& e) {
                    fail(path + "/ethical_vector", std::string(to_string(e.code())) + ": " + e.what());
                }
            }
        }

        if (!p.contains("rules") || !p["rules"].is_array()) {
            fail(path + "/rules", "rules must be an array");
            return policy;
        }
        std::set<std::string> rule_ids;
        for (std::size_t i = 0; i < p["rules"].size(); ++i) {
            const std::string rp = path + "/rules/" + std::to_string(i);
            auto spec = parse_rule(p["rules"][i], rp);
            if (!spec) continue;
            if (!spec->id.empty() && !rule_ids.insert(spec->id).second) {
                fail(rp + "/id", "duplicate rule id '" + spec->id + "' within policy");
                continue;
            }
            try {
                policy.rules.push_back(compile_rule(*spec, d.resources));
            } catch (const Error& e) {
                fail(rp, std::string(to_string(e.code())) + ": " + e.what());
            }
        }
        return policy;
    }

    ActionConfig parse_actions(const json& obj, const std::string& path) {
        ActionConfig a;
        if (!obj.is_object()) {
            fail(path, "must be an object");
            return a;
        }
        check_keys(obj, path, {"warn_message", "block", "escalation"});
        a.warn_message = get_string(obj, "warn_message", path, false, a.warn_message);
        if (obj.contains("block")) {
            const json& b = obj["block"];
            const std::string bp = path + "/block";
            check_keys(b, bp, {"message", "notify", "log"});
            a.block.message = get_string(b, "message", bp, false, a.block.message);
            a.block.notify = get_bool(b, "notify", bp, a.block.notify);
            a.block.log = get_bool(b, "log", bp, a.block.log);
        }
        if (obj.contains("escalation")) {
            const json& e = obj["escalation"];
            const std::string ep = path + "/escalation";
            check_keys(e, ep, {"enabled", "repeat_threshold", "window_seconds", "restriction"});
            a.escalation.enabled = get_bool(e, "enabled", ep, a.escalation.enabled);
            a.escalation.repeat_threshold = get_int(e, "repeat_threshold", ep, a.escalation.repeat_threshold);
            a.escalation.window_seconds = get_int(e, "window_seconds", ep, a.escalation.window_seconds);
            const std::string r = get_string(e, "restriction", ep, false, "temp_block");
            if (r == "human_review") a.escalation.restriction = RestrictionKind::HumanReview;
            else if (r == "temp_block") a.escalation.restriction = RestrictionKind::TempBlock;
            else fail(ep + "/restriction", "restriction must be temp_block or human_review");
            if (a.escalation.repeat_threshold < 1) fail(ep + "/repeat_threshold", "must be >= 1");
            if (a.escalation.window_seconds < 1) fail(ep + "/window_seconds", "must be >= 1");
        }
        return a;
    }

    UpstreamConfig parse_upstream(const json& obj, const std::string& path) {
        UpstreamConfig u;
        if (!obj.is_object()) {
            fail(path, "must be an object");
            return u;
        }
        check_keys(obj, path, {"base_url", "mode", "timeout_ms", "auth_token_env", "model"});
        u.base_url = get_string(obj, "base_url", path, false);
        const std::string mode = get_string(obj, "mode", path, false, "mock");
        if (mode == "live") u.mode = UpstreamMode::Live;
        else if (mode != "mock") fail(path + "/mode", "mode must be live or mock");
        u.timeout_ms = get_int(obj, "timeout_ms", path, u.timeout_ms);
        if (u.timeout_ms < 1) fail(path + "/timeout_ms", "must be >= 1");
        u.auth_token_env = get_string(obj, "auth_token_env", path, false);
        u.model = get_string(obj, "model", path, false);
        if (u.mode == UpstreamMode::Live && u.base_url.empty()) fail(path + "/base_url", "live mode requires base_url");
        return u;
    }

    Assistant parse_assistant(const json& a, const std::string& path, const Deployment& d) {
        Assistant out;
        if (!a.is_object()) {
            fail(path, "assistant must be an object");
            return out;
        }
        check_keys(a, path, {"id", "system_prompt", "conflict_strategy", "allow_blocking_conflicts", "actions", "upstream",
                             "input_policies", "output_policies"});
        out.id = get_string(a, "id", path, true);
        out.system_prompt = get_string(a, "system_prompt", path, false);
        const std::string strategy = get_string(a, "conflict_strategy", path, false, "hybrid");
        if (const auto m = parse_resolution_method(strategy)) out.conflict_strategy = *m;
        else fail(path + "/conflict_strategy", "unknown conflict strategy '" + strategy + "'");
        out.allow_blocking_conflicts = get_bool(a, "allow_blocking_conflicts", path, false);
        if (a.contains("actions")) out.actions = parse_actions(a["actions"], path + "/actions");
        if (a.contains("upstream")) out.upstream = parse_upstream(a["upstream"], path + "/upstream");

        std::set<std::string> policy_ids;
        std::set<int> priorities;
        const auto parse_list = [&](const char* key, Direction dir, std::vector<Policy>& into) {
            if (!a.contains(key)) return;
            if (!a[key].is_array()) {
                fail(path + "/" + key, "must be an array");
                return;
            }
            for (std::size_t i = 0; i < a[key].size(); ++i) {
                const std::string pp = path + "/" + key + "/" + std::to_string(i);
                auto policy = parse_policy(a[key][i], pp, dir, d);
                if (!policy) continue;
                if (!policy->id.empty() && !policy_ids.insert(policy->id).second) {
                    fail(pp + "/id", "duplicate policy id '" + policy->id + "' within assistant");
                }
                if (!priorities.insert(policy->priority).second) {
                    fail(pp + "/priority", "DuplicatePriority: priority " + std::to_string(policy->priority) +
                                               " already used in this assistant");
                }
                into.push_back(std::move(*policy));
            }
        };
        parse_list("input_policies", Direction::Input, out.input_policies);
        parse_list("output_policies", Direction::Output, out.output_policies);
        return out;
    }

    std::filesystem::path base_dir_;
    std::vector<ValidationFinding> findings_;
};

} // namespace

std::vector<const Policy*> Assistant::policies(Direction direction) const {
    const auto& list = direction == Direction::Input ? input_policies : output_policies;
    std::vector<const Policy*> out;
    for (const auto& p : list) out.push_back(&p);
    std::stable_sort(out.begin(), out.end(), [](const Policy* a, const Policy* b) { return a->priority < b->priority; });
    return out;
}

const Policy* Assistant::find_policy(std::string_view policy_id) const {
    for (const auto* list : {&input_policies, &output_policies}) {
        for (const auto& p : *list) {
            if (p.id == policy_id) return &p;
        }
    }
    return nullptr;
}

const Assistant* Deployment::find(std::string_view assistant_id) const {
    for (const auto& a : assistants) {
        if (a.id == assistant_id) return &a;
    }
    return nullptr;
}

Deployment parse_deployment(const json& doc, const std::filesystem::path& base_dir) {
    return Parser(base_dir).run(doc);
}

Deployment load_deployment(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return parse_deployment(doc, path.parent_path());
}

ConflictReport static_conflict_analysis(const Assistant& assistant, const Deployment& deployment) {
    ConflictReport report;
    for (const Direction dir : {Direction::Input, Direction::Output}) {
        std::vector<GuardrailHandle> handles;
        for (const Policy* p : assistant.policies(dir)) handles.push_back(p->handle());
        analyze_guardrails(to_string(dir), handles, deployment.context_universe, deployment.thresholds,
                           assistant.allow_blocking_conflicts, report);
    }
    return report;
}

ConflictReport analyze_deployment(const Deployment& deployment) {
    ConflictReport all;
    for (const auto& a : deployment.assistants) {
        ConflictReport r = static_conflict_analysis(a, deployment);
        all.findings.insert(all.findings.end(), r.findings.begin(), r.findings.end());
        all.scenarios.insert(all.scenarios.end(), r.scenarios.begin(), r.scenarios.end());
    }
    return all;
}

void require_deployable(const Deployment& deployment) {
    std::vector<ValidationFinding> findings;
    for (std::size_t i = 0; i < deployment.assistants.size(); ++i) {
        const auto& a = deployment.assistants[i];
        for (const auto& f : static_conflict_analysis(a, deployment).findings) {
            if (f.severity != FindingSeverity::Blocking) continue;
            findings.push_back({"/assistants/" + std::to_string(i),
                                "case1 conflict between '" + f.policy_a + "' and '" + f.policy_b + "' (" +
                                    f.direction + "): complete and permanent opposition; set "
                                    "allow_blocking_conflicts to deploy anyway"});
        }
    }
    if (!findings.empty()) throw ValidationError(std::move(findings));
}

std::vector<ValidationFinding> lint_deployment(const Deployment& deployment) {
    std::vector<ValidationFinding> out;
    for (std::size_t i = 0; i < deployment.assistants.size(); ++i) {
        const auto& a = deployment.assistants[i];
        for (const auto* list : {&a.input_policies, &a.output_policies}) {
            for (const auto& p : *list) {
                for (const auto& r : p.rules) {
                    const auto* nl = std::get_if<NaturalLanguageBody>(&r.spec().body);
                    if (nl && nl->intent == RuleIntent::Encourage) {
                        out.push_back({"/assistants/" + std::to_string(i),
                                       "rule '" + r.id() + "' in policy '" + p.id +
                                           "' is an encouragement rule; it is recorded but never enforced"});
                    }
                }
            }
        }
        if (a.conflict_strategy == ResolutionMethod::Contextual && deployment.context_universe.empty()) {
            out.push_back({"/assistants/" + std::to_string(i),
                           "contextual conflict strategy configured but no contexts or tags are declared"});
        }
    }
    return out;
}

GuardedVerdict evaluate_guarded(const Deployment& deployment, const Assistant& assistant, Direction direction,
                                const std::string& text, const ContextSet& context,
                                const std::set<std::string>& excluded, bool resolve_conflicts) {
    const ConflictThresholds& th = deployment.thresholds;
    std::vector<const Policy*> policies;
    for (const Policy* p : assistant.policies(direction)) {
        if (!excluded.contains(p->id)) policies.push_back(p);
    }

    GuardedVerdict out;
    if (resolve_conflicts && policies.size() >= 2) {
        std::vector<GuardrailHandle> handles;
        for (const Policy* p : policies) handles.push_back(p->handle());
        const auto active = contextual_activation(context, handles);

        std::set<std::string> conflict_ids;
        std::optional<std::pair<std::size_t, std::size_t>> first_pair;
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                if (dot(active[i].vector, active[j].vector) <= th.theta) {
                    conflict_ids.insert(active[i].policy_id);
                    conflict_ids.insert(active[j].policy_id);
                    if (!first_pair) first_pair.emplace(i, j);
                }
            }
        }

        // opposed guardrails only matter when they disagree on this text
        std::set<Action> actions;
        for (const Policy* p : policies) {
            if (conflict_ids.contains(p->id)) actions.insert(evaluate_policy(*p, text, context).action);
        }
        if (actions.size() > 1) {
            std::vector<GuardrailHandle> contenders;
            std::vector<GuardrailHandle> contenders_unmasked;
            for (const auto& g : active) {
                if (conflict_ids.contains(g.policy_id)) contenders.push_back(g);
            }
            for (const auto& g : handles) {
                if (conflict_ids.contains(g.policy_id)) contenders_unmasked.push_back(g);
            }

            std::optional<Resolution> resolution;
            switch (assistant.conflict_strategy) {
                case ResolutionMethod::WeightedAverage: resolution = weighted_average(contenders, th); break;
                case ResolutionMethod::Precedence:      resolution = precedence_resolve(contenders); break;
                case ResolutionMethod::Hybrid:          resolution = hybrid_resolve(contenders, th); break;
                case ResolutionMethod::Contextual:
                    resolution = contextual_resolve(context, contenders_unmasked, th);
                    break;
                case ResolutionMethod::Human: break;
            }
            const auto governing = resolution ? governing_policy(*resolution, contenders) : std::nullopt;
            if (!governing) {
                const auto find_handle = [&](const std::string& id) {
                    return *std::find_if(handles.begin(), handles.end(),
                                         [&](const GuardrailHandle& g) { return g.policy_id == id; });
                };
                ConflictSnapshot snap;
                snap.direction = std::string(to_string(direction));
                snap.policy_ids.assign(conflict_ids.begin(), conflict_ids.end());
                snap.conflict = classify_pair(find_handle(active[first_pair->first].policy_id),
                                              find_handle(active[first_pair->second].policy_id),
                                              deployment.context_universe, th);
                if (snap.conflict.kind == ConflictKind::Case1 || snap.conflict.kind == ConflictKind::Case3) {
                    snap.conflict.variant = detect_variant(active, th);
                }
                snap.attempted = assistant.conflict_strategy;
                out.unresolved = std::move(snap);
                return out;
            }
            for (const auto& id : conflict_ids) {
                if (id != *governing) out.losers.insert(id);
            }
            out.resolution = std::move(resolution);
        }
    }

    std::vector<const Policy*> governing_set;
    for (const Policy* p : policies) {
        if (!out.losers.contains(p->id)) governing_set.push_back(p);
    }
    out.verdict = evaluate_assistant_side(governing_set, text, context);
    return out;
}

} // namespace guardgate
