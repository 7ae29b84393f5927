#include "guardgate/conflict.hpp"

#include "guardgate/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace guardgate {

namespace {

double norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

bool same_space(const EthicalVector& a, const EthicalVector& b) {
    if (a.dimension() != b.dimension()) return false;
    if (a.space() == b.space()) return true;
    if (!a.space() || !b.space()) return false;
    return *a.space() == *b.space();
}

bool axis_live(const std::vector<std::string>& tags, const ContextSet& context) {
    if (tags.empty()) return true;
    return std::any_of(tags.begin(), tags.end(), [&](const std::string& t) { return context.contains(t); });
}

bool guardrail_live(const GuardrailHandle& g, const ContextSet& context) {
    if (g.context_tags.empty()) return true;
    return std::any_of(g.context_tags.begin(), g.context_tags.end(),
                       [&](const std::string& t) { return context.contains(t); });
}

std::vector<double> weighted_sum(std::span<const GuardrailHandle> guardrails) {
    std::vector<double> sum;
    for (const auto& g : guardrails) {
        if (sum.empty()) sum.assign(g.vector.dimension(), 0.0);
        if (g.vector.dimension() != sum.size() || !same_space(g.vector, guardrails.front().vector)) {
            throw Error(ErrorCode::AxisMismatch, "guardrail '" + g.policy_id + "' uses a different axis list");
        }
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += g.weight * g.vector.values()[k];
    }
    return sum;
}

} // namespace

std::shared_ptr<const AxisSpace> AxisSpace::make(std::vector<std::string> names,
                                                 std::vector<std::vector<std::string>> tags) {
    auto space = std::make_shared<AxisSpace>();
    tags.resize(names.size());
    space->names = std::move(names);
    space->tags = std::move(tags);
    return space;
}

EthicalVector EthicalVector::normalized(std::shared_ptr<const AxisSpace> space, std::vector<double> raw) {
    if (raw.size() < 2) throw Error(ErrorCode::InvalidVector, "ethical vectors need at least two axes");
    if (space && space->dimension() != raw.size()) {
        throw Error(ErrorCode::AxisMismatch, "ethical vector has " + std::to_string(raw.size()) +
                                                 " components but the deployment declares " +
                                                 std::to_string(space->dimension()) + " axes");
    }
    if (!std::all_of(raw.begin(), raw.end(), [](double x) { return std::isfinite(x); })) {
        throw Error(ErrorCode::InvalidVector, "ethical vector has non-finite components");
    }
    const double n = norm(raw);
    if (n == 0.0) throw Error(ErrorCode::InvalidVector, "ethical vector must be non-zero");
    for (auto& x : raw) x /= n;
    EthicalVector v;
    v.space_ = std::move(space);
    v.values_ = std::move(raw);
    return v;
}

double dot(const EthicalVector& a, const EthicalVector& b) {
    if (!same_space(a, b)) throw Error(ErrorCode::AxisMismatch, "ethical vectors use different axis lists");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.dimension(); ++k) acc += a.values()[k] * b.values()[k];
    return acc;
}

std::optional<EthicalVector> mask_for_context(const EthicalVector& v, const ContextSet& context) {
    if (!v.space()) return v;
    std::vector<double> masked = v.values();
    for (std::size_t k = 0; k < masked.size(); ++k) {
        if (!axis_live(v.space()->tags[k], context)) masked[k] = 0.0;
    }
    if (norm(masked) == 0.0) return std::nullopt;
    return EthicalVector::normalized(v.space(), std::move(masked));
}

std::vector<GuardrailHandle> contextual_activation(const ContextSet& context,
                                                   std::span<const GuardrailHandle> guardrails) {
    std::vector<GuardrailHandle> active;
    for (const auto& g : guardrails) {
        if (!guardrail_live(g, context)) continue;
        auto masked = mask_for_context(g.vector, context);
        if (!masked) continue;
        GuardrailHandle copy = g;
        copy.vector = std::move(*masked);
        active.push_back(std::move(copy));
    }
    return active;
}

ConflictKind classify_dots(std::span<const double> dots, const ConflictThresholds& th) {
    if (dots.empty()) return ConflictKind::NoConflict;
    const auto [lo, hi] = std::minmax_element(dots.begin(), dots.end());
    const double opposed = -1.0 + th.epsilon;
    if (*hi <= opposed) return ConflictKind::Case1;
    if (*lo <= opposed) return ConflictKind::Case3;
    if (*hi <= th.theta) return ConflictKind::Case2;
    if (*lo <= th.theta) return ConflictKind::Case4;
    return ConflictKind::NoConflict;
}

ConflictCase classify_pair(const GuardrailHandle& a, const GuardrailHandle& b,
                           std::span<const ContextSet> contexts, const ConflictThresholds& th) {
    if (!same_space(a.vector, b.vector)) {
        throw Error(ErrorCode::AxisMismatch,
                    "guardrails '" + a.policy_id + "' and '" + b.policy_id + "' use different axis lists");
    }
    std::vector<ContextSet> universe;
    universe.emplace_back();
    for (const auto& c : contexts) {
        if (std::find(universe.begin(), universe.end(), c) == universe.end()) universe.push_back(c);
    }

    std::vector<double> dots;
    ConflictCase out;
    for (const auto& context : universe) {
        const GuardrailHandle pair[] = {a, b};
        const auto active = contextual_activation(context, pair);
        if (active.size() != 2) continue;
        const double d = dot(active[0].vector, active[1].vector);
        dots.push_back(d);
        if (d <= th.theta) out.contexts_where_opposed.push_back(context);
    }
    out.kind = classify_dots(dots, th);
    if (dots.empty()) {
        out.min_dot = out.max_dot = out.dot = std::numeric_limits<double>::quiet_NaN();
    } else {
        out.min_dot = *std::min_element(dots.begin(), dots.end());
        out.max_dot = *std::max_element(dots.begin(), dots.end());
        out.dot = out.min_dot;
    }
    return out;
}

std::optional<Variant> detect_variant(std::span<const GuardrailHandle> active, const ConflictThresholds& th) {
    const double opposed = -1.0 + th.epsilon;
    std::vector<bool> in_opposition(active.size(), false);
    bool any = false;
    for (std::size_t i = 0; i < active.size(); ++i) {
        for (std::size_t j = i + 1; j < active.size(); ++j) {
            if (dot(active[i].vector, active[j].vector) <= opposed) {
                in_opposition[i] = in_opposition[j] = true;
                any = true;
            }
        }
    }
    if (!any) return std::nullopt;
    if (active.size() == 2) return Variant::I;
    const bool all_opposed = std::all_of(in_opposition.begin(), in_opposition.end(), [](bool b) { return b; });
    if (all_opposed && norm(weighted_sum(active)) < th.delta) return Variant::III;
    return Variant::II;
}

Resolution weighted_average(std::span<const GuardrailHandle> guardrails, const ConflictThresholds& th) {
    if (guardrails.empty()) throw Error(ErrorCode::InvalidVector, "weighted averaging needs at least one guardrail");
    Resolution r;
    r.method = ResolutionMethod::WeightedAverage;
    auto sum = weighted_sum(guardrails);
    if (norm(sum) < th.delta) {
        r.result = EthicallyBlind{};
    } else {
        r.result = DirectionResult{EthicalVector::normalized(guardrails.front().vector.space(), std::move(sum))};
    }
    return r;
}

Resolution precedence_resolve(std::span<const GuardrailHandle> guardrails) {
    if (guardrails.empty()) throw Error(ErrorCode::InvalidVector, "precedence needs at least one guardrail");
    std::set<int> seen;
    const GuardrailHandle* best = nullptr;
    for (const auto& g : guardrails) {
        if (!seen.insert(g.priority).second) {
            throw Error(ErrorCode::DuplicatePriority,
                        "priority " + std::to_string(g.priority) + " is used by more than one guardrail");
        }
        if (best == nullptr || g.priority < best->priority) best = &g;
    }
    Resolution r;
    r.method = ResolutionMethod::Precedence;
    r.result = WinnerResult{best->policy_id};
    return r;
}

Resolution hybrid_resolve(std::span<const GuardrailHandle> guardrails, const ConflictThresholds& th) {
    Resolution r = weighted_average(guardrails, th);
    if (r.is_blind()) {
        r = precedence_resolve(guardrails);
        r.alert = std::string(kConstrainedGuidanceAlert);
    }
    r.method = ResolutionMethod::Hybrid;
    return r;
}

Resolution contextual_resolve(const ContextSet& context, std::span<const GuardrailHandle> guardrails,
                              const ConflictThresholds& th) {
    const auto active = contextual_activation(context, guardrails);
    Resolution r;
    if (active.empty()) {
        r.result = EthicallyBlind{};
    } else if (active.size() == 1) {
        r.result = WinnerResult{active.front().policy_id};
    } else {
        r = weighted_average(active, th);
    }
    r.method = ResolutionMethod::Contextual;
    return r;
}

std::optional<std::string> governing_policy(const Resolution& resolution,
                                            std::span<const GuardrailHandle> guardrails) {
    if (const auto* w = std::get_if<WinnerResult>(&resolution.result)) return w->policy_id;
    const auto* d = std::get_if<DirectionResult>(&resolution.result);
    if (d == nullptr || guardrails.empty()) return std::nullopt;
    const GuardrailHandle* best = nullptr;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (const auto& g : guardrails) {
        const double v = dot(g.vector, d->direction);
        if (best == nullptr || v > best_dot || (v == best_dot && g.priority < best->priority)) {
            best = &g;
            best_dot = v;
        }
    }
    return best->policy_id;
}

std::size_t ConflictReport::count(FindingSeverity severity) const {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(),
                                                  [&](const PairFinding& f) { return f.severity == severity; }));
}

int ConflictReport::exit_status() const {
    if (count(FindingSeverity::Blocking) > 0) return 2;
    if (count(FindingSeverity::Warning) > 0) return 1;
    return 0;
}

void analyze_guardrails(std::string_view direction, std::span<const GuardrailHandle> guardrails,
                        std::span<const ContextSet> contexts, const ConflictThresholds& th,
                        bool allow_blocking, ConflictReport& report) {
    std::vector<ContextSet> universe;
    universe.emplace_back();
    for (const auto& c : contexts) {
        if (std::find(universe.begin(), universe.end(), c) == universe.end()) universe.push_back(c);
    }

    // Variant predictions per context, keyed by the context index.
    std::map<std::size_t, Variant> variant_by_context;
    for (std::size_t ci = 0; ci < universe.size(); ++ci) {
        const auto active = contextual_activation(universe[ci], guardrails);
        const auto variant = detect_variant(active, th);
        if (!variant) continue;
        variant_by_context.emplace(ci, *variant);
        VariantScenario s;
        s.direction = std::string(direction);
        s.context = universe[ci];
        for (const auto& g : active) s.active.push_back(g.policy_id);
        s.variant = *variant;
        report.scenarios.push_back(std::move(s));
    }

    for (std::size_t i = 0; i < guardrails.size(); ++i) {
        for (std::size_t j = i + 1; j < guardrails.size(); ++j) {
            PairFinding f;
            f.direction = std::string(direction);
            f.policy_a = guardrails[i].policy_id;
            f.policy_b = guardrails[j].policy_id;
            f.conflict = classify_pair(guardrails[i], guardrails[j], universe, th);
            switch (f.conflict.kind) {
                case ConflictKind::NoConflict: continue;
                case ConflictKind::Case1:
                    f.severity = allow_blocking ? FindingSeverity::Warning : FindingSeverity::Blocking;
                    f.overridden = allow_blocking;
                    break;
                case ConflictKind::Case3: f.severity = FindingSeverity::Warning; break;
                case ConflictKind::Case2:
                case ConflictKind::Case4: f.severity = FindingSeverity::Info; break;
            }
            if (f.conflict.kind == ConflictKind::Case1 || f.conflict.kind == ConflictKind::Case3) {
                // Variant of the first context in which this pair is completely opposed.
                for (std::size_t ci = 0; ci < universe.size(); ++ci) {
                    const GuardrailHandle pair[] = {guardrails[i], guardrails[j]};
                    const auto active_pair = contextual_activation(universe[ci], pair);
                    if (active_pair.size() != 2 ||
                        dot(active_pair[0].vector, active_pair[1].vector) > -1.0 + th.epsilon) {
                        continue;
                    }
                    if (const auto it = variant_by_context.find(ci); it != variant_by_context.end()) {
                        f.conflict.variant = it->second;
                    }
                    break;
                }
            }
            report.findings.push_back(std::move(f));
        }
    }
}

std::string_view to_string(ConflictKind kind) {
    switch (kind) {
        case ConflictKind::NoConflict: return "no_conflict";
        case ConflictKind::Case1:      return "case1";
        case ConflictKind::Case2:      return "case2";
        case ConflictKind::Case3:      return "case3";
        case ConflictKind::Case4:      return "case4";
    }
    return "unknown";
}

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::I:   return "I";
        case Variant::II:  return "II";
        case Variant::III: return "III";
    }
    return "unknown";
}

std::string_view to_string(ResolutionMethod method) {
    switch (method) {
        case ResolutionMethod::WeightedAverage: return "weighted_average";
        case ResolutionMethod::Precedence:      return "precedence";
        case ResolutionMethod::Hybrid:          return "hybrid";
        case ResolutionMethod::Contextual:      return "contextual";
        case ResolutionMethod::Human:           return "human";
    }
    return "unknown";
}

std::string_view to_string(FindingSeverity severity) {
    switch (severity) {
        case FindingSeverity::Info:     return "info";
        case FindingSeverity::Warning:  return "warning";
        case FindingSeverity::Blocking: return "blocking";
    }
    return "unknown";
}

std::optional<ResolutionMethod> parse_resolution_method(std::string_view s) {
    if (s == "weighted_average") return ResolutionMethod::WeightedAverage;
    if (s == "precedence") return ResolutionMethod::Precedence;
    if (s == "hybrid") return ResolutionMethod::Hybrid;
    if (s == "contextual") return ResolutionMethod::Contextual;
    if (s == "human") return ResolutionMethod::Human;
    return std::nullopt;
}

} // namespace guardgate
