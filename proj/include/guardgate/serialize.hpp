#pragma once

#include "guardgate/conflict.hpp"
#include "guardgate/error.hpp"
#include "guardgate/policy.hpp"
#include "guardgate/review.hpp"
#include "guardgate/rules.hpp"

#include <json.hpp>

// nlohmann::json conversions with stable snake_case field names.
namespace guardgate {

void to_json(nlohmann::json& j, const MatchSpan& s);
void to_json(nlohmann::json& j, const Finding& f);
void to_json(nlohmann::json& j, const TraceEntry& t);
void to_json(nlohmann::json& j, const Verdict& v);
void to_json(nlohmann::json& j, const ConflictCase& c);
void to_json(nlohmann::json& j, const PairFinding& f);
void to_json(nlohmann::json& j, const VariantScenario& s);
void to_json(nlohmann::json& j, const ConflictReport& r);
void to_json(nlohmann::json& j, const Resolution& r);
void to_json(nlohmann::json& j, const ConflictSnapshot& s);
void to_json(nlohmann::json& j, const ReviewItem& item);
void to_json(nlohmann::json& j, const ValidationFinding& f);

// {"error": code, "message": what, "findings": [...]} for API/CLI errors.
nlohmann::json error_json(const Error& e);

} // namespace guardgate
