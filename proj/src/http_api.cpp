#include "guardgate/http_api.hpp"

#include "guardgate/error.hpp"
#include "guardgate/serialize.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace guardgate::http {

using nlohmann::json;

namespace {

void send(httplib::Response& res, const GatewayResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    int status = 400;
    switch (e.code()) {
        case ErrorCode::ParseError: status = 400; break;
        case ErrorCode::ValidationFailed: status = 422; break;
        default: status = 400; break;
    }
    send(res, {status, error_json(e)});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        send_error(res, Error(ErrorCode::ParseError, std::string("request body is not valid JSON: ") + e.what()));
        return std::nullopt;
    }
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace

ContextSet parse_context_header(const std::string& value) {
    ContextSet out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const auto comma = value.find(',', pos);
        std::string tag = trim(value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!tag.empty()) out.insert(std::move(tag));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void register_routes(httplib::Server& server, Gateway& gateway) {
    server.Post("/v1/chat/completions", [&gateway](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        ChatCall call;
        call.session_id = req.get_header_value("X-Session-Id");
        if (call.session_id.empty()) {
            send_error(res, Error(ErrorCode::ParseError, "missing X-Session-Id header"));
            return;
        }
        call.assistant_id = req.get_header_value("X-Assistant-Id");
        call.context = parse_context_header(req.get_header_value("X-Context-Tags"));
        call.body = std::move(*body);
        send(res, gateway.handle_chat(call));
    });

    server.Get("/admin/assistants", [&gateway](const httplib::Request&, httplib::Response& res) {
        send(res, gateway.list_assistants());
    });

    server.Post("/admin/assistants", [&gateway](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        const bool validate_only = req.has_param("validate_only") && req.get_param_value("validate_only") == "true";
        send(res, gateway.load_config(*body, validate_only));
    });

    server.Post(R"(/admin/assistants/([^/]+)/analyze)", [&gateway](const httplib::Request& req, httplib::Response& res) {
        send(res, gateway.analyze(req.matches[1]));
    });

    server.Get("/admin/audit", [&gateway](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> session;
        if (req.has_param("session")) session = req.get_param_value("session");
        send(res, gateway.audit(session));
    });

    server.Get("/admin/reviews", [&gateway](const httplib::Request& req, httplib::Response& res) {
        std::optional<ReviewStatus> status;
        if (req.has_param("status")) {
            status = parse_review_status(req.get_param_value("status"));
            if (!status) {
                send(res, {422, error_json(ValidationError(std::vector<ValidationFinding>{{"/status", "unknown review status"}}))});
                return;
            }
        }
        send(res, gateway.reviews(status));
    });

    server.Get(R"(/admin/reviews/([^/]+))", [&gateway](const httplib::Request& req, httplib::Response& res) {
        send(res, gateway.review(req.matches[1]));
    });

    server.Post(R"(/admin/reviews/([^/]+)/resolve)", [&gateway](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        ReviewDecision decision;
        const std::string kind = body->value("decision", "");
        if (kind == "allow") {
            decision.kind = ReviewDecision::Kind::Allow;
        } else if (kind == "block") {
            decision.kind = ReviewDecision::Kind::Block;
        } else if (kind == "precedence") {
            decision.kind = ReviewDecision::Kind::Precedence;
            decision.policy_id = body->value("policy_id", "");
            if (decision.policy_id.empty()) {
                send(res, {422, error_json(ValidationError(std::vector<ValidationFinding>{{"/policy_id", "required for precedence decisions"}}))});
                return;
            }
        } else {
            send(res, {422, error_json(ValidationError(std::vector<ValidationFinding>{{"/decision", "expected allow, block or precedence"}}))});
            return;
        }
        std::string operator_id = body->value("operator_id", "");
        if (operator_id.empty()) operator_id = req.get_header_value("X-Operator-Id");
        if (operator_id.empty()) {
            send(res, {422, error_json(ValidationError(std::vector<ValidationFinding>{{"/operator_id", "required"}}))});
            return;
        }
        send(res, gateway.resolve_review(req.matches[1], decision, operator_id));
    });

    server.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        spdlog::error("{} {} failed: {}", req.method, req.path, what);
        res.status = 500;
        res.set_content(json{{"error", "Internal"}, {"message", what}}.dump(), "application/json");
    });
}

} // namespace guardgate::http
