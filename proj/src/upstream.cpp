#include "guardgate/upstream.hpp"

#include "guardgate/error.hpp"

#include <httplib.h>

#include <cstdlib>

namespace guardgate {

using nlohmann::json;

json to_wire(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", request.model}, {"messages", std::move(messages)}};
}

ChatRequest chat_request_from_wire(const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    ChatRequest req;
    if (body.contains("model")) {
        if (!body["model"].is_string()) throw Error(ErrorCode::ParseError, "model must be a string");
        req.model = body["model"].get<std::string>();
    }
    if (!body.contains("messages") || !body["messages"].is_array() || body["messages"].empty()) {
        throw Error(ErrorCode::ParseError, "messages must be a non-empty array");
    }
    for (const auto& m : body["messages"]) {
        if (!m.is_object() || !m.contains("role") || !m["role"].is_string() || !m.contains("content") ||
            !m["content"].is_string()) {
            throw Error(ErrorCode::ParseError, "each message needs string role and content");
        }
        const std::string role = m["role"].get<std::string>();
        if (role != "system" && role != "user" && role != "assistant") {
            throw Error(ErrorCode::ParseError, "unsupported message role '" + role + "'");
        }
        req.messages.push_back({role, m["content"].get<std::string>()});
    }
    return req;
}

UpstreamReply MockUpstream::complete(const ChatRequest& request, const UpstreamConfig&) {
    Responder responder;
    {
        std::lock_guard lock(mu_);
        calls_.push_back(to_wire(request));
        responder = responder_;
    }
    if (responder) return UpstreamReply{responder(request)};
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") return UpstreamReply{it->content};
    }
    return UpstreamReply{};
}

void MockUpstream::set_responder(Responder responder) {
    std::lock_guard lock(mu_);
    responder_ = std::move(responder);
}

std::vector<json> MockUpstream::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t MockUpstream::call_count() const {
    std::lock_guard lock(mu_);
    return calls_.size();
}

void MockUpstream::clear() {
    std::lock_guard lock(mu_);
    calls_.clear();
}

UpstreamReply HttpUpstream::complete(const ChatRequest& request, const UpstreamConfig& config) {
    // Split "scheme://host:port/prefix" into the client origin and a path prefix.
    std::string origin = config.base_url;
    std::string prefix;
    if (const auto scheme = origin.find("://"); scheme != std::string::npos) {
        if (const auto slash = origin.find('/', scheme + 3); slash != std::string::npos) {
            prefix = origin.substr(slash);
            origin.resize(slash);
        }
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    const auto seconds = config.timeout_ms / 1000;
    const auto micros = (config.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    httplib::Headers headers;
    if (!config.auth_token_env.empty()) {
        if (const char* token = std::getenv(config.auth_token_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    const auto res = client.Post(prefix + "/v1/chat/completions", headers, to_wire(request).dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
            throw Error(ErrorCode::UpstreamTimeout, "upstream timed out: " + httplib::to_string(err));
        }
        throw Error(ErrorCode::UpstreamError, "upstream request failed: " + httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::UpstreamError, "upstream returned HTTP " + std::to_string(res->status));
    }
    try {
        const json body = json::parse(res->body);
        return UpstreamReply{body.at("choices").at(0).at("message").at("content").get<std::string>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::UpstreamError, std::string("malformed upstream reply: ") + e.what());
    }
}

} // namespace guardgate
