#pragma once

#include "guardgate/config.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace guardgate {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
};

// {"model": ..., "messages": [{"role": ..., "content": ...}, ...]}
nlohmann::json to_wire(const ChatRequest& request);

// Accepts the same shape; throws ParseError.
ChatRequest chat_request_from_wire(const nlohmann::json& body);

struct UpstreamReply {
    std::string content;
};

class Upstream {
public:
    virtual ~Upstream() = default;

    // Throws UpstreamTimeout or UpstreamError.
    virtual UpstreamReply complete(const ChatRequest& request, const UpstreamConfig& config) = 0;
};

// In-process provider for Mock mode. Records every wire body it receives and
// by default echoes the last user message back.
class MockUpstream : public Upstream {
public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    MockUpstream() = default;
    explicit MockUpstream(Responder responder) : responder_(std::move(responder)) {}

    UpstreamReply complete(const ChatRequest& request, const UpstreamConfig& config) override;

    void set_responder(Responder responder);
    std::vector<nlohmann::json> calls() const;
    std::size_t call_count() const;
    void clear();

private:
    mutable std::mutex mu_;
    Responder responder_;
    std::vector<nlohmann::json> calls_;
};

// OpenAI-compatible provider reached over HTTP(S) at
// `<base_url>/v1/chat/completions`. The bearer token is read from the
// environment variable named by UpstreamConfig::auth_token_env.
class HttpUpstream : public Upstream {
public:
    UpstreamReply complete(const ChatRequest& request, const UpstreamConfig& config) override;
};

} // namespace guardgate
