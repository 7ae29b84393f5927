// Guarded chat-completions proxy.
//
//   GG_CONFIG        assistant configuration (required)
//   GG_UPSTREAM_URL  overrides every assistant's upstream base_url
//   GG_UPSTREAM_MODE live|mock, overrides every assistant's mode
//   GG_AUDIT_PATH    JSONL audit log (default: in-memory only)
//   GG_LISTEN_ADDR   host:port (default 127.0.0.1:8080)
#include "guardgate/config.hpp"
#include "guardgate/error.hpp"
#include "guardgate/gateway.hpp"
#include "guardgate/http_api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

} // namespace

int main() {
    using namespace guardgate;

    const std::string config_path = env_or("GG_CONFIG", "");
    if (config_path.empty()) {
        spdlog::critical("GG_CONFIG is not set");
        return 2;
    }
    const std::string upstream_url = env_or("GG_UPSTREAM_URL", "");
    const std::string upstream_mode = env_or("GG_UPSTREAM_MODE", "");
    const std::string listen = env_or("GG_LISTEN_ADDR", "127.0.0.1:8080");
    if (!upstream_mode.empty() && upstream_mode != "live" && upstream_mode != "mock") {
        spdlog::critical("GG_UPSTREAM_MODE must be live or mock");
        return 2;
    }

    GatewayOptions options;
    if (const auto audit = env_or("GG_AUDIT_PATH", ""); !audit.empty()) options.audit_path = audit;
    options.config_base_dir = std::filesystem::path(config_path).parent_path();
    Gateway gateway(std::move(options));

    try {
        std::ifstream in(config_path);
        if (!in) throw Error(ErrorCode::IoError, "cannot read " + config_path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        for (auto& a : doc["assistants"]) {
            if (!upstream_url.empty()) a["upstream"]["base_url"] = upstream_url;
            if (!upstream_mode.empty()) a["upstream"]["mode"] = upstream_mode;
        }
        const auto r = gateway.load_config(doc, false);
        if (r.status != 200) {
            spdlog::critical("configuration rejected: {}", r.body.dump());
            return 2;
        }
    } catch (const Error& e) {
        spdlog::critical("{}", e.what());
        return 2;
    }

    const auto colon = listen.rfind(':');
    const std::string host = colon == std::string::npos ? listen : listen.substr(0, colon);
    const int port = colon == std::string::npos ? 8080 : std::atoi(listen.c_str() + colon + 1);

    httplib::Server server;
    http::register_routes(server, gateway);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    spdlog::info("listening on {}:{}", host, port);
    if (!server.listen(host, port)) {
        spdlog::critical("could not listen on {}", listen);
        return 1;
    }
    return 0;
}
