#pragma once

#include "guardgate/audit.hpp"
#include "guardgate/config.hpp"
#include "guardgate/restriction.hpp"
#include "guardgate/review.hpp"
#include "guardgate/upstream.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

namespace guardgate {

using Clock = std::function<std::int64_t()>;  // milliseconds, monotone

Clock system_clock_ms();

struct GatewayOptions {
    Clock clock;
    std::optional<std::filesystem::path> audit_path;
    // Used for assistants in Mock mode; defaults to an echoing MockUpstream.
    std::shared_ptr<Upstream> mock_upstream;
    // Used for assistants in Live mode; defaults to HttpUpstream.
    std::shared_ptr<Upstream> live_upstream;
    // Held interactions older than this resolve as Block.
    std::int64_t hold_ttl_ms = 15 * 60 * 1000;
    std::size_t review_capacity = 10000;
    // Base directory for relative lexicon/model paths in configs posted to
    // the admin API.
    std::filesystem::path config_base_dir;
    // Receives block notifications (ActionConfig block.notify).
    std::function<void(const std::string&)> notifier;
};

struct ChatCall {
    std::string session_id;
    std::string assistant_id;  // empty: first configured assistant
    ContextSet context;
    nlohmann::json body;
};

// HTTP status plus JSON body; shared by the HTTP layer and in-process callers.
struct GatewayResponse {
    int status = 200;
    nlohmann::json body;
};

// Proxies chat traffic through an assistant's input and output policies.
//
// Per request: restriction gate -> input policies (with conflict resolution)
// -> Block: refusal, no upstream call | Escalate/unresolved conflict: hold and
// file a ReviewItem | otherwise forward the (redacted) messages plus the
// system prompt -> output policies on the reply -> respond. Every evaluated
// message side appends one AuditRecord.
class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    // Swaps in a compiled deployment. The caller is responsible for having
    // validated it (see load_config()).
    void load(std::shared_ptr<const Deployment> deployment);
    std::shared_ptr<const Deployment> deployment() const;

    GatewayResponse handle_chat(const ChatCall& call);

    GatewayResponse resolve_review(const std::string& review_id, const ReviewDecision& decision,
                                   const std::string& operator_id);

    // Admin surface.
    GatewayResponse load_config(const nlohmann::json& doc, bool validate_only);
    GatewayResponse list_assistants() const;
    GatewayResponse analyze(const std::string& assistant_id) const;
    GatewayResponse audit(const std::optional<std::string>& session_id) const;
    GatewayResponse reviews(const std::optional<ReviewStatus>& status) const;
    GatewayResponse review(const std::string& review_id) const;

    // Resolves expired held interactions as Block.
    void expire_held();

    AuditLog& audit_log() { return *audit_; }
    ReviewQueue& review_queue() { return reviews_; }
    RestrictionTracker& restrictions() { return restrictions_; }

private:
    struct Exchange;
    struct Held;
    struct SideResult;

    SideResult evaluate_side(const Exchange& ex, Direction direction, const std::vector<std::string>& texts,
                             const std::set<std::string>& excluded, bool resolve_conflicts) const;

    GatewayResponse run_input(Exchange ex, const std::set<std::string>& excluded, bool resumed,
                              std::optional<std::string> review_id);
    GatewayResponse run_output(Exchange ex, std::string reply, const std::set<std::string>& excluded, bool resumed,
                               std::optional<std::string> review_id);
    GatewayResponse hold(Exchange ex, Direction stage, std::string reply, const SideResult& side,
                         ReviewReason reason, std::optional<ConflictSnapshot> conflict, const std::string& detail,
                         const std::string& fingerprint);
    GatewayResponse refusal(const Exchange& ex, const std::string& message, const nlohmann::json& guardrails) const;
    GatewayResponse completion(const Exchange& ex, const std::string& content, const nlohmann::json& guardrails) const;
    AuditRecord audit_side(const Exchange& ex, Direction direction, Action action,
                           std::vector<std::string> triggered, std::size_t redactions, bool upstream_called,
                           std::optional<std::string> review_id, std::string note);
    Upstream& upstream_for(const Assistant& assistant);
    std::shared_ptr<std::mutex> session_mutex(const std::string& session_id);
    void expire_held_locked(std::int64_t now);

    GatewayOptions options_;
    std::unique_ptr<AuditLog> audit_;
    ReviewQueue reviews_;
    RestrictionTracker restrictions_;

    mutable std::mutex deployment_mu_;
    std::shared_ptr<const Deployment> deployment_;

    std::mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;

    mutable std::mutex held_mu_;
    std::map<std::string, std::unique_ptr<Held>> held_;              // review id -> held interaction
    std::map<std::string, nlohmann::json> outcomes_;                  // review id -> final response
    mutable std::atomic<std::uint64_t> next_completion_id_{1};
};

} // namespace guardgate
