#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace guardgate {

struct AuditRecord {
    std::uint64_t seq = 0;
    std::int64_t timestamp_ms = 0;
    std::string session_id;
    std::string direction;  // input | output
    std::string assistant_id;
    std::string verdict_action;
    std::vector<std::string> triggered_rule_ids;
    std::size_t redaction_count = 0;
    bool upstream_called = false;
    std::optional<std::string> review_id;
    std::string note;
};

void to_json(nlohmann::json& j, const AuditRecord& r);
void from_json(const nlohmann::json& j, AuditRecord& r);

// Append-only audit trail. Every record is kept in memory for queries and,
// when a path is given, written as one JSON line followed by fsync. Appends
// are serialized; timestamps are made strictly increasing per session.
class AuditLog {
public:
    explicit AuditLog(std::optional<std::filesystem::path> path = std::nullopt);
    ~AuditLog();

    AuditLog(const AuditLog&) = delete;
    AuditLog& operator=(const AuditLog&) = delete;

    AuditRecord append(AuditRecord record);

    // Records in append order, optionally restricted to one session.
    std::vector<AuditRecord> query(const std::optional<std::string>& session_id = std::nullopt) const;
    std::size_t size() const;

    static std::vector<AuditRecord> read_file(const std::filesystem::path& path);

private:
    mutable std::mutex mu_;
    int fd_ = -1;
    std::uint64_t next_seq_ = 1;
    std::vector<AuditRecord> records_;
    std::map<std::string, std::int64_t> last_timestamp_;
};

} // namespace guardgate
