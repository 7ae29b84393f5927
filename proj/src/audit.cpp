#include "guardgate/audit.hpp"

#include "guardgate/error.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace guardgate {

using nlohmann::json;

void to_json(json& j, const AuditRecord& r) {
    j = json{{"seq", r.seq},
             {"timestamp", r.timestamp_ms},
             {"session_id", r.session_id},
             {"direction", r.direction},
             {"assistant_id", r.assistant_id},
             {"verdict_action", r.verdict_action},
             {"triggered_rule_ids", r.triggered_rule_ids},
             {"redaction_count", r.redaction_count},
             {"upstream_called", r.upstream_called}};
    j["review_id"] = r.review_id ? json(*r.review_id) : json(nullptr);
    if (!r.note.empty()) j["note"] = r.note;
}

void from_json(const json& j, AuditRecord& r) {
    r.seq = j.at("seq").get<std::uint64_t>();
    r.timestamp_ms = j.at("timestamp").get<std::int64_t>();
    r.session_id = j.at("session_id").get<std::string>();
    r.direction = j.at("direction").get<std::string>();
    r.assistant_id = j.at("assistant_id").get<std::string>();
    r.verdict_action = j.at("verdict_action").get<std::string>();
    r.triggered_rule_ids = j.at("triggered_rule_ids").get<std::vector<std::string>>();
    r.redaction_count = j.at("redaction_count").get<std::size_t>();
    r.upstream_called = j.at("upstream_called").get<bool>();
    if (j.contains("review_id") && !j["review_id"].is_null()) r.review_id = j["review_id"].get<std::string>();
    r.note = j.value("note", std::string{});
}

AuditLog::AuditLog(std::optional<std::filesystem::path> path) {
    if (!path) return;
    fd_ = ::open(path->c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw Error(ErrorCode::IoError, "cannot open audit log " + path->string() + ": " + std::strerror(errno));
    }
}

AuditLog::~AuditLog() {
    if (fd_ >= 0) ::close(fd_);
}

AuditRecord AuditLog::append(AuditRecord record) {
    std::lock_guard lock(mu_);
    record.seq = next_seq_++;
    auto& last = last_timestamp_[record.session_id];
    if (record.timestamp_ms <= last) record.timestamp_ms = last + 1;
    last = record.timestamp_ms;

    if (fd_ >= 0) {
        const std::string line = json(record).dump() + "\n";
        std::size_t written = 0;
        while (written < line.size()) {
            const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::IoError, std::string("audit write failed: ") + std::strerror(errno));
            }
            written += static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0) {
            throw Error(ErrorCode::IoError, std::string("audit fsync failed: ") + std::strerror(errno));
        }
    }
    records_.push_back(record);
    return record;
}

std::vector<AuditRecord> AuditLog::query(const std::optional<std::string>& session_id) const {
    std::lock_guard lock(mu_);
    if (!session_id) return records_;
    std::vector<AuditRecord> out;
    for (const auto& r : records_) {
        if (r.session_id == *session_id) out.push_back(r);
    }
    return out;
}

std::size_t AuditLog::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

std::vector<AuditRecord> AuditLog::read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open audit log " + path.string());
    std::vector<AuditRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(json::parse(line).get<AuditRecord>());
    }
    return out;
}

} // namespace guardgate
