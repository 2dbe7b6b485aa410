#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ac4a/checker.hpp"
#include "ac4a/json_io.hpp"

namespace ac4a {

enum class AuditKind { PermCreated, PermRemoved, AccessAllowed, AccessDenied, ModeChanged, PermAutoDeployed };
enum class Actor { User, System, Agent };

std::string_view to_string(AuditKind kind);
AuditKind parse_audit_kind(std::string_view text);
std::string_view to_string(Actor actor);
Actor parse_actor(std::string_view text);

struct AuditRecord {
    std::uint64_t seq = 0;
    std::string timestamp;  // ISO 8601, UTC
    AuditKind kind = AuditKind::AccessAllowed;
    std::string subject;  // application id
    Json detail;
    Actor actor = Actor::System;
};

Json audit_record_to_json(const AuditRecord& record);
AuditRecord audit_record_from_json(const Json& j);

struct AuditFilter {
    std::optional<AuditKind> kind;
    std::optional<std::string> app;
    std::optional<std::string> from_time;  // inclusive, ISO 8601
    std::optional<std::string> to_time;    // exclusive
    std::uint64_t after_seq = 0;
    std::size_t limit = 100;
};

inline constexpr int kAuditFormatVersion = 1;

// Append-only audit trail, optionally mirrored to a newline-delimited JSON
// file whose first line is a `{"format":"ac4a-audit","version":N}` header.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::filesystem::path file);
    // In-memory log that starts from existing records.
    explicit AuditLog(std::vector<AuditRecord> seed);

    AuditLog(const AuditLog&) = delete;
    AuditLog& operator=(const AuditLog&) = delete;

    // Assigns the next seq and writes the record before returning it.
    std::uint64_t append(AuditRecord record);
    std::vector<AuditRecord> query(const AuditFilter& filter) const;
    std::vector<AuditRecord> all() const;
    std::uint64_t last_seq() const;

    const std::optional<std::filesystem::path>& file() const { return path_; }

private:
    mutable std::mutex mutex_;
    std::vector<AuditRecord> records_;
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
};

// Reads an audit file; reports `file:line` on malformed content.
std::vector<AuditRecord> read_audit_file(const std::filesystem::path& file);

std::string now_iso8601();
std::int64_t now_millis();
std::string new_permission_id();

struct AddResult {
    Permission permission;
    std::vector<Permission> warnings;  // existing grants that already cover it
};

// Active permissions with atomic snapshots. Mutations are serialized and
// each one is audited before it becomes visible to snapshots.
class PermissionStore {
public:
    explicit PermissionStore(AuditLog& audit);

    // Rebuilds the active set from permission records already in the log.
    void restore_from_audit();

    AddResult add_permission(const DifferenceEngine& engine, Permission p, Actor actor = Actor::User);
    Permission remove_permission(const std::string& id, Actor actor = Actor::User);

    ActiveSnapshot capture_snapshot() const;
    std::optional<Permission> find(const std::string& id) const;

    AuditLog& audit() { return audit_; }
    const AuditLog& audit() const { return audit_; }

private:
    AuditLog& audit_;
    mutable std::mutex mutex_;
    ActiveSnapshot current_;
};

struct ReplayDivergence {
    std::uint64_t seq = 0;
    std::string reason;
    Json recorded;
    Json replayed;
};

struct ReplayReport {
    std::size_t records = 0;
    std::size_t accesses_checked = 0;
    std::vector<Permission> active;
    std::uint64_t snapshot_id = 0;
    std::vector<ReplayDivergence> divergences;
};

using EngineLookup = std::function<const DifferenceEngine*(const std::string& app)>;

// Rebuilds the store from the records and re-runs every recorded access
// against the permission set that was active at that point.
ReplayReport replay_audit(const std::vector<AuditRecord>& records, const EngineLookup& engines);

}  // namespace ac4a
