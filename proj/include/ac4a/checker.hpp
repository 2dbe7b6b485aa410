#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ac4a/difference.hpp"
#include "ac4a/resource_model.hpp"

namespace ac4a {

enum class PermissionOrigin { Manual, Inferred, AutoDeployed };

std::string_view to_string(PermissionOrigin origin);
PermissionOrigin parse_permission_origin(std::string_view text);

struct Permission {
    std::string id;
    std::string app;
    Rvs rvs;
    std::string action;
    std::int64_t created_at = 0;  // ms since the Unix epoch
    PermissionOrigin origin = PermissionOrigin::Manual;

    bool operator==(const Permission&) const = default;
};

struct NeedItem {
    Rvs rvs;
    std::string action;

    bool operator==(const NeedItem&) const = default;
};

// Sufficient permissions for one access; each pair is checked on its own
// and all must hold.
struct AccessNeed {
    std::vector<NeedItem> needs;
};

// Immutable view of the active permissions, in grant order.
struct ActiveSnapshot {
    std::shared_ptr<const std::vector<Permission>> permissions = std::make_shared<const std::vector<Permission>>();
    std::uint64_t snapshot_id = 0;

    std::size_t size() const { return permissions->size(); }
    ActiveSnapshot restricted_to(std::string_view app) const;
};

ActiveSnapshot make_snapshot(std::vector<Permission> permissions, std::uint64_t snapshot_id = 0);

enum class Decision { Granted, Denied };

std::string_view to_string(Decision decision);

struct NeedOutcome {
    NeedItem need;
    std::vector<Rvs> remaining;
    bool satisfied = false;
    std::string diagnostic;  // set when evaluation failed
};

struct CheckResult {
    Decision decision = Decision::Granted;
    std::vector<NeedOutcome> per_need;
    std::uint64_t snapshot_id = 0;
    // Failure that happened before any need could be checked (fail-closed).
    std::string error;

    bool granted() const { return decision == Decision::Granted; }
};

std::vector<Rvs> get_resources(const ActiveSnapshot& snapshot, std::string_view action);

CheckResult check_access(const DifferenceEngine& engine, const AccessNeed& needs, const ActiveSnapshot& snapshot);

// Existing permissions of the same action that already cover the candidate.
std::vector<Permission> detect_redundancy(const DifferenceEngine& engine, const Permission& candidate,
                                          const ActiveSnapshot& snapshot);

// `permission denied: missing [read on Calendar:Year(2026), ...]`
std::string denial_message(const CheckResult& result);

}  // namespace ac4a
