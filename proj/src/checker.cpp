#include "ac4a/checker.hpp"

namespace ac4a {

std::string_view to_string(PermissionOrigin origin) {
    switch (origin) {
        case PermissionOrigin::Manual: return "manual";
        case PermissionOrigin::Inferred: return "inferred";
        case PermissionOrigin::AutoDeployed: return "auto_deployed";
    }
    return "manual";
}

PermissionOrigin parse_permission_origin(std::string_view text) {
    if (text == "manual") return PermissionOrigin::Manual;
    if (text == "inferred") return PermissionOrigin::Inferred;
    if (text == "auto_deployed") return PermissionOrigin::AutoDeployed;
    throw FormatError("unknown permission origin '" + std::string(text) + "'");
}

std::string_view to_string(Decision decision) { return decision == Decision::Granted ? "granted" : "denied"; }

ActiveSnapshot make_snapshot(std::vector<Permission> permissions, std::uint64_t snapshot_id) {
    return ActiveSnapshot{std::make_shared<const std::vector<Permission>>(std::move(permissions)), snapshot_id};
}

ActiveSnapshot ActiveSnapshot::restricted_to(std::string_view app) const {
    std::vector<Permission> kept;
    for (const auto& p : *permissions)
        if (p.app == app) kept.push_back(p);
    return make_snapshot(std::move(kept), snapshot_id);
}

std::vector<Rvs> get_resources(const ActiveSnapshot& snapshot, std::string_view action) {
    std::vector<Rvs> out;
    for (const auto& p : *snapshot.permissions)
        if (p.action == action) out.push_back(p.rvs);
    return out;
}

CheckResult check_access(const DifferenceEngine& engine, const AccessNeed& needs, const ActiveSnapshot& snapshot) {
    CheckResult result;
    result.snapshot_id = snapshot.snapshot_id;
    for (const auto& item : needs.needs) {
        NeedOutcome outcome{item, {}, false, {}};
        try {
            if (!engine.forest().has_action(item.action))
                throw ValidationError("undeclared action '" + item.action + "'");
            const auto need = resolve_rvs(item.rvs, engine.forest());
            outcome.need.rvs = need;
            const auto haves = get_resources(snapshot, item.action);
            outcome.remaining = subtract_grants(engine, need, haves);
        } catch (const Error& e) {
            outcome.remaining = {outcome.need.rvs};
            outcome.diagnostic = e.code() + ": " + e.what();
        } catch (const std::exception& e) {
            outcome.remaining = {outcome.need.rvs};
            outcome.diagnostic = std::string("InternalError: ") + e.what();
        }
        outcome.satisfied = outcome.remaining.empty();
        if (!outcome.satisfied) result.decision = Decision::Denied;
        result.per_need.push_back(std::move(outcome));
    }
    return result;
}

std::vector<Permission> detect_redundancy(const DifferenceEngine& engine, const Permission& candidate,
                                          const ActiveSnapshot& snapshot) {
    std::vector<Permission> covering;
    for (const auto& existing : *snapshot.permissions) {
        if (existing.action != candidate.action) continue;
        try {
            if (engine.resolve_difference(candidate.rvs, existing.rvs).empty()) covering.push_back(existing);
        } catch (const std::exception&) {
            // An existing grant that cannot be compared never makes a new one redundant.
        }
    }
    return covering;
}

std::string denial_message(const CheckResult& result) {
    std::string out = "permission denied: missing [";
    bool first = true;
    for (const auto& o : result.per_need) {
        for (const auto& r : o.remaining) {
            if (!first) out += ", ";
            first = false;
            out += o.need.action + " on " + render_rvs(r);
        }
    }
    out += "]";
    if (!result.error.empty()) out += " (" + result.error + ")";
    return out;
}

}  // namespace ac4a
