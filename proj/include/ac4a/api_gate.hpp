#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "ac4a/checker.hpp"
#include "ac4a/json_io.hpp"
#include "ac4a/store.hpp"

namespace ac4a {

using ArgValue = std::variant<std::string, std::int64_t, double, bool>;
using Args = std::map<std::string, ArgValue>;

std::string arg_to_string(const ArgValue& value);
Args args_from_json(const Json& j);
Json args_to_json(const Args& args);

// Maps (endpoint, arguments) to the permissions sufficient for the call.
// Returning std::nullopt declares the endpoint unmapped.
using PermissionFunction = std::function<std::optional<AccessNeed>(const std::string& endpoint, const Args& args)>;

enum class HandlingMode { Ask, Skip, Infer, Yolo };

std::string_view to_string(HandlingMode mode);
HandlingMode parse_handling_mode(std::string_view text);

struct Application {
    std::string id;
    std::shared_ptr<const ResourceForest> forest;
    std::shared_ptr<DifferenceEngine> engine;
    PermissionFunction permission_function;  // empty: every endpoint is unmapped
};

class ApplicationRegistry {
public:
    Application& add_application(const std::string& id, ResourceForest forest);
    void register_permission_function(const std::string& app, PermissionFunction fn);

    const Application& get(const std::string& app) const;  // throws UnknownApplication
    const Application* find(const std::string& app) const;
    const DifferenceEngine* engine(const std::string& app) const;
    std::vector<std::string> ids() const;

    EngineLookup engine_lookup() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Application>> apps_;
};

// Broadest requirement: every tree root at `?`, once per declared action.
AccessNeed fallback_need(const ResourceForest& forest);

struct AgentDirective {
    HandlingMode mode = HandlingMode::Ask;
    std::string message;
    std::vector<NeedItem> suggested_permissions;
    std::vector<std::string> auto_deployed;  // permission ids
    bool retry = false;
};

enum class GateOutcome { Allow, Deny };

struct GateDecision {
    GateOutcome outcome = GateOutcome::Deny;
    CheckResult check;
    std::optional<AgentDirective> directive;

    bool allowed() const { return outcome == GateOutcome::Allow; }
};

Json gate_decision_to_json(const GateDecision& decision);

// Every unmet (remaining, action) pair of a denial, deduplicated in order.
std::vector<NeedItem> remaining_pairs(const CheckResult& denial);

// Decides agent API calls. Never executes the endpoint itself.
class ApiGate {
public:
    ApiGate(ApplicationRegistry& apps, PermissionStore& store);

    GateDecision intercept(const std::string& app, const std::string& endpoint, const Args& args);

    // Computes the sufficient permissions without checking them.
    AccessNeed compute_need(const std::string& app, const std::string& endpoint, const Args& args) const;

    AgentDirective apply_mode(const std::string& app, HandlingMode mode, const CheckResult& denial);

    HandlingMode mode(const std::string& app) const;
    void set_mode(const std::string& app, HandlingMode mode, Actor actor = Actor::User);
    // Configured default; not audited.
    void set_default_mode(const std::string& app, HandlingMode mode);
    // Re-applies mode changes recorded in the audit log.
    void restore_modes();

private:
    ApplicationRegistry& apps_;
    PermissionStore& store_;
    mutable std::shared_mutex mode_mutex_;
    std::map<std::string, HandlingMode> modes_;
};

}  // namespace ac4a
