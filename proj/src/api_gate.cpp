#include "ac4a/api_gate.hpp"

#include <mutex>
#include <set>
#include <sstream>

namespace ac4a {

std::string arg_to_string(const ArgValue& value) {
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(double d) const {
            std::ostringstream os;
            os << d;
            return os.str();
        }
    };
    return std::visit(Visitor{}, value);
}

Args args_from_json(const Json& j) {
    Args args;
    if (j.is_null()) return args;
    if (!j.is_object()) throw FormatError("args must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (v.is_string()) args.emplace(key, v.get<std::string>());
        else if (v.is_boolean()) args.emplace(key, v.get<bool>());
        else if (v.is_number_integer()) args.emplace(key, v.get<std::int64_t>());
        else if (v.is_number_float()) args.emplace(key, v.get<double>());
        else throw FormatError("argument '" + key + "' must be a string, number or boolean");
    }
    return args;
}

Json args_to_json(const Args& args) {
    Json j = Json::object();
    for (const auto& [key, v] : args) std::visit([&](const auto& x) { j[key] = x; }, v);
    return j;
}

std::string_view to_string(HandlingMode mode) {
    switch (mode) {
        case HandlingMode::Ask: return "ask";
        case HandlingMode::Skip: return "skip";
        case HandlingMode::Infer: return "infer";
        case HandlingMode::Yolo: return "yolo";
    }
    return "ask";
}

HandlingMode parse_handling_mode(std::string_view text) {
    if (text == "ask") return HandlingMode::Ask;
    if (text == "skip") return HandlingMode::Skip;
    if (text == "infer") return HandlingMode::Infer;
    if (text == "yolo") return HandlingMode::Yolo;
    throw FormatError("unknown handling mode '" + std::string(text) + "'");
}

Application& ApplicationRegistry::add_application(const std::string& id, ResourceForest forest) {
    auto app = std::make_shared<Application>();
    app->id = id;
    app->forest = std::make_shared<const ResourceForest>(std::move(forest));
    app->engine = std::make_shared<DifferenceEngine>(app->forest);
    std::unique_lock lock(mutex_);
    auto& slot = apps_[id];
    slot = std::move(app);
    return *slot;
}

void ApplicationRegistry::register_permission_function(const std::string& app, PermissionFunction fn) {
    std::unique_lock lock(mutex_);
    const auto it = apps_.find(app);
    if (it == apps_.end()) throw UnknownApplication("no application '" + app + "'");
    it->second->permission_function = std::move(fn);
}

const Application* ApplicationRegistry::find(const std::string& app) const {
    std::shared_lock lock(mutex_);
    const auto it = apps_.find(app);
    return it == apps_.end() ? nullptr : it->second.get();
}

const Application& ApplicationRegistry::get(const std::string& app) const {
    const auto* found = find(app);
    if (!found) throw UnknownApplication("no application '" + app + "'");
    return *found;
}

const DifferenceEngine* ApplicationRegistry::engine(const std::string& app) const {
    const auto* found = find(app);
    return found ? found->engine.get() : nullptr;
}

std::vector<std::string> ApplicationRegistry::ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : apps_) out.push_back(id);
    return out;
}

EngineLookup ApplicationRegistry::engine_lookup() const {
    return [this](const std::string& app) { return engine(app); };
}

AccessNeed fallback_need(const ResourceForest& forest) {
    AccessNeed need;
    for (const auto& action : forest.actions())
        for (const auto& [name, tree] : forest.trees())
            need.needs.push_back(NeedItem{Rvs{name, {Segment{tree.root.name, Value::wildcard()}}}, action});
    return need;
}

std::vector<NeedItem> remaining_pairs(const CheckResult& denial) {
    std::vector<NeedItem> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& o : denial.per_need)
        for (const auto& r : o.remaining)
            if (seen.emplace(render_rvs(r), o.need.action).second) out.push_back(NeedItem{r, o.need.action});
    return out;
}

Json gate_decision_to_json(const GateDecision& d) {
    Json j{{"outcome", d.allowed() ? "allow" : "deny"}, {"check", check_result_to_json(d.check)}};
    if (d.directive) {
        Json suggested = Json::array();
        for (const auto& s : d.directive->suggested_permissions) suggested.push_back(need_to_json(s));
        j["directive"] = Json{{"mode", std::string(to_string(d.directive->mode))},
                              {"message", d.directive->message},
                              {"suggested_permissions", suggested},
                              {"auto_deployed", d.directive->auto_deployed},
                              {"retry", d.directive->retry}};
    }
    return j;
}

ApiGate::ApiGate(ApplicationRegistry& apps, PermissionStore& store) : apps_(apps), store_(store) {}

AccessNeed ApiGate::compute_need(const std::string& app, const std::string& endpoint, const Args& args) const {
    const auto& application = apps_.get(app);
    if (!application.permission_function) return fallback_need(*application.forest);
    std::optional<AccessNeed> need;
    try {
        need = application.permission_function(endpoint, args);
    } catch (const PermissionFunctionError&) {
        throw;
    } catch (const std::exception& e) {
        throw PermissionFunctionError("permission function for '" + app + "' failed on '" + endpoint + "': " + e.what());
    }
    return need ? std::move(*need) : fallback_need(*application.forest);
}

GateDecision ApiGate::intercept(const std::string& app, const std::string& endpoint, const Args& args) {
    const auto& application = apps_.get(app);
    GateDecision decision;
    AccessNeed need;
    const auto snapshot = store_.capture_snapshot().restricted_to(app);
    try {
        need = compute_need(app, endpoint, args);
        decision.check = check_access(*application.engine, need, snapshot);
    } catch (const Error& e) {
        decision.check = CheckResult{Decision::Denied, {}, snapshot.snapshot_id, e.code() + ": " + e.what()};
    }
    decision.outcome = decision.check.granted() ? GateOutcome::Allow : GateOutcome::Deny;

    store_.audit().append(AuditRecord{0,
                                      {},
                                      decision.allowed() ? AuditKind::AccessAllowed : AuditKind::AccessDenied,
                                      app,
                                      Json{{"endpoint", endpoint},
                                           {"args", args_to_json(args)},
                                           {"needs", access_need_to_json(need)},
                                           {"check", check_result_to_json(decision.check)}},
                                      Actor::Agent});

    if (!decision.allowed()) decision.directive = apply_mode(app, mode(app), decision.check);
    return decision;
}

AgentDirective ApiGate::apply_mode(const std::string& app, HandlingMode mode, const CheckResult& denial) {
    if (denial.granted()) throw ContractError("apply_mode requires a denied check");
    AgentDirective d;
    d.mode = mode;
    const auto missing = remaining_pairs(denial);
    const auto base = denial_message(denial);
    auto list = [](const std::vector<NeedItem>& items) {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += ", ";
            out += items[i].action + " on " + render_rvs(items[i].rvs);
        }
        return out;
    };

    switch (mode) {
        case HandlingMode::Ask:
            d.message = base + ". Ask the user to grant: " + list(missing) + ".";
            break;
        case HandlingMode::Skip:
            d.message = base + ". Do not retry; find a workaround that avoids these resources or ask the user how to proceed.";
            break;
        case HandlingMode::Infer:
            d.suggested_permissions = missing;
            d.message = base + ". Suggested permissions awaiting user approval: " + list(missing) + ".";
            break;
        case HandlingMode::Yolo: {
            d.suggested_permissions = missing;
            const auto& engine = *apps_.get(app).engine;
            bool complete = !missing.empty() && denial.error.empty();
            for (const auto& item : missing) {
                try {
                    auto added = store_.add_permission(
                        engine, Permission{{}, app, item.rvs, item.action, 0, PermissionOrigin::AutoDeployed}, Actor::System);
                    d.auto_deployed.push_back(added.permission.id);
                } catch (const Error&) {
                    complete = false;
                }
            }
            d.retry = complete;
            d.message = base + ". Deployed permissions: " + list(missing) + (d.retry ? ". Retry the call." : ".");
            break;
        }
    }
    return d;
}

HandlingMode ApiGate::mode(const std::string& app) const {
    std::shared_lock lock(mode_mutex_);
    const auto it = modes_.find(app);
    return it == modes_.end() ? HandlingMode::Ask : it->second;
}

void ApiGate::set_mode(const std::string& app, HandlingMode mode, Actor actor) {
    apps_.get(app);
    std::unique_lock lock(mode_mutex_);
    store_.audit().append(
        AuditRecord{0, {}, AuditKind::ModeChanged, app, Json{{"mode", std::string(to_string(mode))}}, actor});
    modes_[app] = mode;
}

void ApiGate::set_default_mode(const std::string& app, HandlingMode mode) {
    std::unique_lock lock(mode_mutex_);
    modes_[app] = mode;
}

void ApiGate::restore_modes() {
    for (const auto& r : store_.audit().all()) {
        if (r.kind != AuditKind::ModeChanged || !r.detail.contains("mode")) continue;
        set_default_mode(r.subject, parse_handling_mode(r.detail["mode"].get<std::string>()));
    }
}

}  // namespace ac4a
