#include "ac4a/json_io.hpp"

namespace ac4a {

namespace {

Json node_to_json(const ResourceTypeNode& node) {
    Json j{{"name", node.name}};
    if (node.recursive_self) j["recursive"] = true;
    if (node.kind != ValueKind::Enum) j["kind"] = std::string(to_string(node.kind));
    if (!node.children.empty()) {
        j["children"] = Json::array();
        for (const auto& c : node.children) j["children"].push_back(node_to_json(c));
    }
    return j;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string string_field(const Json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Json forest_to_json(const ResourceForest& forest) {
    Json trees = Json::object();
    for (const auto& [name, tree] : forest.trees()) trees[name] = node_to_json(tree.root);
    return Json{{"trees", trees}, {"actions", forest.actions()}};
}

Json permission_to_json(const Permission& p) {
    return Json{{"id", p.id},
                {"app", p.app},
                {"rvs", render_rvs(p.rvs)},
                {"action", p.action},
                {"created_at", p.created_at},
                {"origin", std::string(to_string(p.origin))}};
}

Permission permission_from_json(const Json& j) {
    Permission p;
    p.id = string_field(j, "id");
    p.app = string_field(j, "app");
    p.rvs = parse_rvs(string_field(j, "rvs"));
    p.action = string_field(j, "action");
    p.created_at = field(j, "created_at").get<std::int64_t>();
    p.origin = parse_permission_origin(string_field(j, "origin"));
    return p;
}

Json need_to_json(const NeedItem& n) { return Json{{"rvs", render_rvs(n.rvs)}, {"action", n.action}}; }

NeedItem need_from_json(const Json& j) { return NeedItem{parse_rvs(string_field(j, "rvs")), string_field(j, "action")}; }

Json access_need_to_json(const AccessNeed& need) {
    Json out = Json::array();
    for (const auto& n : need.needs) out.push_back(need_to_json(n));
    return out;
}

AccessNeed access_need_from_json(const Json& j) {
    if (!j.is_array()) throw FormatError("needs must be an array");
    AccessNeed need;
    for (const auto& item : j) need.needs.push_back(need_from_json(item));
    return need;
}

Json check_result_to_json(const CheckResult& result) {
    Json per_need = Json::array();
    for (const auto& o : result.per_need) {
        Json remaining = Json::array();
        for (const auto& r : o.remaining) remaining.push_back(render_rvs(r));
        Json entry{{"rvs", render_rvs(o.need.rvs)},
                   {"action", o.need.action},
                   {"satisfied", o.satisfied},
                   {"remaining", remaining}};
        if (!o.diagnostic.empty()) entry["diagnostic"] = o.diagnostic;
        per_need.push_back(std::move(entry));
    }
    Json j{{"decision", std::string(to_string(result.decision))},
           {"snapshot_id", result.snapshot_id},
           {"per_need", per_need}};
    if (!result.error.empty()) j["error"] = result.error;
    return j;
}

Json mask_plan_to_json(const MaskPlan& plan) {
    Json blocked = Json::array();
    for (const auto& b : plan.blocked) {
        Json reasons = Json::array();
        for (const auto& r : b.reasons) {
            Json reason{{"rvs", r.rvs}, {"action", r.action}};
            if (!r.error.empty()) reason["error"] = r.error;
            reasons.push_back(std::move(reason));
        }
        blocked.push_back(Json{{"path", b.path}, {"reasons", reasons}});
    }
    return Json{{"blocked", blocked}};
}

}  // namespace ac4a
