#include "ac4a/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "ac4a/apps.hpp"
#include "ac4a/errors.hpp"

namespace ac4a {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw StorageError("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> json_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

int status_for(const Error& e) {
    const auto& code = e.code();
    if (code == "NotFound" || code == "UnknownApplication") return 404;
    if (code == "StorageUnavailable") return 503;
    if (code == "ContractError") return 409;
    return 400;
}

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
    return HttpResponse{status, Json{{"error", code}, {"message", message}}};
}

std::string query_value(const std::multimap<std::string, std::string>& query, const std::string& key) {
    const auto it = query.find(key);
    return it == query.end() ? std::string() : it->second;
}

std::uint64_t parse_count(const std::string& text, const char* name) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(name);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("query parameter '") + name + "' must be a non-negative integer");
    }
}

const Json& require(const Json& body, const char* key) {
    if (!body.is_object() || !body.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return body[key];
}

std::string require_string(const Json& body, const char* key) {
    const auto& v = require(body, key);
    if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

struct Service::Server {
    httplib::Server http;
};

void parse_listen(const std::string& listen, ServiceConfig& config) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw FormatError("listen address must be host:port, got '" + listen + "'");
    config.host = listen.substr(0, colon);
    try {
        config.port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw FormatError("invalid port in listen address '" + listen + "'");
    }
    if (config.port < 0 || config.port > 65535) throw FormatError("port out of range in '" + listen + "'");
}

ServiceConfig load_service_config(const fs::path& file) {
    Json j;
    try {
        j = Json::parse(read_file(file));
    } catch (const Json::parse_error& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
    if (!j.is_object()) throw FormatError(file.string() + ": expected an object");
    ServiceConfig config;
    const auto base = file.parent_path();
    for (const auto& [key, value] : j.items()) {
        if (key == "listen") {
            parse_listen(value.get<std::string>(), config);
        } else if (key == "data_dir") {
            config.data_dir = base / value.get<std::string>();
        } else if (key == "audit_file") {
            config.audit_file = base / value.get<std::string>();
        } else if (key == "modes") {
            for (const auto& [app, mode] : value.items()) config.modes[app] = parse_handling_mode(mode.get<std::string>());
        } else {
            throw FormatError(file.string() + ": unexpected key '" + key + "'");
        }
    }
    return config;
}

void apply_env_overrides(ServiceConfig& config) {
    if (const char* listen = std::getenv("AC4A_LISTEN"); listen && *listen) parse_listen(listen, config);
    if (const char* dir = std::getenv("AC4A_DATA_DIR"); dir && *dir) {
        config.data_dir = dir;
        config.audit_file.clear();
    }
}

std::string render_permission_text(const Permission& p) {
    std::string phrase;
    for (auto it = p.rvs.segments.rbegin(); it != p.rvs.segments.rend(); ++it) {
        if (!phrase.empty()) phrase += " of ";
        phrase += it->value.is_wildcard() ? "any " + it->node : it->node + " " + it->value.text();
    }
    return "The " + p.app + " agent may " + p.action + " " + phrase + " in " + p.rvs.tree + ".";
}

Service::Service(ServiceConfig config) : config_(std::move(config)), server_(std::make_unique<Server>()) {
    if (!fs::is_directory(config_.data_dir))
        throw StorageError("data directory " + config_.data_dir.string() + " does not exist");
    for (const auto& file : json_files(config_.data_dir / "forests")) {
        const auto app = file.stem().string();
        try {
            apps_.add_application(app, load_forest(read_file(file)));
        } catch (const Error& e) {
            throw FormatError(file.string() + ": " + e.code() + ": " + e.what());
        }
        apps::install_builtin(apps_, app);
    }
    for (const auto& file : json_files(config_.data_dir / "web")) {
        const auto app = file.stem().string();
        if (!apps_.find(app)) throw FormatError(file.string() + ": no forest for application '" + app + "'");
        try {
            web_[app] = parse_web_config(read_file(file));
        } catch (const Error& e) {
            throw FormatError(file.string() + ": " + e.code() + ": " + e.what());
        }
    }

    if (config_.audit_file.empty()) config_.audit_file = config_.data_dir / "audit.ndjson";
    if (config_.read_only) {
        auto seed = fs::exists(config_.audit_file) && fs::file_size(config_.audit_file) > 0
                        ? read_audit_file(config_.audit_file)
                        : std::vector<AuditRecord>{};
        audit_ = std::make_unique<AuditLog>(std::move(seed));
    } else {
        audit_ = std::make_unique<AuditLog>(config_.audit_file);
    }
    store_ = std::make_unique<PermissionStore>(*audit_);
    store_->restore_from_audit();
    gate_ = std::make_unique<ApiGate>(apps_, *store_);
    for (const auto& [app, mode] : config_.modes) {
        apps_.get(app);
        gate_->set_default_mode(app, mode);
    }
    gate_->restore_modes();
}

Service::~Service() = default;

std::pair<std::string, const WebMappingConfig*> Service::find_page(const std::string& url,
                                                                   const std::string& app) const {
    const auto key = normalize_url(url);
    if (!app.empty()) {
        apps_.get(app);
        const auto it = web_.find(app);
        if (it == web_.end()) throw NotFound("application '" + app + "' has no web configuration");
        const auto* cfg = find_web_config(it->second, url);
        if (!cfg) throw NotFound("no web configuration for '" + key + "' in '" + app + "'");
        return {app, cfg};
    }
    for (const auto& [id, configs] : web_) {
        const auto it = configs.find(key);
        if (it != configs.end()) return {id, &it->second};
    }
    std::pair<std::string, const WebMappingConfig*> bare{{}, nullptr};
    for (const auto& [id, configs] : web_) {
        const auto it = configs.find("");
        if (it == configs.end()) continue;
        if (bare.second) throw NotFound("no web configuration for '" + key + "'; pass 'app' to choose one");
        bare = {id, &it->second};
    }
    if (!bare.second) throw NotFound("no web configuration for '" + key + "'");
    return bare;
}

MaskPlan Service::evaluate_dom(const std::string& url, const std::string& html, const std::string& app) const {
    const auto [id, cfg] = find_page(url, app);
    const auto& application = apps_.get(id);
    const auto snapshot = store_->capture_snapshot().restricted_to(id);
    return compute_mask(*cfg, Dom::parse(html), snapshot, *application.engine);
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::multimap<std::string, std::string>& query, const std::string& body) {
    try {
        Json parsed;
        if (!body.empty()) {
            try {
                parsed = Json::parse(body);
            } catch (const Json::parse_error& e) {
                return error_response(400, "FormatError", std::string("request body is not JSON: ") + e.what());
            }
        }
        return route(method, path, query, parsed);
    } catch (const Error& e) {
        return error_response(status_for(e), e.code(), e.what());
    } catch (const Json::exception& e) {
        return error_response(400, "FormatError", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "InternalError", e.what());
    }
}

HttpResponse Service::route(const std::string& method, const std::string& path,
                            const std::multimap<std::string, std::string>& query, const Json& body) {
    auto wrong_method = [&] { return error_response(405, "MethodNotAllowed", method + " " + path); };

    if (path == "/api/trees") {
        if (method != "GET") return wrong_method();
        Json out = Json::object();
        for (const auto& id : apps_.ids()) out[id] = forest_to_json(*apps_.get(id).forest);
        return {200, out};
    }

    if (path == "/api/permissions") {
        if (method == "GET") {
            const auto app = query_value(query, "app");
            const auto snapshot = store_->capture_snapshot();
            Json out = Json::array();
            for (const auto& p : *snapshot.permissions)
                if (app.empty() || p.app == app) out.push_back(permission_to_json(p));
            return {200, out};
        }
        if (method == "POST") {
            const auto app = require_string(body, "app");
            const auto& application = apps_.get(app);
            Permission p;
            p.app = app;
            p.rvs = parse_rvs(require_string(body, "rvs"));
            p.action = require_string(body, "action");
            if (body.contains("origin")) p.origin = parse_permission_origin(body["origin"].get<std::string>());
            const auto result = store_->add_permission(*application.engine, std::move(p));
            Json warnings = Json::array();
            for (const auto& w : result.warnings)
                warnings.push_back(Json{{"id", w.id},
                                        {"rvs", render_rvs(w.rvs)},
                                        {"action", w.action},
                                        {"message", "already covered by " + render_rvs(w.rvs) + " (" + w.action + ")"}});
            return {201, Json{{"id", result.permission.id},
                              {"permission", permission_to_json(result.permission)},
                              {"warnings", warnings}}};
        }
        return wrong_method();
    }

    if (path == "/api/permissions/rendered") {
        if (method != "GET") return wrong_method();
        const auto snapshot = store_->capture_snapshot();
        Json out = Json::array();
        for (const auto& p : *snapshot.permissions)
            out.push_back(Json{{"id", p.id}, {"app", p.app}, {"text", render_permission_text(p)}});
        return {200, out};
    }

    static const std::string kPermPrefix = "/api/permissions/";
    if (path.rfind(kPermPrefix, 0) == 0) {
        if (method != "DELETE") return wrong_method();
        const auto removed = store_->remove_permission(path.substr(kPermPrefix.size()));
        return {200, Json{{"removed", permission_to_json(removed)}}};
    }

    if (path == "/api/check") {
        if (method != "POST") return wrong_method();
        const auto app = require_string(body, "app");
        const auto endpoint = require_string(body, "endpoint");
        const auto args = body.contains("args") ? args_from_json(body["args"]) : Args{};
        return {200, gate_decision_to_json(gate_->intercept(app, endpoint, args))};
    }

    if (path == "/api/evaluate-dom") {
        if (method != "POST") return wrong_method();
        const auto app = body.is_object() && body.contains("app") ? body["app"].get<std::string>() : std::string();
        return {200, mask_plan_to_json(evaluate_dom(require_string(body, "url"), require_string(body, "html"), app))};
    }

    if (path == "/api/logs") {
        if (method != "GET") return wrong_method();
        AuditFilter filter;
        if (const auto kind = query_value(query, "kind"); !kind.empty()) filter.kind = parse_audit_kind(kind);
        if (const auto app = query_value(query, "app"); !app.empty()) filter.app = app;
        if (const auto from = query_value(query, "from"); !from.empty()) filter.from_time = from;
        if (const auto to = query_value(query, "to"); !to.empty()) filter.to_time = to;
        if (const auto after = query_value(query, "after_seq"); !after.empty())
            filter.after_seq = parse_count(after, "after_seq");
        if (const auto limit = query_value(query, "limit"); !limit.empty())
            filter.limit = static_cast<std::size_t>(parse_count(limit, "limit"));
        Json records = Json::array();
        for (const auto& r : audit_->query(filter)) records.push_back(audit_record_to_json(r));
        return {200, Json{{"records", records}, {"last_seq", audit_->last_seq()}}};
    }

    if (path == "/api/mode") {
        if (method == "GET") {
            if (const auto app = query_value(query, "app"); !app.empty()) {
                apps_.get(app);
                return {200, Json{{"app", app}, {"mode", std::string(to_string(gate_->mode(app)))}}};
            }
            Json modes = Json::object();
            for (const auto& id : apps_.ids()) modes[id] = std::string(to_string(gate_->mode(id)));
            return {200, Json{{"modes", modes}}};
        }
        if (method == "PUT") {
            const auto app = require_string(body, "app");
            const auto mode = parse_handling_mode(require_string(body, "mode"));
            gate_->set_mode(app, mode);
            return {200, Json{{"app", app}, {"mode", std::string(to_string(mode))}}};
        }
        return wrong_method();
    }

    return error_response(404, "NotFound", "no route for " + path);
}

bool Service::serve() {
    auto& http = server_->http;
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
        const auto out = handle(req.method, req.path, query, req.body);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    const std::string all = R"(/api/.*)";
    http.Get(all, forward);
    http.Post(all, forward);
    http.Put(all, forward);
    http.Delete(all, forward);
    http.Options(all, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    // Port 0 picks a free port.
    if (config_.port == 0) {
        const int port = http.bind_to_any_port(config_.host);
        if (port < 0) return false;
        bound_port_ = port;
    } else {
        if (!http.bind_to_port(config_.host, config_.port)) return false;
        bound_port_ = config_.port;
    }
    return http.listen_after_bind();
}

void Service::wait_until_ready() const { server_->http.wait_until_ready(); }

void Service::stop() { server_->http.stop(); }

}  // namespace ac4a
