#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ac4a/api_gate.hpp"
#include "ac4a/json_io.hpp"
#include "ac4a/store.hpp"
#include "ac4a/web_gate.hpp"

namespace ac4a {

// Data directory layout:
//   forests/<app>.json   resource type trees and actions of one application
//   web/<app>.json       web mapping configs for that application's pages
//   audit.ndjson         the audit trail (created on first start)
struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "data";
    std::filesystem::path audit_file;  // defaults to <data_dir>/audit.ndjson
    std::map<std::string, HandlingMode> modes;
    // Reads the audit file but never writes it; changes stay in memory.
    bool read_only = false;
};

// `{"listen": "host:port", "data_dir": ..., "audit_file": ..., "modes": {app: mode}}`;
// relative paths resolve against the config file's directory.
ServiceConfig load_service_config(const std::filesystem::path& file);
// AC4A_LISTEN and AC4A_DATA_DIR.
void apply_env_overrides(ServiceConfig& config);
void parse_listen(const std::string& listen, ServiceConfig& config);

struct HttpResponse {
    int status = 200;
    Json body;
};

// "<node> <value> of <parent> <value> ..." phrasing of a grant.
std::string render_permission_text(const Permission& p);

class Service {
public:
    explicit Service(ServiceConfig config);
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;
    ~Service();

    // Transport-independent request handling; the HTTP server only forwards here.
    HttpResponse handle(const std::string& method, const std::string& path,
                        const std::multimap<std::string, std::string>& query, const std::string& body);

    // Blocks until stop(). Returns false when the address cannot be bound.
    bool serve();
    void stop();
    // Blocks until serve() is accepting connections.
    void wait_until_ready() const;
    int bound_port() const { return bound_port_; }

    const ServiceConfig& config() const { return config_; }
    ApplicationRegistry& apps() { return apps_; }
    PermissionStore& store() { return *store_; }
    ApiGate& gate() { return *gate_; }
    const std::map<std::string, std::map<std::string, WebMappingConfig>>& web_configs() const { return web_; }

    // Finds the config for `url`, preferring `app` when given.
    std::pair<std::string, const WebMappingConfig*> find_page(const std::string& url, const std::string& app) const;
    MaskPlan evaluate_dom(const std::string& url, const std::string& html, const std::string& app = {}) const;

private:
    HttpResponse route(const std::string& method, const std::string& path,
                       const std::multimap<std::string, std::string>& query, const Json& body);

    ServiceConfig config_;
    ApplicationRegistry apps_;
    std::unique_ptr<AuditLog> audit_;
    std::unique_ptr<PermissionStore> store_;
    std::unique_ptr<ApiGate> gate_;
    std::map<std::string, std::map<std::string, WebMappingConfig>> web_;
    struct Server;
    std::unique_ptr<Server> server_;
    std::atomic<int> bound_port_{0};
};

}  // namespace ac4a
