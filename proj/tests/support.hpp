#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "ac4a/api_gate.hpp"
#include "ac4a/apps.hpp"
#include "ac4a/store.hpp"

namespace test {

inline const std::filesystem::path kData = AC4A_DATA;
inline const std::filesystem::path kFixtures = AC4A_FIXTURES;

inline std::string read_text(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("missing test file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ac4a::ResourceForest forest(const std::string& app) {
    return ac4a::load_forest(read_text(kData / "forests" / (app + ".json")));
}

// Registry, in-memory audit, store and gate for the named reference apps.
struct Harness {
    ac4a::AuditLog audit;
    ac4a::PermissionStore store{audit};
    ac4a::ApplicationRegistry apps;
    ac4a::ApiGate gate{apps, store};

    explicit Harness(std::initializer_list<std::string> ids) { install(ids); }
    // Audit mirrored to `audit_file`.
    Harness(std::initializer_list<std::string> ids, const std::filesystem::path& audit_file) : audit(audit_file) {
        install(ids);
    }

    void install(std::initializer_list<std::string> ids) {
        for (const auto& id : ids) {
            apps.add_application(id, forest(id));
            ac4a::apps::install_builtin(apps, id);
        }
    }

    ac4a::AddResult grant(const std::string& app, const std::string& rvs, const std::string& action) {
        ac4a::Permission p;
        p.app = app;
        p.rvs = ac4a::parse_rvs(rvs);
        p.action = action;
        return store.add_permission(*apps.get(app).engine, p);
    }

    const ac4a::DifferenceEngine& engine(const std::string& app) const { return *apps.get(app).engine; }
    ac4a::ActiveSnapshot snapshot(const std::string& app) const { return store.capture_snapshot().restricted_to(app); }
};

}  // namespace test
