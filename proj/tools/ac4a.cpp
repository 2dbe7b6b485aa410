#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "ac4a/errors.hpp"
#include "ac4a/json_io.hpp"
#include "ac4a/resource_model.hpp"
#include "ac4a/service.hpp"
#include "ac4a/store.hpp"
#include "ac4a/web_gate.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ac4a::StorageError("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string describe(const std::exception& e) {
    if (const auto* err = dynamic_cast<const ac4a::Error*>(&e)) return err->code() + ": " + err->what();
    return e.what();
}

// Forest, web config or audit file, decided by extension and content.
void validate_one(const fs::path& file) {
    if (file.extension() == ".ndjson") {
        ac4a::read_audit_file(file);
        return;
    }
    const auto text = slurp(file);
    bool forest = false;
    try {
        const auto j = ac4a::Json::parse(text);
        forest = j.is_object() && j.contains("trees");
    } catch (const ac4a::Json::parse_error& e) {
        throw ac4a::FormatError(std::string("not valid JSON: ") + e.what());
    }
    if (forest)
        ac4a::load_forest(text);
    else
        ac4a::parse_web_config(text);
}

int run_serve(ac4a::ServiceConfig config) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ac4a::Service service(std::move(config));
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
    });
    std::cerr << "ac4a: listening on " << service.config().host << ":" << service.config().port << " (data "
              << service.config().data_dir.string() << ")\n";
    const bool ok = service.serve();
    if (!ok) {
        std::cerr << "ac4a: cannot listen on " << service.config().host << ":" << service.config().port << "\n";
        pthread_kill(waiter.native_handle(), SIGTERM);
    }
    waiter.join();
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ac4a: resource-centric access control for agents"};
    app.require_subcommand(1);

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    std::string config_file, listen, serve_data_dir;
    serve->add_option("--config", config_file, "service config JSON")->check(CLI::ExistingFile);
    serve->add_option("--listen", listen, "host:port");
    serve->add_option("--data-dir", serve_data_dir, "data directory");

    auto* validate = app.add_subcommand("validate", "check forests, web configs and audit files");
    std::vector<std::string> files;
    validate->add_option("files", files, "files to validate")->required();

    auto* check = app.add_subcommand("check", "decide one API call against the stored permissions");
    std::string check_app, endpoint, args_text = "{}", check_data_dir = "data";
    check->add_option("--app", check_app)->required();
    check->add_option("--endpoint", endpoint)->required();
    check->add_option("--args", args_text, "arguments as a JSON object");
    check->add_option("--data-dir", check_data_dir)->check(CLI::ExistingDirectory);

    auto* replay = app.add_subcommand("replay", "rebuild state from an audit file and re-run every access");
    std::string audit_file, replay_data_dir = "data";
    replay->add_option("audit", audit_file)->required()->check(CLI::ExistingFile);
    replay->add_option("--data-dir", replay_data_dir, "directory with forests/")->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            ac4a::ServiceConfig config = config_file.empty() ? ac4a::ServiceConfig{} : ac4a::load_service_config(config_file);
            ac4a::apply_env_overrides(config);
            if (!listen.empty()) ac4a::parse_listen(listen, config);
            if (!serve_data_dir.empty()) {
                config.data_dir = serve_data_dir;
                config.audit_file.clear();
            }
            return run_serve(std::move(config));
        }

        if (*validate) {
            int failures = 0;
            for (const auto& f : files) {
                try {
                    validate_one(f);
                    std::cout << "ok " << f << "\n";
                } catch (const std::exception& e) {
                    ++failures;
                    std::cout << f << ": " << describe(e) << "\n";
                }
            }
            return failures ? 1 : 0;
        }

        if (*check) {
            ac4a::ServiceConfig config;
            config.data_dir = check_data_dir;
            config.read_only = true;
            ac4a::Service service(std::move(config));
            const auto args = ac4a::args_from_json(ac4a::Json::parse(args_text));
            const auto decision = service.gate().intercept(check_app, endpoint, args);
            std::cout << ac4a::gate_decision_to_json(decision).dump(2) << "\n";
            return decision.allowed() ? 0 : 2;
        }

        if (*replay) {
            ac4a::ServiceConfig config;
            config.data_dir = replay_data_dir;
            config.read_only = true;
            config.audit_file = fs::path(replay_data_dir) / "no-audit.ndjson";
            ac4a::Service service(std::move(config));
            const auto report = ac4a::replay_audit(ac4a::read_audit_file(audit_file), service.apps().engine_lookup());
            ac4a::Json active = ac4a::Json::array();
            for (const auto& p : report.active) active.push_back(ac4a::permission_to_json(p));
            ac4a::Json divergences = ac4a::Json::array();
            for (const auto& d : report.divergences)
                divergences.push_back(
                    {{"seq", d.seq}, {"reason", d.reason}, {"recorded", d.recorded}, {"replayed", d.replayed}});
            std::cout << ac4a::Json{{"records", report.records},
                                    {"accesses_checked", report.accesses_checked},
                                    {"snapshot_id", report.snapshot_id},
                                    {"active", active},
                                    {"divergences", divergences}}
                             .dump(2)
                      << "\n";
            return report.divergences.empty() ? 0 : 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "ac4a: " << describe(e) << "\n";
        return 1;
    }
    return 0;
}
