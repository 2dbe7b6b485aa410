#include <doctest.h>

#include "ac4a/errors.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace ac4a;

namespace {

std::size_t count_kind(const AuditLog& log, AuditKind kind) {
    std::size_t n = 0;
    for (const auto& r : log.all()) n += r.kind == kind;
    return n;
}

// Denied availability check spanning two years: two unmet pairs.
GateDecision two_year_denial(test::Harness& h) {
    return h.gate.intercept("calendar", "get_availability", scenario::span("2026-12-01", "2027-01-31"));
}

}  // namespace

TEST_CASE("game session") {
    test::Harness h{"game"};
    CHECK(scenario::run(h, scenario::game_script()) == "");
    CHECK(count_kind(h.audit, AuditKind::AccessDenied) == 2);
    CHECK(count_kind(h.audit, AuditKind::AccessAllowed) == 2);
}

TEST_CASE("flight-booking sessions") {
    test::Harness h{"calendar", "travel", "wallet"};
    for (const auto& script : scenario::flight_scripts()) CHECK(scenario::run(h, script) == "");
}

TEST_CASE("every intercept writes exactly one access record") {
    test::Harness h{"game", "calendar"};
    const auto before = h.audit.last_seq();
    h.gate.intercept("game", "get_games", {});
    h.gate.intercept("game", "nonexistent_endpoint", {});
    h.gate.intercept("calendar", "get_availability", {});  // bad arguments
    h.gate.intercept("calendar", "get_availability", scenario::span("2026-06-01", "2026-06-02"));
    CHECK(h.audit.last_seq() - before == 4);
    CHECK(count_kind(h.audit, AuditKind::AccessDenied) == 4);
}

TEST_CASE("unmapped endpoints need every root at ? for every action") {
    test::Harness h{"calendar", "game"};
    const auto need = h.gate.compute_need("calendar", "export_everything", {});
    std::vector<std::string> got;
    for (const auto& n : need.needs) got.push_back(n.action + " " + render_rvs(n.rvs));
    CHECK(got == std::vector<std::string>{"read Calendar:Year(?)", "write Calendar:Year(?)", "create Calendar:Year(?)"});

    h.grant("game", "GameId(?)", "read");
    CHECK_FALSE(h.gate.intercept("game", "reset_all", {}).allowed());
    h.grant("game", "GameId(?)", "write");
    CHECK(h.gate.intercept("game", "reset_all", {}).allowed());

    // An application without a permission function treats everything as unmapped.
    test::Harness bare{};
    bare.apps.add_application("plain", test::forest("game"));
    CHECK(bare.gate.compute_need("plain", "get_games", {}).needs.size() == 2);
}

TEST_CASE("permission function examples") {
    test::Harness h{"calendar", "game", "filesystem", "travel"};
    auto one = [&](const std::string& app, const std::string& endpoint, const Args& args) {
        const auto need = h.gate.compute_need(app, endpoint, args);
        REQUIRE(need.needs.size() == 1);
        return need.needs[0].action + " " + render_rvs(need.needs[0].rvs);
    };
    CHECK(one("calendar", "get_calendar_events", scenario::span("2024-01-01", "2024-01-31")) ==
          "read Calendar:Year(2024)::Month(January)");
    CHECK(one("calendar", "get_calendar_events", scenario::span("2024-01-05", "2024-01-05")) ==
          "read Calendar:Year(2024)::Month(January)::Day(5)");
    CHECK(one("calendar", "get_calendar_events", scenario::span("2024-01-05", "2024-03-01")) ==
          "read Calendar:Year(2024)");
    CHECK(h.gate.compute_need("calendar", "get_calendar_events", scenario::span("2024-12-30", "2025-01-02")).needs.size() ==
          2);
    CHECK(one("calendar", "reserve_slot", {{"start_time", "2026-06-29T09:00"}, {"duration", std::int64_t{30}}}) ==
          "create Calendar:Year(2026)::Month(June)::Day(29)");
    CHECK(one("calendar", "delete_event", {{"start_date", "2026-06-29"}}) ==
          "write Calendar:Year(2026)::Month(June)::Day(29)");

    CHECK(one("game", "delete_game", {{"game_id", std::int64_t{45}}}) == "write Game:GameId(45)");
    CHECK(one("game", "get_games", {}) == "read Game:GameId(?)");

    CHECK(one("filesystem", "read_file", {{"path", "/home/user/docs/report.txt"}}) ==
          "read FileSystem:Directory(home)::Directory(user)::Directory(docs)::File(report.txt)");

    CHECK(one("travel", "book_flight", {{"flight", "DL 1847"}}) == "create Travel:Destination(?)::Flight(DL 1847)");
}

TEST_CASE("permission function failures deny") {
    test::Harness h{"calendar", "travel"};
    CHECK_THROWS_AS(h.gate.compute_need("travel", "book_flight", {}), PermissionFunctionError);
    const auto d = h.gate.intercept("travel", "book_flight", {});
    CHECK_FALSE(d.allowed());
    CHECK(d.check.error.find("PermissionFunctionError") == 0);
    REQUIRE(d.directive.has_value());

    h.apps.register_permission_function("calendar", [](const std::string&, const Args&) -> std::optional<AccessNeed> {
        throw std::out_of_range("bad index");
    });
    CHECK_FALSE(h.gate.intercept("calendar", "get_events", {}).allowed());
    CHECK_THROWS_AS(h.apps.register_permission_function("ghost", {}), UnknownApplication);
    CHECK_THROWS_AS(h.gate.intercept("ghost", "x", {}), UnknownApplication);
}

TEST_CASE("ask names every unmet pair") {
    test::Harness h{"calendar"};
    const auto d = two_year_denial(h);
    REQUIRE(d.directive.has_value());
    CHECK(d.directive->mode == HandlingMode::Ask);
    CHECK(d.directive->message.find("read on Calendar:Year(2026)") != std::string::npos);
    CHECK(d.directive->message.find("read on Calendar:Year(2027)") != std::string::npos);
    CHECK(d.directive->suggested_permissions.empty());
    CHECK_FALSE(d.directive->retry);
}

TEST_CASE("skip suggests nothing") {
    test::Harness h{"calendar"};
    h.gate.set_mode("calendar", HandlingMode::Skip);
    const auto d = two_year_denial(h);
    CHECK(d.directive->suggested_permissions.empty());
    CHECK(d.directive->auto_deployed.empty());
    CHECK_FALSE(d.directive->message.empty());
}

TEST_CASE("infer suggests the remaining set and deploys nothing") {
    test::Harness h{"calendar"};
    h.gate.set_mode("calendar", HandlingMode::Infer);
    const auto d = two_year_denial(h);
    std::vector<std::string> suggested;
    for (const auto& s : d.directive->suggested_permissions) suggested.push_back(s.action + " " + render_rvs(s.rvs));
    CHECK(suggested == std::vector<std::string>{"read Calendar:Year(2026)", "read Calendar:Year(2027)"});
    CHECK(d.directive->auto_deployed.empty());
    CHECK_FALSE(d.directive->retry);
    CHECK(h.store.capture_snapshot().size() == 0);

    // Granting the suggestions makes the same call pass.
    for (const auto& s : d.directive->suggested_permissions) h.grant("calendar", render_rvs(s.rvs), s.action);
    CHECK(two_year_denial(h).allowed());
}

TEST_CASE("yolo deploys, logs and converges in one retry") {
    test::Harness h{"calendar"};
    h.gate.set_mode("calendar", HandlingMode::Yolo);
    const auto d = two_year_denial(h);
    CHECK_FALSE(d.allowed());
    CHECK(d.directive->retry);
    CHECK(d.directive->auto_deployed.size() == 2);
    CHECK(count_kind(h.audit, AuditKind::PermAutoDeployed) == 2);
    for (const auto& p : *h.store.capture_snapshot().permissions) CHECK(p.origin == PermissionOrigin::AutoDeployed);
    CHECK(two_year_denial(h).allowed());

    const auto records = h.audit.all();
    CHECK(records.back().kind == AuditKind::AccessAllowed);
    CHECK(records[records.size() - 2].kind == AuditKind::PermAutoDeployed);
}

TEST_CASE("yolo does not promise a retry it cannot satisfy") {
    test::Harness h{"travel"};
    h.gate.set_mode("travel", HandlingMode::Yolo);
    const auto d = h.gate.intercept("travel", "book_flight", {});  // function error, nothing to deploy
    CHECK_FALSE(d.directive->retry);
    CHECK(d.directive->auto_deployed.empty());
}

TEST_CASE("allow decisions do not depend on the mode") {
    std::string first;
    for (const auto mode : {HandlingMode::Ask, HandlingMode::Skip, HandlingMode::Infer, HandlingMode::Yolo}) {
        test::Harness h{"game"};
        h.gate.set_default_mode("game", mode);
        h.grant("game", "GameId(?)", "read");
        const auto d = h.gate.intercept("game", "get_games", {});
        CHECK(d.allowed());
        CHECK_FALSE(d.directive.has_value());
        const auto text = gate_decision_to_json(d).dump();
        if (first.empty()) first = text;
        CHECK(text == first);
    }
}

TEST_CASE("apply_mode rejects a granted check") {
    test::Harness h{"game"};
    CHECK_THROWS_AS(h.gate.apply_mode("game", HandlingMode::Ask, CheckResult{}), ContractError);
}

TEST_CASE("modes are per application and audited when changed at runtime") {
    test::Harness h{"game", "calendar"};
    CHECK(h.gate.mode("game") == HandlingMode::Ask);
    h.gate.set_mode("game", HandlingMode::Infer, Actor::User);
    CHECK(h.gate.mode("game") == HandlingMode::Infer);
    CHECK(h.gate.mode("calendar") == HandlingMode::Ask);
    CHECK(count_kind(h.audit, AuditKind::ModeChanged) == 1);
    h.gate.set_default_mode("calendar", HandlingMode::Skip);
    CHECK(count_kind(h.audit, AuditKind::ModeChanged) == 1);
    CHECK_THROWS_AS(h.gate.set_mode("ghost", HandlingMode::Ask), UnknownApplication);
    CHECK(parse_handling_mode("yolo") == HandlingMode::Yolo);
    CHECK_THROWS(parse_handling_mode("maybe"));
}
