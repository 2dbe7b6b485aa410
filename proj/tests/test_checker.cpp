#include <doctest.h>

#include "ac4a/checker.hpp"
#include "oracle.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace ac4a;

namespace {

Permission perm(std::string id, std::string rvs, std::string action, std::string app = "calendar") {
    Permission p;
    p.id = std::move(id);
    p.app = std::move(app);
    p.rvs = parse_rvs(rvs);
    p.action = std::move(action);
    return p;
}

AccessNeed need(std::string rvs, std::string action) { return AccessNeed{{NeedItem{parse_rvs(rvs), std::move(action)}}}; }

}  // namespace

TEST_CASE("get_resources filters by action in grant order") {
    const auto snap = make_snapshot({perm("a", "Year(2026)::Month(June)", "read")});
    CHECK(get_resources(snap, "read") == std::vector<Rvs>{parse_rvs("Year(2026)::Month(June)")});
    CHECK(get_resources(snap, "create").empty());
    CHECK(get_resources(make_snapshot({}), "read").empty());

    const auto two = make_snapshot({perm("a", "Year(2027)", "read"), perm("b", "Year(2026)", "write"),
                                    perm("c", "Year(2026)", "read")});
    CHECK(get_resources(two, "read") == std::vector<Rvs>{parse_rvs("Year(2027)"), parse_rvs("Year(2026)")});
}

TEST_CASE("check_access examples") {
    test::Harness h{"calendar", "game", "calendar_unix"};
    const auto& cal = h.engine("calendar");

    auto denied = check_access(cal, need("Year(2026)::Month(June)", "read"), make_snapshot({}));
    CHECK_FALSE(denied.granted());
    REQUIRE(denied.per_need.size() == 1);
    CHECK(denied.per_need[0].remaining == std::vector<Rvs>{resolve_rvs(parse_rvs("Year(2026)::Month(June)"), h.engine("calendar").forest())});
    CHECK(denial_message(denied) == "permission denied: missing [read on Calendar:Year(2026)::Month(June)]");

    const auto june = make_snapshot({perm("a", "Year(2026)::Month(June)", "read")}, 4);
    const auto ok = check_access(cal, need("Year(2026)::Month(June)", "read"), june);
    CHECK(ok.granted());
    CHECK(ok.snapshot_id == 4);
    CHECK(ok.per_need[0].satisfied);

    const auto game_read = make_snapshot({perm("g", "GameId(?)", "read", "game")});
    CHECK_FALSE(check_access(h.engine("game"), need("GameId(?)", "write"), game_read).granted());

    const auto halves = make_snapshot({perm("x", "CalendarUnix:Interval(100-150)", "read", "calendar_unix"),
                                       perm("y", "CalendarUnix:Interval(150-200)", "read", "calendar_unix")});
    CHECK(check_access(h.engine("calendar_unix"), need("CalendarUnix:Interval(100-200)", "read"), halves).granted());
}

TEST_CASE("needs are conjunctive and empty needs are granted") {
    test::Harness h{"calendar"};
    const auto snap = make_snapshot({perm("a", "Year(2026)", "read")});
    AccessNeed both{{NeedItem{parse_rvs("Year(2026)::Month(May)"), "read"}, NeedItem{parse_rvs("Year(2027)"), "read"}}};
    const auto r = check_access(h.engine("calendar"), both, snap);
    CHECK_FALSE(r.granted());
    CHECK(r.per_need[0].satisfied);
    CHECK_FALSE(r.per_need[1].satisfied);
    CHECK(check_access(h.engine("calendar"), AccessNeed{}, snap).granted());
}

TEST_CASE("evaluation errors deny with a diagnostic") {
    test::Harness h{"calendar"};
    const auto snap = make_snapshot({perm("a", "Year(?)", "read")});
    const auto bad_node = check_access(h.engine("calendar"), need("Year(2026)::Hour(3)", "read"), snap);
    CHECK_FALSE(bad_node.granted());
    CHECK(bad_node.per_need[0].diagnostic.find("ValidationError") == 0);
    const auto bad_action = check_access(h.engine("calendar"), need("Year(2026)", "execute"), snap);
    CHECK_FALSE(bad_action.granted());
    CHECK_FALSE(bad_action.per_need[0].diagnostic.empty());

    auto forest = std::make_shared<const ResourceForest>(load_forest(R"({"trees": {"Tag": {"name": "Tag"}}, "actions": ["read"]})"));
    DifferenceEngine engine(forest);
    engine.register_difference({"Tag", [](const Rvs&, const Rvs&) -> std::vector<Rvs> { throw std::runtime_error("boom"); }});
    const auto thrown = check_access(engine, need("Tag(a)", "read"), make_snapshot({perm("t", "Tag(a)", "read", "x")}));
    CHECK_FALSE(thrown.granted());
}

TEST_CASE("detect_redundancy is directional") {
    test::Harness h{"calendar"};
    const auto& engine = h.engine("calendar");
    const auto year = perm("y", "Year(2026)", "read");
    const auto october = perm("o", "Year(2026)::Month(October)", "read");

    CHECK(detect_redundancy(engine, october, make_snapshot({year})) == std::vector<Permission>{year});
    CHECK(detect_redundancy(engine, year, make_snapshot({october})).empty());
    CHECK(detect_redundancy(engine, year, make_snapshot({year})) == std::vector<Permission>{year});
    CHECK(detect_redundancy(engine, october, make_snapshot({perm("w", "Year(2026)", "write")})).empty());
}

TEST_CASE("check_access agrees with concrete coverage, permutations, monotonicity and action isolation") {
    const auto stats = properties::algorithm1(1500, 42);
    INFO(stats.first);
    CHECK(stats.violations == 0);
    CHECK(stats.cases == 4500);
    // Both outcomes exercised.
    CHECK(stats.granted > stats.cases / 10);
    CHECK(stats.granted < stats.cases * 9 / 10);
}
