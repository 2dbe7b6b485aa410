#include <doctest.h>

#include <algorithm>
#include <random>

#include "ac4a/difference.hpp"
#include "ac4a/errors.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace ac4a;

namespace {

std::shared_ptr<const ResourceForest> shared_forest(const std::string& app) {
    return std::make_shared<const ResourceForest>(test::forest(app));
}

std::vector<std::string> rendered(const std::vector<Rvs>& specs) {
    std::vector<std::string> out;
    for (const auto& s : specs) out.push_back(render_rvs(s));
    return out;
}

Rvs cal(const std::string& text) { return resolve_rvs(parse_rvs(text), test::forest("calendar")); }

}  // namespace

TEST_CASE("tree_difference follows the prefix rule") {
    CHECK(tree_difference(cal("Year(2026)::Month(October)"), cal("Year(2026)")).empty());
    CHECK(tree_difference(cal("Year(2026)::Month(October)"), cal("Year(?)")).empty());
    CHECK(tree_difference(cal("Year(2026)::Month(July)"), cal("Year(2026)::Month(June)")) ==
          std::vector<Rvs>{cal("Year(2026)::Month(July)")});
    CHECK(tree_difference(cal("Year(2026)"), cal("Year(2026)::Month(?)")) == std::vector<Rvs>{cal("Year(2026)")});
    CHECK(tree_difference(cal("Year(?)"), cal("Year(2026)")) == std::vector<Rvs>{cal("Year(?)")});
    // Values compare as exact strings.
    CHECK(tree_difference(cal("Year(2026)::Month(January)"), cal("Year(2026)::Month(january)")).size() == 1);

    const Rvs g45{"Game", {{"GameId", Value::literal("45")}}};
    const Rvs gany{"Game", {{"GameId", Value::wildcard()}}};
    const Rvs g46{"Game", {{"GameId", Value::literal("46")}}};
    CHECK(tree_difference(g45, gany).empty());
    CHECK(tree_difference(g45, g46) == std::vector<Rvs>{g45});
    CHECK_THROWS_AS(tree_difference(g45, cal("Year(2026)")), TreeMismatch);
}

TEST_CASE("interval_difference subtracts precisely") {
    using oracle::interval_spec;
    CHECK(interval_difference(interval_spec(100, 200), interval_spec(100, 150)) ==
          std::vector<Rvs>{interval_spec(150, 200)});
    CHECK(interval_difference(interval_spec(100, 200), interval_spec(120, 150)) ==
          std::vector<Rvs>{interval_spec(100, 120), interval_spec(150, 200)});
    CHECK(interval_difference(interval_spec(1696809600, 1696896000), oracle::interval_wildcard()).empty());
    CHECK(interval_difference(interval_spec(100, 200), interval_spec(0, 1000)).empty());
    CHECK(interval_difference(interval_spec(100, 200), interval_spec(200, 300)) ==
          std::vector<Rvs>{interval_spec(100, 200)});
    CHECK(interval_difference(oracle::interval_wildcard(), interval_spec(0, 10)) ==
          std::vector<Rvs>{oracle::interval_wildcard()});

    CHECK_THROWS_AS(parse_interval("200-100"), MalformedInterval);
    CHECK_THROWS_AS(parse_interval("abc"), MalformedInterval);
    CHECK_THROWS_AS(parse_interval("1-x"), MalformedInterval);
    CHECK(parse_interval("-5-3") == Interval{-5, 3});
    CHECK(format_interval({1, 2}) == "1-2");
}

TEST_CASE("interval helper agrees with the point-set oracle") {
    DifferenceEngine engine(shared_forest("calendar_unix"));
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20000; ++i) {
        const auto need = oracle::random_interval(rng);
        const auto have = rng() % 10 == 0 ? oracle::interval_wildcard() : oracle::random_interval(rng);
        const auto result = engine.resolve_difference(need, have);
        const auto expected = oracle::interval_meaning(need) & ~oracle::interval_meaning(have);
        REQUIRE_MESSAGE(oracle::interval_meaning(result) == expected,
                        render_rvs(need) << " - " << render_rvs(have));
        CHECK(result.size() <= 2);
    }
}

TEST_CASE("tree helper is sound and exact on emptiness") {
    for (const auto& universe : {oracle::game_universe(), oracle::calendar_month_universe()}) {
        const auto app = universe.tree == "Game" ? "game" : "calendar";
        DifferenceEngine engine(shared_forest(app));  // no custom function registered
        const auto specs = universe.all_specs();
        for (const auto& n : specs) {
            const auto mn = universe.meaning(n);
            for (const auto& h : specs) {
                const auto r = engine.resolve_difference(n, h);
                CHECK((r.empty() || r == std::vector<Rvs>{n}));
                CHECK(oracle::subset(universe.meaning(r), mn));
                CHECK(r.empty() == oracle::subset(mn, universe.meaning(h)));
            }
        }
    }
}

TEST_CASE("resolve_difference dispatches by tree") {
    DifferenceEngine engine(shared_forest("travel"));
    const auto flight = parse_rvs("Destination(Paris)::Flight(DL 1847)");
    const auto cruise = parse_rvs("Experience(?)::Cruise(?)");
    // Different trees are incomparable.
    CHECK(rendered(engine.resolve_difference(flight, cruise)) ==
          std::vector<std::string>{"Travel:Destination(Paris)::Flight(DL 1847)"});
    CHECK(engine.resolve_difference(flight, flight).empty());

    DifferenceEngine wallet(shared_forest("wallet"));
    const auto by_month = parse_rvs("CreditCard(?)::Transaction(?)::Year(2026)::Month(January)");
    const auto recent = parse_rvs("CreditCard(?)::Transaction(?)::Recent(5)");
    CHECK(wallet.resolve_difference(by_month, recent).size() == 1);
    CHECK(wallet.resolve_difference(recent, recent).empty());
}

TEST_CASE("custom functions are scoped, replaceable and soundness-checked") {
    auto forest = std::make_shared<const ResourceForest>(
        load_forest(R"({"trees": {"Game": {"name": "GameId"}, "Tag": {"name": "Tag"}}, "actions": ["read"]})"));
    DifferenceEngine engine(forest);
    const auto handle = engine.register_difference(apps::game_difference_function());
    CHECK(handle.tree == "Game");

    const auto g45 = parse_rvs("GameId(45)");
    CHECK(engine.resolve_difference(g45, parse_rvs("GameId(?)")).empty());
    CHECK(engine.resolve_difference(g45, parse_rvs("GameId(46)")).size() == 1);
    // Other trees keep the built-in helper.
    CHECK(engine.resolve_difference(parse_rvs("Tag(t1)"), parse_rvs("Tag(t1)")).empty());
    CHECK(engine.resolve_difference(parse_rvs("Tag(t2)"), parse_rvs("Tag(t1)")).size() == 1);

    engine.register_difference({"Game", [](const Rvs&, const Rvs&) {
                                    return std::vector<Rvs>{parse_rvs("Game:GameId(99)")};
                                }});
    CHECK_THROWS_AS(engine.resolve_difference(g45, parse_rvs("GameId(1)")), UnsoundCustomFunction);
    engine.register_difference({"Game", [](const Rvs&, const Rvs&) {
                                    return std::vector<Rvs>{parse_rvs("Tag:Tag(x)")};
                                }});
    CHECK_THROWS_AS(engine.resolve_difference(g45, parse_rvs("GameId(1)")), UnsoundCustomFunction);

    CHECK_FALSE(engine.unregister(handle));  // replaced since
    CHECK_THROWS_AS(engine.register_difference({"Nope", {}}), UnknownTree);
}

TEST_CASE("subtract_grants iterates and exits early") {
    DifferenceEngine engine(shared_forest("calendar_unix"));
    using oracle::interval_spec;
    const std::vector<Rvs> haves{interval_spec(100, 150), interval_spec(150, 200)};
    CHECK(subtract_grants(engine, interval_spec(100, 200), haves).empty());
    const std::vector<Rvs> partial{interval_spec(100, 120), interval_spec(180, 190)};
    CHECK(rendered(subtract_grants(engine, interval_spec(100, 200), partial)) ==
          std::vector<std::string>{"CalendarUnix:Interval(120-180)", "CalendarUnix:Interval(190-200)"});
    CHECK(rendered(subtract_grants(engine, interval_spec(100, 200), {})) ==
          std::vector<std::string>{"CalendarUnix:Interval(100-200)"});
}

TEST_CASE("built-in helpers are order independent") {
    DifferenceEngine intervals(shared_forest("calendar_unix"));
    DifferenceEngine calendar(shared_forest("calendar"));
    const auto universe = oracle::calendar_month_universe();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        std::vector<Rvs> haves;
        const auto count = 1 + rng() % 5;
        for (std::size_t k = 0; k < count; ++k) haves.push_back(oracle::random_interval(rng));
        const auto need = oracle::random_interval(rng);
        CHECK_FALSE(find_order_dependence(intervals, need, haves).has_value());

        // Final point sets agree across permutations, not just emptiness.
        const auto base = oracle::interval_meaning(subtract_grants(intervals, need, haves));
        auto shuffled = haves;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(oracle::interval_meaning(subtract_grants(intervals, need, shuffled)) == base);

        std::vector<Rvs> tree_haves;
        for (std::size_t k = 0; k < count; ++k) tree_haves.push_back(universe.random_spec(rng));
        CHECK_FALSE(find_order_dependence(calendar, universe.random_spec(rng), tree_haves).has_value());
    }
}

TEST_CASE("order-dependence harness flags a non-conforming function") {
    auto forest = std::make_shared<const ResourceForest>(
        load_forest(R"({"trees": {"Tag": {"name": "Tag"}}, "actions": ["read"]})"));
    DifferenceEngine engine(forest);
    // Covers the need only when `b` directly follows `a`.
    auto previous = std::make_shared<std::string>();
    engine.register_difference({"Tag", [previous](const Rvs& need, const Rvs& have) -> std::vector<Rvs> {
                                    const auto current = have.segments[0].value.text();
                                    const bool covers = *previous == "a" && current == "b";
                                    *previous = current;
                                    return covers ? std::vector<Rvs>{} : std::vector<Rvs>{need};
                                }});
    const std::vector<Rvs> haves{parse_rvs("Tag(a)"), parse_rvs("Tag(b)")};
    CHECK(find_order_dependence(engine, parse_rvs("Tag(x)"), haves).has_value());
}
