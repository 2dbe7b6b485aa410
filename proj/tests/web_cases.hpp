#pragma once

// Stored pages, grants and the checked-in mask each must produce.

#include <functional>
#include <string>
#include <vector>

#include "ac4a/json_io.hpp"
#include "ac4a/web_gate.hpp"
#include "support.hpp"

namespace web_cases {

struct Case {
    std::string golden;  // file under fixtures/golden
    std::string app;     // "game" or "calendar"
    std::string page;    // file under fixtures
    std::vector<std::pair<std::string, std::string>> grants;  // (rvs, action)
};

inline std::vector<Case> cases() {
    return {
        {"game_no_grants.json", "game", "game.html", {}},
        {"game_read.json", "game", "game.html", {{"GameId(?)", "read"}}},
        {"game_read_write.json", "game", "game.html", {{"GameId(?)", "read"}, {"GameId(?)", "write"}}},
        {"outlook_no_grants.json", "calendar", "outlook_june.html", {}},
        {"outlook_june_read.json", "calendar", "outlook_june.html", {{"Year(2026)::Month(June)", "read"}}},
        {"outlook_july_under_june.json", "calendar", "outlook_july.html", {{"Year(2026)::Month(June)", "read"}}},
        {"outlook_missing_start_date.json", "calendar", "outlook_no_start_date.html",
         {{"Year(2026)::Month(June)", "read"}}},
    };
}

inline ac4a::WebMappingConfig config_for(const std::string& app) {
    const auto configs = ac4a::parse_web_config(test::read_text(test::kData / "web" / (app + ".json")));
    return configs.begin()->second;
}

inline ac4a::MaskPlan mask(const Case& c) {
    test::Harness h{c.app};
    for (const auto& [rvs, action] : c.grants) h.grant(c.app, rvs, action);
    const auto dom = ac4a::Dom::parse(test::read_text(test::kFixtures / c.page));
    return ac4a::compute_mask(config_for(c.app), dom, h.snapshot(c.app), h.engine(c.app));
}

// Both sides re-serialized with sorted keys; empty string on a match.
inline std::string compare(const Case& c) {
    const auto got = ac4a::mask_plan_to_json(mask(c)).dump(2);
    const auto want = ac4a::Json::parse(test::read_text(test::kFixtures / "golden" / c.golden)).dump(2);
    if (got == want) return {};
    return c.golden + ": got " + got;
}

}  // namespace web_cases
