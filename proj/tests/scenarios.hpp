#pragma once

// Scripted agent sessions shared by the unit tests and the acceptance run.
// A script is a list of steps; a call step states the expected outcome and
// the exact set of unmet (rvs, action) pairs on denial.

#include <string>
#include <vector>

#include "ac4a/api_gate.hpp"
#include "support.hpp"

namespace scenario {

struct Step {
    enum class Kind { Call, Grant } kind = Kind::Call;
    std::string app;
    std::string endpoint;  // Call
    ac4a::Args args;
    bool allow = false;
    std::vector<std::string> missing;  // "action on rvs", rendered
    std::string rvs;                   // Grant
    std::string action;
};

inline Step call(std::string app, std::string endpoint, ac4a::Args args, bool allow,
                 std::vector<std::string> missing = {}) {
    return Step{Step::Kind::Call, std::move(app), std::move(endpoint), std::move(args), allow, std::move(missing), {}, {}};
}

inline Step grant(std::string app, std::string rvs, std::string action) {
    return Step{Step::Kind::Grant, std::move(app), {}, {}, false, {}, std::move(rvs), std::move(action)};
}

struct Script {
    std::string name;
    std::vector<Step> steps;
};

inline std::vector<std::string> missing_of(const ac4a::GateDecision& d) {
    std::vector<std::string> out;
    for (const auto& p : ac4a::remaining_pairs(d.check)) out.push_back(p.action + " on " + ac4a::render_rvs(p.rvs));
    return out;
}

// Runs the script and returns an empty string, or the first mismatch.
inline std::string run(test::Harness& h, const Script& script) {
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        const auto& s = script.steps[i];
        const auto where = script.name + " step " + std::to_string(i + 1) + ": ";
        try {
            if (s.kind == Step::Kind::Grant) {
                h.grant(s.app, s.rvs, s.action);
                continue;
            }
            const auto d = h.gate.intercept(s.app, s.endpoint, s.args);
            if (d.allowed() != s.allow)
                return where + s.endpoint + " expected " + (s.allow ? "allow" : "deny") + " got " +
                       (d.allowed() ? "allow" : "deny");
            if (!s.allow && missing_of(d) != s.missing) {
                std::string got;
                for (const auto& m : missing_of(d)) got += "[" + m + "]";
                return where + s.endpoint + " missing " + got;
            }
        } catch (const std::exception& e) {
            return where + "threw " + e.what();
        }
    }
    return {};
}

// Tic-tac-toe session: denied listing, read grant, denied delete, write grant.
inline Script game_script() {
    return {"game",
            {call("game", "get_games", {}, false, {"read on Game:GameId(?)"}),
             grant("game", "Game:GameId(?)", "read"),
             call("game", "get_games", {}, true),
             call("game", "delete_game", {{"game_id", std::int64_t{7}}}, false, {"write on Game:GameId(7)"}),
             grant("game", "Game:GameId(?)", "write"),
             call("game", "delete_game", {{"game_id", std::int64_t{7}}}, true)}};
}

inline ac4a::Args span(std::string from, std::string to) {
    return {{"start_date", std::move(from)}, {"end_date", std::move(to)}};
}

// Flight-booking sessions, one script per decision sequence. They share
// one harness and run in order.
inline std::vector<Script> flight_scripts() {
    return {
        {"june-read",
         {call("calendar", "get_availability", span("2026-06-01", "2026-06-30"), false,
               {"read on Calendar:Year(2026)::Month(June)"}),
          grant("calendar", "Year(2026)::Month(June)", "read"),
          call("calendar", "get_availability", span("2026-06-01", "2026-06-30"), true)}},
        {"july-under-june",
         {call("calendar", "get_availability", span("2026-07-01", "2026-07-31"), false,
               {"read on Calendar:Year(2026)::Month(July)"})}},
        {"create-june-29",
         {call("calendar", "create_event", {{"start_time", "2026-06-29T14:00"}, {"duration", std::int64_t{60}}}, false,
               {"create on Calendar:Year(2026)::Month(June)::Day(29)"})}},
        {"flight-search",
         {grant("travel", "Destination(?)::Flight(?)", "read"),
          call("travel", "search_flights", {{"destination", "Paris"}}, true)}},
        {"book-dl1847",
         {call("travel", "book_flight", {{"flight", "DL 1847"}}, false,
               {"create on Travel:Destination(?)::Flight(DL 1847)"}),
          grant("travel", "Destination(?)::Flight(DL 1847)", "create"),
          call("travel", "book_flight", {{"flight", "DL 1847"}}, true)}},
        {"wallet-card",
         {call("wallet", "get_credit_card", {}, false, {"read on CreditCard:CreditCard(?)"})}},
    };
}

}  // namespace scenario
