#include "ac4a/apps.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <set>

namespace ac4a::apps {

namespace {

using namespace std::chrono;

constexpr std::array<const char*, 12> kMonthNames{"January", "February", "March",     "April",   "May",      "June",
                                                  "July",    "August",   "September", "October", "November", "December"};

bool contains_any(const std::string& s, std::initializer_list<const char*> words) {
    for (const auto* w : words)
        if (s.find(w) != std::string::npos) return true;
    return false;
}

const ArgValue* find_arg(const Args& args, const char* key) {
    const auto it = args.find(key);
    return it == args.end() ? nullptr : &it->second;
}

std::string required_arg(const Args& args, const char* key, const std::string& endpoint) {
    const auto* v = find_arg(args, key);
    if (!v) throw PermissionFunctionError("endpoint '" + endpoint + "' requires argument '" + key + "'");
    return arg_to_string(*v);
}

std::string optional_arg(const Args& args, const char* key, const std::string& fallback = "?") {
    const auto* v = find_arg(args, key);
    return v ? arg_to_string(*v) : fallback;
}

Value value_of(const std::string& s) { return s == "?" ? Value::wildcard() : Value::literal(s); }

AccessNeed single(std::string tree, std::vector<Segment> segments, std::string action) {
    return AccessNeed{{NeedItem{Rvs{std::move(tree), std::move(segments)}, std::move(action)}}};
}

// Unix seconds, `YYYY-MM-DD`, or `YYYY-MM-DDTHH:MM[:SS]`.
sys_seconds parse_time(const ArgValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return sys_seconds{seconds{*i}};
    if (const auto* d = std::get_if<double>(&v)) return sys_seconds{seconds{static_cast<std::int64_t>(*d)}};
    const auto* s = std::get_if<std::string>(&v);
    if (!s) throw PermissionFunctionError("time argument must be a string or a number");
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    const int n = std::sscanf(s->c_str(), "%d-%d-%d%*[T ]%d:%d:%d", &y, &mo, &d, &h, &mi, &sec);
    if (n != 3 && n < 5) throw PermissionFunctionError("cannot parse time '" + *s + "'");
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw PermissionFunctionError("invalid date '" + *s + "'");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

struct DateParts {
    int year;
    unsigned month;
    unsigned day;
};

DateParts date_of(sys_seconds t) {
    const year_month_day ymd{floor<days>(t)};
    return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

// Resolves the requested time span from start_date/end_date,
// start_time/end_time or start_time/duration (minutes). End is inclusive
// for dates and exclusive for times.
std::pair<sys_seconds, sys_seconds> requested_span(const Args& args, const std::string& endpoint) {
    if (const auto* sd = find_arg(args, "start_date")) {
        const auto start = parse_time(*sd);
        const auto* ed = find_arg(args, "end_date");
        const auto end = ed ? parse_time(*ed) : start;
        if (end < start) throw PermissionFunctionError("date range ends before it starts");
        return {start, end};
    }
    const auto* st = find_arg(args, "start_time");
    if (!st) throw PermissionFunctionError("endpoint '" + endpoint + "' needs start_date or start_time");
    const auto start = parse_time(*st);
    sys_seconds end = start;
    if (const auto* et = find_arg(args, "end_time")) {
        end = parse_time(*et);
    } else if (const auto* dur = find_arg(args, "duration")) {
        const auto text = arg_to_string(*dur);
        try {
            end = start + minutes{std::stoll(text)};
        } catch (const std::exception&) {
            throw PermissionFunctionError("duration '" + text + "' is not a number of minutes");
        }
    }
    if (end > start) end -= seconds{1};
    if (end < start) throw PermissionFunctionError("time span ends before it starts");
    return {start, end};
}

}  // namespace

PermissionFunction game_permission_function() {
    return [](const std::string& endpoint, const Args& args) -> std::optional<AccessNeed> {
        static const std::set<std::string> kMapped{"get_games", "get_game", "delete_game"};
        if (!kMapped.contains(endpoint)) return std::nullopt;
        const auto game_id = endpoint == "get_games" ? std::string("?") : optional_arg(args, "game_id");
        const auto action = endpoint.find("delete") != std::string::npos ? "write" : "read";
        return single("Game", {Segment{"GameId", value_of(game_id)}}, action);
    };
}

DifferenceFunction game_difference_function() {
    return DifferenceFunction{"Game", [](const Rvs& need, const Rvs& have) -> std::vector<Rvs> {
                                  const auto& want = need.segments.front().value;
                                  const auto& got = have.segments.front().value;
                                  if (got.is_wildcard() || got == want) return {};
                                  return {need};
                              }};
}

std::string calendar_action(const std::string& endpoint) {
    if (contains_any(endpoint, {"reserve", "create", "add"})) return "create";
    if (contains_any(endpoint, {"update", "edit", "modify", "delete", "remove"})) return "write";
    return "read";
}

PermissionFunction calendar_permission_function() {
    return [](const std::string& endpoint, const Args& args) -> std::optional<AccessNeed> {
        static const std::set<std::string> kMapped{
            "get_calendar_events", "get_events",   "list_events",  "get_availability", "check_availability",
            "find_free_slots",     "create_event", "add_event",    "reserve_slot",     "update_event",
            "edit_event",          "modify_event", "delete_event", "remove_event"};
        if (!kMapped.contains(endpoint)) return std::nullopt;
        const auto [start, end] = requested_span(args, endpoint);
        const auto a = date_of(start);
        const auto b = date_of(end);
        const auto action = calendar_action(endpoint);

        // Descend Year -> Month -> Day while both ends agree.
        std::vector<Segment> segments;
        if (a.year == b.year) {
            segments.push_back({"Year", Value::literal(std::to_string(a.year))});
            if (a.month == b.month) {
                segments.push_back({"Month", Value::literal(kMonthNames[a.month - 1])});
                if (a.day == b.day) segments.push_back({"Day", Value::literal(std::to_string(a.day))});
            }
            return single("Calendar", std::move(segments), action);
        }
        AccessNeed need;
        for (int y = a.year; y <= b.year; ++y)
            need.needs.push_back(
                NeedItem{Rvs{"Calendar", {Segment{"Year", Value::literal(std::to_string(y))}}}, action});
        return need;
    };
}

PermissionFunction calendar_unix_permission_function() {
    return [](const std::string& endpoint, const Args& args) -> std::optional<AccessNeed> {
        static const std::set<std::string> kMapped{"get_events", "list_events", "create_event", "update_event",
                                                   "delete_event"};
        if (!kMapped.contains(endpoint)) return std::nullopt;
        const auto* st = find_arg(args, "start_time");
        const auto* et = find_arg(args, "end_time");
        if (!st || !et) throw PermissionFunctionError("endpoint '" + endpoint + "' needs start_time and end_time");
        const auto start = parse_time(*st).time_since_epoch().count();
        const auto end = parse_time(*et).time_since_epoch().count();
        if (end < start) throw PermissionFunctionError("time span ends before it starts");
        return single("CalendarUnix",
                      {Segment{"Interval", Value::literal(std::to_string(start) + "-" + std::to_string(end))}},
                      calendar_action(endpoint));
    };
}

PermissionFunction travel_permission_function() {
    return [](const std::string& endpoint, const Args& args) -> std::optional<AccessNeed> {
        const auto destination = value_of(optional_arg(args, "destination"));
        auto travel = [&](const char* node, std::string value, const char* action) {
            return single("Travel", {Segment{"Destination", destination}, Segment{node, value_of(value)}}, action);
        };
        if (endpoint == "search_flights") return travel("Flight", "?", "read");
        if (endpoint == "get_flight_info" || endpoint == "get_flight_details")
            return travel("Flight", required_arg(args, "flight", endpoint), "read");
        if (endpoint == "book_flight") return travel("Flight", required_arg(args, "flight", endpoint), "create");
        if (endpoint == "search_hotels") return travel("Hotel", "?", "read");
        if (endpoint == "book_hotel") return travel("Hotel", required_arg(args, "hotel", endpoint), "create");
        if (endpoint == "search_car_rentals") return travel("CarRental", "?", "read");
        if (endpoint == "book_car_rental") return travel("CarRental", required_arg(args, "car", endpoint), "create");
        if (endpoint == "search_cruises")
            return single("Experience", {Segment{"Experience", Value::wildcard()}, Segment{"Cruise", Value::wildcard()}},
                          "read");
        if (endpoint == "get_payment_methods") return single("Payment", {Segment{"Payment", Value::wildcard()}}, "read");
        if (endpoint == "make_payment")
            return single("Payment", {Segment{"Payment", value_of(optional_arg(args, "method"))}}, "create");
        return std::nullopt;
    };
}

PermissionFunction wallet_permission_function() {
    return [](const std::string& endpoint, const Args& args) -> std::optional<AccessNeed> {
        const auto card = value_of(optional_arg(args, "card"));
        auto card_need = [&](std::vector<Segment> rest, const char* action) {
            std::vector<Segment> segments{Segment{"CreditCard", card}};
            for (auto& s : rest) segments.push_back(std::move(s));
            return single("CreditCard", std::move(segments), action);
        };
        if (endpoint == "get_credit_card" || endpoint == "get_credit_cards") return card_need({}, "read");
        if (endpoint == "get_card_number") return card_need({{"Number", Value::wildcard()}}, "read");
        if (endpoint == "get_cvv") return card_need({{"CVV", Value::wildcard()}}, "read");
        if (endpoint == "get_expiry_date") return card_need({{"Expiry date", Value::wildcard()}}, "read");
        if (endpoint == "get_recent_transactions")
            return card_need({{"Transaction", Value::wildcard()}, {"Recent", value_of(optional_arg(args, "count"))}},
                             "read");
        if (endpoint == "get_transactions") {
            std::vector<Segment> rest{{"Transaction", Value::wildcard()}, {"Year", value_of(optional_arg(args, "year"))}};
            if (find_arg(args, "month")) rest.push_back({"Month", value_of(optional_arg(args, "month"))});
            return card_need(std::move(rest), "read");
        }
        return std::nullopt;
    };
}

PermissionFunction filesystem_permission_function() {
    return [](const std::string& endpoint, const Args& args) -> std::optional<AccessNeed> {
        const bool is_file = endpoint == "read_file" || endpoint == "write_file" || endpoint == "delete_file";
        const bool is_dir = endpoint == "list_directory";
        if (!is_file && !is_dir) return std::nullopt;
        const auto path = required_arg(args, "path", endpoint);
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= path.size()) {
            const auto slash = path.find('/', pos);
            const auto part = path.substr(pos, slash == std::string::npos ? std::string::npos : slash - pos);
            if (!part.empty()) parts.push_back(part);
            if (slash == std::string::npos) break;
            pos = slash + 1;
        }
        if (parts.empty() || (is_file && parts.size() < 2))
            throw PermissionFunctionError("path '" + path + "' does not name a file inside a directory");
        std::vector<Segment> segments;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const bool last = i + 1 == parts.size();
            segments.push_back({last && is_file ? "File" : "Directory", Value::literal(parts[i])});
        }
        return single("FileSystem", std::move(segments), endpoint == "read_file" || is_dir ? "read" : "write");
    };
}

std::optional<PermissionFunction> builtin_permission_function(const std::string& app) {
    if (app == "game") return game_permission_function();
    if (app == "calendar") return calendar_permission_function();
    if (app == "calendar_unix") return calendar_unix_permission_function();
    if (app == "travel") return travel_permission_function();
    if (app == "wallet") return wallet_permission_function();
    if (app == "filesystem") return filesystem_permission_function();
    return std::nullopt;
}

bool install_builtin(ApplicationRegistry& registry, const std::string& app) {
    auto fn = builtin_permission_function(app);
    if (!fn) return false;
    registry.register_permission_function(app, std::move(*fn));
    if (app == "game") registry.get(app).engine->register_difference(game_difference_function());
    return true;
}

}  // namespace ac4a::apps
