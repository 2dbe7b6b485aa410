#include "ac4a/web_gate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>

#include <json.hpp>

#include "ac4a/errors.hpp"

namespace ac4a {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 3> kListTransforms{"split_slash", "split_space", "split_dash"};
constexpr std::array<std::string_view, 3> kValueTransforms{"number_to_month", "trim", "lowercase"};
constexpr std::array<std::string_view, 12> kMonths{"January", "February", "March",     "April",   "May",      "June",
                                                   "July",    "August",   "September", "October", "November", "December"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

std::string trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto at = s.find(sep, start);
        out.push_back(trim(std::string_view(s).substr(start, at == std::string::npos ? std::string::npos : at - start)));
        if (at == std::string::npos) break;
        start = at + 1;
    }
    return out;
}

class TemplateParser {
public:
    explicit TemplateParser(std::string_view text) : src_(text) {}

    RvsTemplate parse() {
        RvsTemplate out;
        out.text = std::string(src_);
        skip_space();
        if (at_end()) fail("empty template");
        bool first = true;
        for (;;) {
            const auto name_at = pos_;
            auto name = read_name();
            if (first && peek() == ':' && peek(1) != ':') {
                out.tree = check_name(name, name_at, "tree");
                ++pos_;
                skip_space();
                const auto node_at = pos_;
                name = read_name();
                out.segments.push_back(segment(name, node_at));
            } else {
                out.segments.push_back(segment(name, name_at));
            }
            first = false;
            skip_space();
            if (at_end()) break;
            if (peek() != ':' || peek(1) != ':') fail("expected '::'");
            pos_ += 2;
            skip_space();
            if (at_end()) fail("dangling '::'");
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw TemplateSyntaxError("template '" + std::string(src_) + "': " + message, pos_);
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

    void skip_space() {
        while (!at_end() && is_space(src_[pos_])) ++pos_;
    }

    std::string_view read_name() {
        const auto start = pos_;
        while (!at_end() && src_[pos_] != '(' && src_[pos_] != ':' && src_[pos_] != ')') ++pos_;
        return src_.substr(start, pos_ - start);
    }

    std::string check_name(std::string_view raw, std::size_t at, const char* what) {
        auto name = trim(raw);
        if (name.empty() || !is_valid_node_name(name)) {
            pos_ = at;
            fail(std::string("invalid ") + what + " name '" + name + "'");
        }
        return name;
    }

    TemplateSegment segment(std::string_view raw_name, std::size_t name_at) {
        TemplateSegment seg;
        seg.node = check_name(raw_name, name_at, "node");
        if (peek() != '(') fail("expected '(' after node name");
        ++pos_;
        if (src_.substr(pos_, 6) == "$data{") {
            pos_ += 5;
            seg.value = extraction();
            if (peek() != ')') fail("expected ')' after extraction");
            ++pos_;
            return seg;
        }
        const auto close = src_.find(')', pos_);
        if (close == std::string_view::npos) fail("missing ')'");
        const auto raw = src_.substr(pos_, close - pos_);
        if (raw.empty()) fail("empty value (use '?' for the wildcard)");
        pos_ = close + 1;
        seg.value = raw == "?" ? Value::wildcard() : Value::literal(std::string(raw));
        return seg;
    }

    // Body of `{...}`, honouring quotes; pos_ is on the `{`.
    std::string braced() {
        const auto open = pos_++;
        char quote = 0;
        int depth = 0;
        for (; !at_end(); ++pos_) {
            const char c = src_[pos_];
            if (quote) {
                if (c == '\\') ++pos_;
                else if (c == quote) quote = 0;
            } else if (c == '\'' || c == '"') {
                quote = c;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (depth == 0) {
                    const auto body = src_.substr(open + 1, pos_ - open - 1);
                    ++pos_;
                    return std::string(body);
                }
                --depth;
            }
        }
        pos_ = open;
        fail("unterminated '{'");
    }

    std::string identifier() {
        const auto start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                             src_[pos_] == '-'))
            ++pos_;
        if (pos_ == start) fail("expected an identifier");
        return std::string(src_.substr(start, pos_ - start));
    }

    Extraction extraction() {
        Extraction ex;
        const auto selector_at = pos_;
        const auto selector = braced();
        try {
            ex.selector = ExtendedSelector::parse(selector);
        } catch (const SelectorSyntaxError& e) {
            pos_ = selector_at;
            fail(e.what());
        }
        while (peek() == '{') {
            const auto at = pos_;
            auto name = trim(braced());
            if (!is_list_transform(name)) {
                pos_ = at;
                fail("unknown list transformation '" + name + "'");
            }
            ex.list_transforms.push_back(std::move(name));
        }
        if (peek() != '[') fail("expected '[index]'");
        ++pos_;
        const auto digits_at = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const auto digits = src_.substr(digits_at, pos_ - digits_at);
        if (digits.empty()) fail("index must be a non-negative integer");
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ex.index);
        if (ec != std::errc{}) fail("index out of range");
        if (peek() != ']') fail("expected ']'");
        ++pos_;
        // The value transformation is written either `(name)` or `{name}`.
        while (peek() == '(' || peek() == '{') {
            const auto at = pos_;
            std::string name;
            if (peek() == '{') {
                name = trim(braced());
            } else {
                ++pos_;
                name = identifier();
                if (peek() != ')') fail("expected ')' after value transformation");
                ++pos_;
            }
            if (!is_value_transform(name)) {
                pos_ = at;
                fail("unknown value transformation '" + name + "'");
            }
            ex.value_transforms.push_back(std::move(name));
        }
        if (peek() == '@') {
            ++pos_;
            ex.attr = identifier();
            std::transform(ex.attr.begin(), ex.attr.end(), ex.attr.begin(),
                           [](unsigned char c) { return std::tolower(c); });
        }
        return ex;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

std::string read_attr(const Dom& dom, int element, const std::string& attr, const std::string& selector) {
    const auto& el = dom.element(element);
    if (attr == "text") return trim(el.text);
    const auto* v = el.attribute(attr);
    if (!v) throw ExtractionError("element matched by '" + selector + "' has no attribute '" + attr + "'");
    return *v;
}

std::string evaluate_extraction(const Extraction& ex, const Dom& dom) {
    const auto matches = ex.selector.match_all(dom);
    const auto& sel = ex.selector.text();
    if (matches.empty()) throw ExtractionError("no element matches '" + sel + "'");
    std::vector<std::string> list;
    if (ex.list_transforms.empty()) {
        for (const int id : matches) list.push_back(read_attr(dom, id, ex.attr, sel));
    } else {
        list.push_back(read_attr(dom, matches.front(), ex.attr, sel));
        for (const auto& t : ex.list_transforms) {
            std::vector<std::string> next;
            for (const auto& item : list) {
                auto pieces = apply_list_transform(t, item);
                next.insert(next.end(), pieces.begin(), pieces.end());
            }
            list = std::move(next);
        }
    }
    if (ex.index >= list.size())
        throw ExtractionError("index " + std::to_string(ex.index) + " out of range for '" + sel + "' (" +
                              std::to_string(list.size()) + " items)");
    auto value = list[ex.index];
    for (const auto& t : ex.value_transforms) value = apply_value_transform(t, value);
    if (value.empty()) throw ExtractionError("extracted an empty value from '" + sel + "'");
    if (value == "?" || value.find(')') != std::string::npos)
        throw ExtractionError("extracted value '" + value + "' from '" + sel + "' is not a literal");
    return value;
}

std::vector<ExtendedSelector> parse_selector_list(const ordered_json& list, const std::string& where) {
    if (!list.is_array()) throw FormatError(where + ": expected an array of selectors");
    std::vector<ExtendedSelector> out;
    for (const auto& s : list) {
        if (!s.is_string()) throw FormatError(where + ": selectors must be strings");
        out.push_back(ExtendedSelector::parse(s.get<std::string>()));
    }
    return out;
}

WebMappingConfig parse_body(const ordered_json& body, const std::string& url) {
    const auto where = url.empty() ? std::string("config") : "config '" + url + "'";
    if (!body.is_object()) throw FormatError(where + ": expected an object");
    WebMappingConfig cfg;
    cfg.url_pattern = url;
    auto add_template = [&](const std::string& key, const ordered_json& list) {
        cfg.data_map.emplace_back(parse_rvss(key), parse_selector_list(list, where + " data '" + key + "'"));
    };
    for (const auto& [key, value] : body.items()) {
        if (key == "verified") {
            if (!value.is_boolean()) throw FormatError(where + ": 'verified' must be a boolean");
            cfg.verified = value.get<bool>();
        } else if (key == "data") {
            if (!value.is_object()) throw FormatError(where + ": 'data' must be an object");
            for (const auto& [tkey, tlist] : value.items()) add_template(tkey, tlist);
        } else if (key.find('(') != std::string::npos) {
            add_template(key, value);
        } else {
            if (key.empty()) throw FormatError(where + ": empty action name");
            cfg.action_map.emplace_back(key, parse_selector_list(value, where + " action '" + key + "'"));
        }
    }
    std::set<std::string> with_action;
    for (const auto& [_, sels] : cfg.action_map)
        for (const auto& s : sels) with_action.insert(s.text());
    for (const auto& [tmpl, sels] : cfg.data_map)
        for (const auto& s : sels)
            if (!with_action.count(s.text()))
                throw FormatError(where + ": selector '" + s.text() + "' for '" + tmpl.text +
                                  "' has no action mapping");
    return cfg;
}

Rvs root_wildcard(const ResourceTypeTree& tree) {
    return Rvs{tree.tree_name, {Segment{tree.root.name, Value::wildcard()}}};
}

std::vector<std::string> split_actions(const std::string& text) {
    std::vector<std::string> out;
    for (auto& a : split_on(text, ','))
        if (!a.empty()) out.push_back(std::move(a));
    return out;
}

template <typename T>
void push_unique(std::vector<T>& v, T item) {
    if (std::find(v.begin(), v.end(), item) == v.end()) v.push_back(std::move(item));
}

// One resource requirement of an element: resolved, or failed to evaluate.
struct ResourceReq {
    std::optional<Rvs> rvs;
    std::string source;
    std::string error;
};

}  // namespace

bool RvsTemplate::is_static() const {
    return std::all_of(segments.begin(), segments.end(),
                       [](const TemplateSegment& s) { return std::holds_alternative<Value>(s.value); });
}

bool is_list_transform(std::string_view name) {
    return std::find(kListTransforms.begin(), kListTransforms.end(), name) != kListTransforms.end();
}

bool is_value_transform(std::string_view name) {
    return std::find(kValueTransforms.begin(), kValueTransforms.end(), name) != kValueTransforms.end();
}

std::vector<std::string> apply_list_transform(std::string_view name, const std::string& input) {
    if (name == "split_slash") return split_on(input, '/');
    if (name == "split_dash") return split_on(input, '-');
    if (name == "split_space") {
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < input.size()) {
            while (i < input.size() && is_space(input[i])) ++i;
            const auto start = i;
            while (i < input.size() && !is_space(input[i])) ++i;
            if (i > start) out.push_back(input.substr(start, i - start));
        }
        return out;
    }
    throw ExtractionError("unknown list transformation '" + std::string(name) + "'");
}

std::string apply_value_transform(std::string_view name, const std::string& input) {
    if (name == "number_to_month") return number_to_month(input);
    if (name == "trim") return trim(input);
    if (name == "lowercase") {
        std::string out = input;
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    }
    throw ExtractionError("unknown value transformation '" + std::string(name) + "'");
}

std::string number_to_month(std::string_view number) {
    const auto text = trim(number);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (text.empty() || text.size() > 2 || ec != std::errc{} || ptr != text.data() + text.size() || n < 1 || n > 12)
        throw ExtractionError("'" + text + "' is not a month number");
    return std::string(kMonths[static_cast<std::size_t>(n - 1)]);
}

RvsTemplate parse_rvss(std::string_view text) { return TemplateParser(text).parse(); }

Rvs evaluate_rvss(const RvsTemplate& tmpl, const Dom& dom) {
    Rvs out;
    out.tree = tmpl.tree;
    for (const auto& seg : tmpl.segments) {
        if (const auto* v = std::get_if<Value>(&seg.value))
            out.segments.push_back(Segment{seg.node, *v});
        else
            out.segments.push_back(
                Segment{seg.node, Value::literal(evaluate_extraction(std::get<Extraction>(seg.value), dom))});
    }
    return out;
}

std::map<std::string, WebMappingConfig> parse_web_config(std::string_view document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("web config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("web config must be a JSON object");
    std::map<std::string, WebMappingConfig> out;
    const bool wrapped = !doc.empty() && std::all_of(doc.begin(), doc.end(), [](const ordered_json& v) {
        return v.is_object();
    }) && !doc.contains("data");
    if (!wrapped) {
        out.emplace("", parse_body(doc, ""));
        return out;
    }
    for (const auto& [url, body] : doc.items()) {
        if (url.empty()) throw FormatError("empty URL key in web config");
        if (!out.emplace(normalize_url(url), parse_body(body, url)).second)
            throw FormatError("duplicate URL '" + url + "' after normalization");
    }
    return out;
}

std::string normalize_url(std::string_view url) {
    auto s = trim(url);
    const auto cut = s.find_first_of("?#");
    if (cut != std::string::npos) s.erase(cut);
    const auto scheme_end = s.find("://");
    if (scheme_end == std::string::npos) return s;
    const auto host_end = s.find('/', scheme_end + 3);
    const auto authority_end = host_end == std::string::npos ? s.size() : host_end;
    std::transform(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(authority_end), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (host_end == std::string::npos) s += '/';
    return s;
}

const WebMappingConfig* find_web_config(const std::map<std::string, WebMappingConfig>& configs, std::string_view url) {
    const auto it = configs.find(normalize_url(url));
    if (it != configs.end()) return &it->second;
    const auto bare = configs.find("");
    return bare == configs.end() ? nullptr : &bare->second;
}

MaskPlan compute_mask(const WebMappingConfig& config, const Dom& dom, const ActiveSnapshot& snapshot,
                      const DifferenceEngine& engine) {
    const auto& forest = engine.forest();
    const auto n = dom.size();
    std::vector<std::vector<std::string>> actions(n);
    std::vector<std::vector<std::size_t>> templates(n);  // indices into data_map
    std::vector<bool> touched(n, false);

    for (const auto& [action, sels] : config.action_map)
        for (const auto& sel : sels)
            for (const int id : sel.match_all(dom)) {
                push_unique(actions[static_cast<std::size_t>(id)], action);
                touched[static_cast<std::size_t>(id)] = true;
            }
    for (std::size_t t = 0; t < config.data_map.size(); ++t)
        for (const auto& sel : config.data_map[t].second)
            for (const int id : sel.match_all(dom)) {
                push_unique(templates[static_cast<std::size_t>(id)], t);
                touched[static_cast<std::size_t>(id)] = true;
            }

    // Each template is evaluated at most once per DOM.
    std::vector<std::optional<ResourceReq>> evaluated(config.data_map.size());
    auto template_req = [&](std::size_t t) -> const ResourceReq& {
        if (!evaluated[t]) {
            const auto& tmpl = config.data_map[t].first;
            ResourceReq req{std::nullopt, tmpl.text, {}};
            try {
                req.rvs = evaluate_rvss(tmpl, dom);
            } catch (const std::exception& e) {
                req.error = e.what();
            }
            evaluated[t] = std::move(req);
        }
        return *evaluated[t];
    };

    MaskPlan plan;
    plan.evaluated_at = snapshot.snapshot_id;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& el = dom.element(static_cast<int>(i));
        std::vector<ResourceReq> resources;
        for (const auto t : templates[i]) resources.push_back(template_req(t));

        const auto* attr_resource = el.attribute("data-ac4a-resource");
        const auto* attr_action = el.attribute("data-ac4a-action");
        if (attr_action) {
            for (auto& a : split_actions(*attr_action)) push_unique(actions[i], std::move(a));
            touched[i] = true;
        }
        if (attr_resource) {
            touched[i] = true;
            const auto* static_attr = el.attribute("data-ac4a-static");
            const bool dynamic = static_attr && trim(*static_attr) == "false";
            ResourceReq req{std::nullopt, *attr_resource, {}};
            try {
                req.rvs = dynamic ? evaluate_rvss(parse_rvss(*attr_resource), dom) : parse_rvs(*attr_resource);
            } catch (const std::exception& e) {
                req.error = e.what();
            }
            resources.push_back(std::move(req));
        }
        if (!touched[i]) continue;

        auto& acts = actions[i];
        if (acts.empty()) acts = forest.actions();
        const bool any_resolved =
            std::any_of(resources.begin(), resources.end(), [](const ResourceReq& r) { return r.rvs.has_value(); });
        const bool any_failed =
            std::any_of(resources.begin(), resources.end(), [](const ResourceReq& r) { return !r.error.empty(); });
        if (!any_resolved && !any_failed)
            for (const auto& [_, tree] : forest.trees()) resources.push_back({root_wildcard(tree), "", {}});

        BlockedElement blocked{el.path, {}};
        AccessNeed need;
        for (const auto& r : resources) {
            for (const auto& a : acts) {
                if (r.rvs)
                    need.needs.push_back(NeedItem{*r.rvs, a});
                else
                    push_unique(blocked.reasons, MaskReason{r.source, a, r.error});
            }
        }
        if (!need.needs.empty()) {
            const auto result = check_access(engine, need, snapshot);
            if (!result.error.empty())
                for (const auto& item : need.needs)
                    push_unique(blocked.reasons, MaskReason{render_rvs(item.rvs), item.action, result.error});
            for (const auto& outcome : result.per_need) {
                if (outcome.satisfied) continue;
                if (!outcome.diagnostic.empty() || outcome.remaining.empty()) {
                    push_unique(blocked.reasons,
                                MaskReason{render_rvs(outcome.need.rvs), outcome.need.action, outcome.diagnostic});
                    continue;
                }
                for (const auto& r : outcome.remaining)
                    push_unique(blocked.reasons, MaskReason{render_rvs(r), outcome.need.action, {}});
            }
        }
        if (!blocked.reasons.empty()) plan.blocked.push_back(std::move(blocked));
    }
    return plan;
}

bool reevaluate_triggers(const MaskPlan&, bool dom_changed, bool permissions_changed) {
    return dom_changed || permissions_changed;
}

}  // namespace ac4a
