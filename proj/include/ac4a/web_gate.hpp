#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ac4a/checker.hpp"
#include "ac4a/difference.hpp"
#include "ac4a/html.hpp"
#include "ac4a/selector.hpp"

namespace ac4a {

// `$data{selector}{list}...[index](value)...@attr`
struct Extraction {
    ExtendedSelector selector;
    std::vector<std::string> list_transforms;
    std::size_t index = 0;
    std::vector<std::string> value_transforms;
    std::string attr = "text";
};

struct TemplateSegment {
    std::string node;
    std::variant<Value, Extraction> value = Value::wildcard();
};

// RVS whose values may be extracted from the page at evaluation time.
struct RvsTemplate {
    std::string text;  // source form, whitespace as written
    std::string tree;
    std::vector<TemplateSegment> segments;

    bool is_static() const;
};

using ResourceValueStringSpec = RvsTemplate;

bool is_list_transform(std::string_view name);
bool is_value_transform(std::string_view name);

std::vector<std::string> apply_list_transform(std::string_view name, const std::string& input);
// Throws ExtractionError when the input is outside the transform's domain.
std::string apply_value_transform(std::string_view name, const std::string& input);

std::string number_to_month(std::string_view number);

RvsTemplate parse_rvss(std::string_view text);

// Without a list transform the list is the attribute of every match in
// document order; with one, the first match's attribute is split.
Rvs evaluate_rvss(const RvsTemplate& tmpl, const Dom& dom);

struct WebMappingConfig {
    std::string url_pattern;  // empty for a config file without a URL key
    bool verified = false;
    std::vector<std::pair<std::string, std::vector<ExtendedSelector>>> action_map;
    std::vector<std::pair<RvsTemplate, std::vector<ExtendedSelector>>> data_map;
};

// Accepts both `{url: {...}}` documents and a bare body, stored under "".
std::map<std::string, WebMappingConfig> parse_web_config(std::string_view document);

// scheme://host/path with scheme and host lowercased; query and fragment dropped.
std::string normalize_url(std::string_view url);

// Exact match on the normalized URL, then the URL-less config if present.
const WebMappingConfig* find_web_config(const std::map<std::string, WebMappingConfig>& configs, std::string_view url);

struct MaskReason {
    std::string rvs;
    std::string action;
    std::string error;  // set when the requirement could not be evaluated

    bool operator==(const MaskReason&) const = default;
};

struct BlockedElement {
    std::string path;
    std::vector<MaskReason> reasons;

    bool operator==(const BlockedElement&) const = default;
};

struct MaskPlan {
    std::vector<BlockedElement> blocked;  // document order
    std::uint64_t evaluated_at = 0;

    bool operator==(const MaskPlan&) const = default;
};

MaskPlan compute_mask(const WebMappingConfig& config, const Dom& dom, const ActiveSnapshot& snapshot,
                      const DifferenceEngine& engine);

bool reevaluate_triggers(const MaskPlan& previous, bool dom_changed, bool permissions_changed);

// Reference overlay for consumers that mark blocked elements with `data-ac4a-blocked`.
inline constexpr std::string_view kOverlayCss =
    "[data-ac4a-blocked]{position:relative !important;}\n"
    "[data-ac4a-blocked]::after{content:\"\\1F6AB\";position:absolute;inset:0;z-index:2147483647;"
    "display:flex;align-items:center;justify-content:center;background:#111;color:#fff;font-size:24px;}\n";

}  // namespace ac4a
