#include "ac4a/resource_model.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace ac4a {

namespace {

constexpr std::string_view kReserved = ":()?,";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

class RvsParser {
public:
    explicit RvsParser(std::string_view text) : text_(text) {}

    Rvs parse() {
        if (trim(text_).empty()) throw SyntaxError("empty resource value specification", 0);
        Rvs rvs;
        skip_space();
        bool first = true;
        for (;;) {
            const std::size_t name_start = pos_;
            std::string_view name = read_name();
            if (first && peek() == ':' && peek(1) != ':') {
                rvs.tree = std::string(check_name(name, name_start, "tree"));
                ++pos_;
                skip_space();
                const std::size_t node_start = pos_;
                name = read_name();
                rvs.segments.push_back(read_segment(name, node_start));
            } else {
                rvs.segments.push_back(read_segment(name, name_start));
            }
            first = false;
            skip_space();
            if (pos_ == text_.size()) break;
            if (peek() != ':' || peek(1) != ':') throw SyntaxError("expected '::'", pos_);
            pos_ += 2;
            skip_space();
            if (pos_ == text_.size()) throw SyntaxError("dangling '::'", pos_ - 2);
        }
        return rvs;
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    std::string_view read_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ':' && text_[pos_] != ')') ++pos_;
        return text_.substr(start, pos_ - start);
    }

    std::string_view check_name(std::string_view raw, std::size_t at, const char* what) const {
        const auto name = trim(raw);
        if (name.empty()) throw SyntaxError(std::string("empty ") + what + " name", at);
        if (!is_valid_node_name(name)) throw SyntaxError(std::string("invalid ") + what + " name '" + std::string(name) + "'", at);
        return name;
    }

    Segment read_segment(std::string_view raw_name, std::size_t name_at) {
        const auto name = check_name(raw_name, name_at, "node");
        if (peek() != '(') throw SyntaxError("expected '(' after node name", pos_);
        const std::size_t open = pos_++;
        const auto close = text_.find(')', pos_);
        if (close == std::string_view::npos) throw SyntaxError("missing ')'", open);
        const auto raw = text_.substr(pos_, close - pos_);
        pos_ = close + 1;
        if (raw.empty()) throw SyntaxError("empty value (use '?' for the wildcard)", open + 1);
        return Segment{std::string(name), raw == "?" ? Value::wildcard() : Value::literal(std::string(raw))};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw FormatError("unexpected key '" + key + "' in " + where);
    }
}

ValueKind parse_kind(const std::string& text, const std::string& where) {
    if (text == "enum") return ValueKind::Enum;
    if (text == "interval") return ValueKind::Interval;
    if (text == "opaque") return ValueKind::Opaque;
    throw FormatError("unknown kind '" + text + "' in " + where);
}

ResourceTypeNode parse_node(const json& j, const std::string& where) {
    if (!j.is_object()) throw FormatError(where + ": node must be an object");
    require_keys(j, {"name", "recursive", "children", "kind"}, where);
    if (!j.contains("name") || !j["name"].is_string()) throw FormatError(where + ": node needs a string 'name'");
    ResourceTypeNode node;
    node.name = j["name"].get<std::string>();
    if (!is_valid_node_name(node.name)) throw FormatError(where + ": invalid node name '" + node.name + "'");
    const auto here = where + "/" + node.name;
    if (j.contains("recursive")) {
        if (!j["recursive"].is_boolean()) throw FormatError(here + ": 'recursive' must be a boolean");
        node.recursive_self = j["recursive"].get<bool>();
    }
    if (j.contains("kind")) {
        if (!j["kind"].is_string()) throw FormatError(here + ": 'kind' must be a string");
        node.kind = parse_kind(j["kind"].get<std::string>(), here);
    }
    if (j.contains("children")) {
        if (!j["children"].is_array()) throw FormatError(here + ": 'children' must be an array");
        std::set<std::string> seen;
        if (node.recursive_self) seen.insert(node.name);
        for (const auto& c : j["children"]) {
            auto child = parse_node(c, here);
            if (!seen.insert(child.name).second)
                throw DuplicateSibling(here + ": duplicate child '" + child.name + "'");
            node.children.push_back(std::move(child));
        }
    }
    return node;
}

bool node_declares(const ResourceTypeNode& node, std::string_view name) {
    if (node.name == name) return true;
    return std::any_of(node.children.begin(), node.children.end(),
                       [&](const ResourceTypeNode& c) { return node_declares(c, name); });
}

}  // namespace

std::string_view to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::Enum: return "enum";
        case ValueKind::Interval: return "interval";
        case ValueKind::Opaque: return "opaque";
    }
    return "enum";
}

std::string_view to_string(ValidationErrorKind kind) {
    switch (kind) {
        case ValidationErrorKind::None: return "None";
        case ValidationErrorKind::UnknownTree: return "UnknownTree";
        case ValidationErrorKind::UnknownNode: return "UnknownNode";
        case ValidationErrorKind::NotAChild: return "NotAChild";
        case ValidationErrorKind::AmbiguousRoot: return "AmbiguousRoot";
    }
    return "None";
}

const ResourceTypeNode* ResourceTypeNode::child(std::string_view child_name) const {
    if (recursive_self && child_name == name) return this;
    for (const auto& c : children)
        if (c.name == child_name) return &c;
    return nullptr;
}

bool ResourceTypeTree::declares(std::string_view node_name) const { return node_declares(root, node_name); }

ResourceForest::ResourceForest(std::map<std::string, ResourceTypeTree> trees, std::vector<std::string> actions)
    : trees_(std::move(trees)), actions_(std::move(actions)) {
    if (actions_.empty()) throw EmptyActionSet("an application must declare at least one action");
    std::set<std::string> seen;
    for (const auto& a : actions_) {
        if (a.empty()) throw FormatError("action identifiers must be non-empty");
        if (!seen.insert(a).second) throw FormatError("duplicate action '" + a + "'");
    }
    for (const auto& [name, tree] : trees_) {
        if (name != tree.tree_name) throw FormatError("tree key '" + name + "' does not match tree name");
        if (!is_valid_node_name(name)) throw FormatError("invalid tree name '" + name + "'");
    }
}

const ResourceTypeTree* ResourceForest::find_tree(std::string_view tree_name) const {
    const auto it = trees_.find(std::string(tree_name));
    return it == trees_.end() ? nullptr : &it->second;
}

bool ResourceForest::has_action(std::string_view action) const {
    return std::find(actions_.begin(), actions_.end(), action) != actions_.end();
}

bool is_valid_node_name(std::string_view name) {
    if (name.empty() || trim(name) != name) return false;
    return name.find_first_of(kReserved) == std::string_view::npos;
}

Rvs parse_rvs(std::string_view text) { return RvsParser(text).parse(); }

std::string render_rvs(const Rvs& rvs) {
    std::string out;
    if (!rvs.tree.empty()) out += rvs.tree + ":";
    for (std::size_t i = 0; i < rvs.segments.size(); ++i) {
        if (i) out += "::";
        const auto& seg = rvs.segments[i];
        out += seg.node;
        out += '(';
        out += seg.value.is_wildcard() ? std::string("?") : seg.value.text();
        out += ')';
    }
    return out;
}

ValidationResult validate_rvs(const Rvs& rvs, const ResourceForest& forest) {
    ValidationResult result;
    auto fail = [&](ValidationErrorKind kind, std::size_t segment, std::string message) {
        result.error = kind;
        result.segment = segment;
        result.message = std::move(message);
        result.tree = nullptr;
        result.path.clear();
        return result;
    };
    if (rvs.segments.empty()) return fail(ValidationErrorKind::UnknownNode, 0, "specification has no segments");

    const auto& first = rvs.segments.front().node;
    const ResourceTypeTree* tree = nullptr;
    if (!rvs.tree.empty()) {
        tree = forest.find_tree(rvs.tree);
        if (!tree) return fail(ValidationErrorKind::UnknownTree, 0, "unknown tree '" + rvs.tree + "'");
        if (tree->root.name != first)
            return fail(ValidationErrorKind::UnknownNode, 0,
                        "'" + first + "' is not the root of tree '" + rvs.tree + "'");
    } else {
        for (const auto& [name, candidate] : forest.trees()) {
            if (candidate.root.name != first) continue;
            if (tree)
                return fail(ValidationErrorKind::AmbiguousRoot, 0,
                            "root '" + first + "' is declared by trees '" + tree->tree_name + "' and '" + name + "'");
            tree = &candidate;
        }
        if (!tree) return fail(ValidationErrorKind::UnknownNode, 0, "no tree has root '" + first + "'");
    }

    const ResourceTypeNode* node = &tree->root;
    result.path.push_back(node);
    for (std::size_t i = 1; i < rvs.segments.size(); ++i) {
        const auto& name = rvs.segments[i].node;
        const auto* next = node->child(name);
        if (!next) {
            if (tree->declares(name))
                return fail(ValidationErrorKind::NotAChild, i, "'" + name + "' is not a child of '" + node->name + "'");
            return fail(ValidationErrorKind::UnknownNode, i,
                        "tree '" + tree->tree_name + "' has no node '" + name + "'");
        }
        node = next;
        result.path.push_back(node);
    }
    result.tree = tree;
    return result;
}

Rvs resolve_rvs(const Rvs& rvs, const ResourceForest& forest) {
    const auto result = validate_rvs(rvs, forest);
    if (!result)
        throw ValidationError(std::string(to_string(result.error)) + " in '" + render_rvs(rvs) + "' at segment " +
                              std::to_string(result.segment + 1) + ": " + result.message);
    Rvs resolved = rvs;
    resolved.tree = result.tree->tree_name;
    return resolved;
}

ResourceForest load_forest(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("tree definition must be a JSON object");
    require_keys(doc, {"trees", "actions"}, "tree definition");
    if (!doc.contains("trees") || !doc["trees"].is_object()) throw FormatError("'trees' must be an object");
    if (!doc.contains("actions") || !doc["actions"].is_array()) throw FormatError("'actions' must be an array");

    std::map<std::string, ResourceTypeTree> trees;
    for (const auto& [name, node] : doc["trees"].items()) {
        if (!is_valid_node_name(name)) throw FormatError("invalid tree name '" + name + "'");
        trees.emplace(name, ResourceTypeTree{name, parse_node(node, name)});
    }
    std::vector<std::string> actions;
    for (const auto& a : doc["actions"]) {
        if (!a.is_string()) throw FormatError("actions must be strings");
        actions.push_back(a.get<std::string>());
    }
    if (actions.empty()) throw EmptyActionSet("'actions' is empty");
    return ResourceForest(std::move(trees), std::move(actions));
}

}  // namespace ac4a
