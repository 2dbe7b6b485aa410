#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ac4a/errors.hpp"

namespace ac4a {

// How the built-in difference helpers interpret the values of a node.
enum class ValueKind { Enum, Interval, Opaque };

std::string_view to_string(ValueKind kind);

struct ResourceTypeNode {
    std::string name;
    // The node may repeat: it has an implicit child edge to itself.
    bool recursive_self = false;
    ValueKind kind = ValueKind::Enum;
    std::vector<ResourceTypeNode> children;

    // Follows one edge, including the implicit self edge of recursive nodes.
    const ResourceTypeNode* child(std::string_view child_name) const;
};

struct ResourceTypeTree {
    std::string tree_name;
    ResourceTypeNode root;

    bool declares(std::string_view node_name) const;
};

// All trees and actions one application declares.
class ResourceForest {
public:
    ResourceForest() = default;
    ResourceForest(std::map<std::string, ResourceTypeTree> trees, std::vector<std::string> actions);

    const std::map<std::string, ResourceTypeTree>& trees() const { return trees_; }
    const std::vector<std::string>& actions() const { return actions_; }

    const ResourceTypeTree* find_tree(std::string_view tree_name) const;
    bool has_action(std::string_view action) const;

private:
    std::map<std::string, ResourceTypeTree> trees_;
    std::vector<std::string> actions_;
};

// A segment value: a literal string or the `?` wildcard.
class Value {
public:
    static Value wildcard() { return Value(true, {}); }
    static Value literal(std::string text) { return Value(false, std::move(text)); }

    bool is_wildcard() const { return wildcard_; }
    const std::string& text() const { return text_; }

    bool operator==(const Value&) const = default;

private:
    Value(bool wildcard, std::string text) : wildcard_(wildcard), text_(std::move(text)) {}

    bool wildcard_;
    std::string text_;
};

struct Segment {
    std::string node;
    Value value;

    bool operator==(const Segment&) const = default;
};

// Resource value specification: `Tree:Node(v)::Node(v)...`. An empty tree
// name means the textual form was unprefixed and is not yet resolved.
struct Rvs {
    std::string tree;
    std::vector<Segment> segments;

    bool operator==(const Rvs&) const = default;
};

Rvs parse_rvs(std::string_view text);
std::string render_rvs(const Rvs& rvs);

bool is_valid_node_name(std::string_view name);

enum class ValidationErrorKind { None, UnknownTree, UnknownNode, NotAChild, AmbiguousRoot };

std::string_view to_string(ValidationErrorKind kind);

struct ValidationResult {
    ValidationErrorKind error = ValidationErrorKind::None;
    // Zero-based index of the first offending segment.
    std::size_t segment = 0;
    std::string message;
    // Resolved tree and the node visited by each segment; only set when ok.
    const ResourceTypeTree* tree = nullptr;
    std::vector<const ResourceTypeNode*> path;

    bool ok() const { return error == ValidationErrorKind::None; }
    explicit operator bool() const { return ok(); }
};

ValidationResult validate_rvs(const Rvs& rvs, const ResourceForest& forest);

// Validates and returns the prefixed form. Throws ValidationError.
Rvs resolve_rvs(const Rvs& rvs, const ResourceForest& forest);

// Parses and validates a tree-definition JSON document.
ResourceForest load_forest(std::string_view document);

}  // namespace ac4a
