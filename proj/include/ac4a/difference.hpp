#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "ac4a/resource_model.hpp"

namespace ac4a {

// resource_difference(need, have) -> remaining. The union of the returned
// specifications must denote a subset of `need`.
using DifferenceFn = std::function<std::vector<Rvs>(const Rvs& need, const Rvs& have)>;

struct DifferenceFunction {
    std::string applies_to;  // tree name
    DifferenceFn evaluate;
};

struct RegistrationHandle {
    std::string tree;
    std::uint64_t generation = 0;
};

// Half-open integer interval [lo, hi), written `lo-hi`.
struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    bool empty() const { return lo >= hi; }
    bool operator==(const Interval&) const = default;
};

Interval parse_interval(std::string_view text);
std::string format_interval(const Interval& interval);

// Prefix rule on resolved specs: ∅ when every segment of `have` matches the
// corresponding segment of `need` (wildcard or exact string), else {need}.
std::vector<Rvs> tree_difference(const Rvs& need, const Rvs& have);

// Precise subtraction on the last segment of `have`, which the caller knows
// to be interval-valued; earlier segments follow the prefix rule.
std::vector<Rvs> interval_difference(const Rvs& need, const Rvs& have);

// Per-application dispatcher: custom functions by tree, built-in helpers by
// node kind otherwise. Safe for concurrent use.
class DifferenceEngine {
public:
    explicit DifferenceEngine(std::shared_ptr<const ResourceForest> forest);

    const ResourceForest& forest() const { return *forest_; }
    std::shared_ptr<const ResourceForest> forest_ptr() const { return forest_; }

    RegistrationHandle register_difference(DifferenceFunction fn);
    bool unregister(const RegistrationHandle& handle);

    std::vector<Rvs> resolve_difference(const Rvs& need, const Rvs& have) const;
    std::vector<Rvs> builtin_difference(const Rvs& need, const Rvs& have) const;

private:
    struct Entry {
        DifferenceFunction fn;
        std::uint64_t generation;
    };

    void check_sound(const Rvs& need, const std::vector<Rvs>& remaining) const;

    std::shared_ptr<const ResourceForest> forest_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, Entry> custom_;
    std::uint64_t next_generation_ = 1;
};

// Iterated subtraction of each have (in order) from the working set that
// starts as {need}. Stops early once nothing remains.
std::vector<Rvs> subtract_grants(const DifferenceEngine& engine, const Rvs& need, std::span<const Rvs> haves);

// Runs subtract_grants over every permutation of `haves` (at most 8) and
// returns the first permutation whose emptiness outcome differs from the
// given order, if any.
std::optional<std::vector<std::size_t>> find_order_dependence(const DifferenceEngine& engine, const Rvs& need,
                                                              std::span<const Rvs> haves);

}  // namespace ac4a
