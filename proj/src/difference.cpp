#include "ac4a/difference.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <numeric>
#include <set>

namespace ac4a {

namespace {

bool segment_covers(const Segment& have, const Segment& need) {
    if (have.node != need.node) return false;
    if (have.value.is_wildcard()) return true;
    return !need.value.is_wildcard() && need.value.text() == have.value.text();
}

void require_same_tree(const Rvs& need, const Rvs& have) {
    if (need.tree != have.tree)
        throw TreeMismatch("need '" + render_rvs(need) + "' and have '" + render_rvs(have) + "' are in different trees");
}

Rvs with_value(const Rvs& base, std::size_t index, const Interval& interval) {
    Rvs out = base;
    out.segments[index].value = Value::literal(format_interval(interval));
    return out;
}

void append_unique(std::vector<Rvs>& out, std::set<std::string>& seen, const Rvs& rvs) {
    if (seen.insert(render_rvs(rvs)).second) out.push_back(rvs);
}

}  // namespace

Interval parse_interval(std::string_view text) {
    const auto dash = text.find('-', 1);
    if (dash == std::string_view::npos) throw MalformedInterval("interval '" + std::string(text) + "' is not lo-hi");
    Interval iv;
    auto parse_part = [&](std::string_view part, std::int64_t& out) {
        const auto* end = part.data() + part.size();
        const auto [ptr, ec] = std::from_chars(part.data(), end, out);
        if (part.empty() || ec != std::errc{} || ptr != end)
            throw MalformedInterval("interval '" + std::string(text) + "' has a non-integer bound");
    };
    parse_part(text.substr(0, dash), iv.lo);
    parse_part(text.substr(dash + 1), iv.hi);
    if (iv.lo > iv.hi) throw MalformedInterval("interval '" + std::string(text) + "' has lo > hi");
    return iv;
}

std::string format_interval(const Interval& interval) {
    return std::to_string(interval.lo) + "-" + std::to_string(interval.hi);
}

std::vector<Rvs> tree_difference(const Rvs& need, const Rvs& have) {
    require_same_tree(need, have);
    if (have.segments.size() > need.segments.size()) return {need};
    for (std::size_t i = 0; i < have.segments.size(); ++i)
        if (!segment_covers(have.segments[i], need.segments[i])) return {need};
    return {};
}

std::vector<Rvs> interval_difference(const Rvs& need, const Rvs& have) {
    require_same_tree(need, have);
    if (have.segments.empty() || have.segments.size() > need.segments.size()) return {need};
    const std::size_t k = have.segments.size() - 1;
    for (std::size_t i = 0; i < k; ++i)
        if (!segment_covers(have.segments[i], need.segments[i])) return {need};

    const auto& h = have.segments[k];
    const auto& n = need.segments[k];
    if (h.node != n.node) return {need};
    if (h.value.is_wildcard()) return {};
    // An unbounded need minus a bounded have has no finite representation.
    if (n.value.is_wildcard()) return {need};

    const auto want = parse_interval(n.value.text());
    const auto got = parse_interval(h.value.text());
    if (want.empty()) return {};
    if (got.empty() || got.hi <= want.lo || got.lo >= want.hi) return {need};

    std::vector<Rvs> remaining;
    const Interval left{want.lo, std::min(want.hi, got.lo)};
    const Interval right{std::max(want.lo, got.hi), want.hi};
    if (!left.empty()) remaining.push_back(with_value(need, k, left));
    if (!right.empty()) remaining.push_back(with_value(need, k, right));
    return remaining;
}

DifferenceEngine::DifferenceEngine(std::shared_ptr<const ResourceForest> forest) : forest_(std::move(forest)) {}

RegistrationHandle DifferenceEngine::register_difference(DifferenceFunction fn) {
    if (!forest_->find_tree(fn.applies_to)) throw UnknownTree("no tree named '" + fn.applies_to + "'");
    std::unique_lock lock(mutex_);
    RegistrationHandle handle{fn.applies_to, next_generation_++};
    custom_.insert_or_assign(handle.tree, Entry{std::move(fn), handle.generation});
    return handle;
}

bool DifferenceEngine::unregister(const RegistrationHandle& handle) {
    std::unique_lock lock(mutex_);
    const auto it = custom_.find(handle.tree);
    if (it == custom_.end() || it->second.generation != handle.generation) return false;
    custom_.erase(it);
    return true;
}

std::vector<Rvs> DifferenceEngine::resolve_difference(const Rvs& need, const Rvs& have) const {
    const auto n = resolve_rvs(need, *forest_);
    const auto h = resolve_rvs(have, *forest_);
    if (n.tree != h.tree) return {n};

    DifferenceFn custom;
    {
        std::shared_lock lock(mutex_);
        if (const auto it = custom_.find(n.tree); it != custom_.end()) custom = it->second.fn.evaluate;
    }
    if (!custom) return builtin_difference(n, h);

    auto remaining = custom(n, h);
    check_sound(n, remaining);
    for (auto& r : remaining) r = resolve_rvs(r, *forest_);
    return remaining;
}

std::vector<Rvs> DifferenceEngine::builtin_difference(const Rvs& need, const Rvs& have) const {
    const auto n = resolve_rvs(need, *forest_);
    const auto h = resolve_rvs(have, *forest_);
    if (n.tree != h.tree) return {n};
    const auto path = validate_rvs(h, *forest_).path;
    if (path.back()->kind == ValueKind::Interval) return interval_difference(n, h);
    return tree_difference(n, h);
}

void DifferenceEngine::check_sound(const Rvs& need, const std::vector<Rvs>& remaining) const {
    const auto need_path = validate_rvs(need, *forest_).path;
    for (const auto& r : remaining) {
        const auto fail = [&](const std::string& why) {
            throw UnsoundCustomFunction("custom difference for tree '" + need.tree + "' returned '" + render_rvs(r) +
                                        "' for need '" + render_rvs(need) + "': " + why);
        };
        auto resolved = r;
        if (resolved.tree.empty()) resolved.tree = need.tree;
        const auto v = validate_rvs(resolved, *forest_);
        if (!v) fail(v.message);
        if (resolved.tree != need.tree) fail("different tree");
        if (resolved.segments.size() < need.segments.size()) fail("broader than the need");
        for (std::size_t i = 0; i < need.segments.size(); ++i) {
            const auto& ns = need.segments[i];
            const auto& rs = resolved.segments[i];
            if (segment_covers(ns, rs)) continue;
            if (ns.node == rs.node && need_path[i]->kind == ValueKind::Interval && !ns.value.is_wildcard() &&
                !rs.value.is_wildcard()) {
                const auto outer = parse_interval(ns.value.text());
                const auto inner = parse_interval(rs.value.text());
                if (inner.empty() || (inner.lo >= outer.lo && inner.hi <= outer.hi)) continue;
            }
            fail("not contained in the need at segment " + std::to_string(i + 1));
        }
    }
}

std::vector<Rvs> subtract_grants(const DifferenceEngine& engine, const Rvs& need, std::span<const Rvs> haves) {
    std::vector<Rvs> remaining{need};
    for (const auto& have : haves) {
        std::vector<Rvs> next;
        std::set<std::string> seen;
        for (const auto& n : remaining)
            for (const auto& r : engine.resolve_difference(n, have)) append_unique(next, seen, r);
        remaining = std::move(next);
        if (remaining.empty()) break;
    }
    return remaining;
}

std::optional<std::vector<std::size_t>> find_order_dependence(const DifferenceEngine& engine, const Rvs& need,
                                                              std::span<const Rvs> haves) {
    if (haves.size() > 8) throw ContractError("order-dependence search is limited to 8 grants");
    std::vector<std::size_t> order(haves.size());
    std::iota(order.begin(), order.end(), 0);
    const bool baseline = subtract_grants(engine, need, haves).empty();
    std::vector<Rvs> permuted(haves.size());
    while (std::next_permutation(order.begin(), order.end())) {
        for (std::size_t i = 0; i < order.size(); ++i) permuted[i] = haves[order[i]];
        if (subtract_grants(engine, need, permuted).empty() != baseline) return order;
    }
    return std::nullopt;
}

}  // namespace ac4a
