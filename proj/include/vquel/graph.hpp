#pragma once

#include <algorithm>
#include <concepts>
#include <deque>
#include <optional>
#include <ranges>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vquel/error.hpp"

namespace vquel {

/// Anything exposing version-graph adjacency by id.
template <class G>
concept VersionGraph = requires(const G& g, std::string_view id) {
    { g.contains(id) } -> std::convertible_to<bool>;
    { g.parents_of(id) } -> std::ranges::input_range;
    { g.children_of(id) } -> std::ranges::input_range;
};

enum class Direction { Up, Down, Both };

/// How `neighborhood` interprets its hop count.
enum class HopMode { Within, Exactly };

namespace detail {

template <VersionGraph G>
std::vector<std::string> bfs(const G& graph, std::string_view start, Direction dir, std::optional<unsigned> hops,
                             HopMode mode) {
    if (!graph.contains(start)) throw NotFoundError("unknown version '" + std::string(start) + "'");
    if (hops && *hops == 0) return {};

    std::unordered_map<std::string, unsigned> dist;
    std::deque<std::string> queue;
    dist.emplace(std::string(start), 0);
    queue.emplace_back(start);

    auto visit = [&](unsigned d, auto&& neighbours) {
        for (const auto& next : neighbours) {
            std::string id(next);
            if (!graph.contains(id) || dist.contains(id)) continue;
            dist.emplace(id, d + 1);
            queue.push_back(std::move(id));
        }
    };

    while (!queue.empty()) {
        std::string current = std::move(queue.front());
        queue.pop_front();
        unsigned d = dist.at(current);
        if (hops && d >= *hops) continue;
        if (dir != Direction::Down) visit(d, graph.parents_of(current));
        if (dir != Direction::Up) visit(d, graph.children_of(current));
    }

    std::vector<std::string> out;
    for (const auto& [id, d] : dist) {
        if (d == 0) continue;
        if (mode == HopMode::Exactly && hops && d != *hops) continue;
        out.push_back(id);
    }
    std::ranges::sort(out);
    return out;
}

}  // namespace detail

/// Versions reachable through parent edges within `hops` steps (all of them
/// when absent), excluding `start`. Sorted by id, duplicates removed.
template <VersionGraph G>
std::vector<std::string> ancestors(const G& graph, std::string_view start, std::optional<unsigned> hops = {}) {
    return detail::bfs(graph, start, Direction::Up, hops, HopMode::Within);
}

/// Mirror of `ancestors` over child edges.
template <VersionGraph G>
std::vector<std::string> descendants(const G& graph, std::string_view start, std::optional<unsigned> hops = {}) {
    return detail::bfs(graph, start, Direction::Down, hops, HopMode::Within);
}

/// Versions at undirected distance 1..hops from `start` (HopMode::Within),
/// or exactly `hops` (HopMode::Exactly). No hop count: the whole weakly
/// connected component.
template <VersionGraph G>
std::vector<std::string> neighborhood(const G& graph, std::string_view start, std::optional<unsigned> hops,
                                      HopMode mode = HopMode::Within) {
    return detail::bfs(graph, start, Direction::Both, hops, mode);
}

/// Kahn's algorithm over parent edges only; nullopt when the graph
/// restricted to `ids` has a cycle.
template <VersionGraph G>
std::optional<std::vector<std::string>> topological_order(const G& graph, const std::vector<std::string>& ids) {
    std::unordered_map<std::string, int> indegree;
    std::unordered_map<std::string, std::vector<std::string>> dependents;
    for (const auto& id : ids) indegree.emplace(id, 0);
    for (const auto& id : ids) {
        for (const auto& p : graph.parents_of(id)) {
            std::string parent(p);
            if (!indegree.contains(parent)) continue;
            ++indegree[id];
            dependents[parent].push_back(id);
        }
    }
    std::set<std::string> ready;
    for (const auto& [id, deg] : indegree) {
        if (deg == 0) ready.insert(id);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& child : dependents[id]) {
            if (--indegree[child] == 0) ready.insert(child);
        }
    }
    if (order.size() != ids.size()) return std::nullopt;
    return order;
}

}  // namespace vquel
