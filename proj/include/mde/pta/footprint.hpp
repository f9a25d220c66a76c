#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "mde/pta/analysis.hpp"

namespace mde::pta {

/// Unit-count memory model over a set of program points: every node, edge or
/// reference is one unit.
///  - flat: the graph per point, distinct nodes (pointers and pointees) plus edges
///  - single-level: per point one unit per pointer and one reference to its
///    shared pointee set
///  - multi-level: one reference per point to a shared map
/// Shared storage (distinct pointee sets and maps) is reported separately.
struct FootprintReport {
    std::vector<std::size_t> points;  // 1-based statement numbers
    std::vector<std::uint64_t> flat_per_point;
    std::vector<std::uint64_t> single_level_per_point;
    std::uint64_t flat_total = 0;
    std::uint64_t single_level_total = 0;
    std::uint64_t multi_level_total = 0;
    std::uint64_t distinct_pointee_sets = 0;
    std::uint64_t distinct_maps = 0;
};

/// `facts[i]` is the fact at point i+1. Empty `points` selects every point.
inline FootprintReport footprint_report(const std::vector<PointsToPairs>& facts, std::vector<std::size_t> points = {}) {
    if (points.empty())
        for (std::size_t i = 1; i <= facts.size(); ++i) points.push_back(i);

    FootprintReport r;
    std::set<std::set<VarId>> sets;
    std::set<PointsToPairs> maps;
    for (auto p : points) {
        const auto& pairs = facts.at(p - 1);
        std::map<VarId, std::set<VarId>> graph;
        std::set<VarId> nodes;
        for (const auto& [k, v] : pairs) {
            graph[k].insert(v);
            nodes.insert(k);
            nodes.insert(v);
        }
        const std::uint64_t flat = nodes.size() + pairs.size();
        const std::uint64_t single = 2 * graph.size();
        for (const auto& [k, s] : graph) sets.insert(s);
        if (!pairs.empty()) maps.insert(pairs);

        r.points.push_back(p);
        r.flat_per_point.push_back(flat);
        r.single_level_per_point.push_back(single);
        r.flat_total += flat;
        r.single_level_total += single;
        r.multi_level_total += 1;
    }
    r.distinct_pointee_sets = sets.size();
    r.distinct_maps = maps.size();
    return r;
}

}  // namespace mde::pta
