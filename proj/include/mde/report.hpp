#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mde/metrics.hpp"

namespace mde {

inline nlohmann::json operation_json(const OperationCounters& c) {
    nlohmann::json j = {
        {"hits", c.hits},
        {"equal_hits", c.equal_hits},
        {"subset_hits", c.subset_hits},
        {"empty_hits", c.empty_hits},
        {"cold_misses", c.cold_misses},
        {"edge_misses", c.edge_misses},
    };
    if (auto r = c.hit_ratio())
        j["hit_ratio"] = *r;
    else
        j["hit_ratio"] = nullptr;
    return j;
}

/// `{engine: {operation: {six counters, hit_ratio}}}`; hit_ratio is null when
/// the operation was never queried.
inline nlohmann::json metrics_json(const MetricsReport& report) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, m] : report.engines()) {
        nlohmann::json e = nlohmann::json::object();
        for (auto op : kAllOps) e[std::string(op_name(op))] = operation_json(m.at(op));
        j[name] = std::move(e);
    }
    return j;
}

}  // namespace mde
