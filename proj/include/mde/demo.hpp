#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mde/engine.hpp"
#include "mde/nested_engine.hpp"

namespace mde::demo {

using NameSets = Engine<std::string>;
using NameMaps = NestedEngine<std::string, NameSets>;

/// {a,b,c} ∪ {a,b,d}.
inline SetIndex run_basic(NameSets& e) {
    const auto abc = e.register_set({"a", "b", "c"}).index;
    const auto abd = e.register_set({"a", "b", "d"}).index;
    return e.set_union(abc, abd);
}

/// J = {a→{p,q}, b→{s,t}} ∪ K = {b→{t,u}, c→{p,q}}.
inline SetIndex run_nested(NameSets& pointees, NameMaps& maps) {
    const auto pq = pointees.register_set({"p", "q"}).index;
    const auto st = pointees.register_set({"s", "t"}).index;
    const auto tu = pointees.register_set({"t", "u"}).index;
    const auto j = maps.register_set({{"a", {pq}}, {"b", {st}}}).index;
    const auto k = maps.register_set({{"b", {tu}}, {"c", {pq}}}).index;
    return maps.set_union(j, k);
}

/// Storage table, memo maps and subset map of an engine.
template <class E>
nlohmann::json describe(const E& e) {
    nlohmann::json storage = nlohmann::json::array();
    for (std::size_t i = 0; i < e.slot_count(); ++i) {
        const SetIndex idx(static_cast<SetIndex::value_type>(i));
        if (!e.is_live(idx)) {
            storage.push_back(nullptr);
            continue;
        }
        nlohmann::json s = nlohmann::json::array();
        for (const auto& elem : e.resolve(idx)) {
            if constexpr (requires { elem.key; }) {
                nlohmann::json t = nlohmann::json::array({elem.key});
                for (auto v : elem.values) t.push_back(v.value());
                s.push_back(std::move(t));
            } else {
                s.push_back(elem);
            }
        }
        storage.push_back(std::move(s));
    }
    nlohmann::json memo = nlohmann::json::object();
    for (auto op : kAllOps) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& m : e.memo_entries(op)) entries.push_back({m.lhs.value(), m.rhs.value(), m.result.value()});
        memo[std::string(op_name(op))] = std::move(entries);
    }
    nlohmann::json subset = nlohmann::json::array();
    for (const auto& s : e.subset_entries()) subset.push_back({s.a.value(), s.b.value(), s.a_subset_of_b});
    return {{"storage", std::move(storage)}, {"memo", std::move(memo)}, {"subset", std::move(subset)}};
}

}  // namespace mde::demo
