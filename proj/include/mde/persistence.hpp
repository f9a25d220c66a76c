#pragma once

#include <concepts>
#include <map>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mde/engine_base.hpp"
#include "mde/metrics.hpp"
#include "mde/types.hpp"

namespace mde {

/// Stable string rendering of property values.
template <class C, class P>
concept PropertyCodec = requires(const C& c, const P& p, const std::string& s) {
    { c.encode(p) } -> std::convertible_to<std::string>;
    { c.decode(s) } -> std::convertible_to<P>;
};

template <std::integral T>
struct IntegerCodec {
    [[nodiscard]] std::string encode(T v) const { return std::to_string(v); }
    [[nodiscard]] T decode(const std::string& s) const {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument("not an integer: " + s);
        return static_cast<T>(v);
    }
};

struct StringCodec {
    [[nodiscard]] std::string encode(const std::string& v) const { return v; }
    [[nodiscard]] std::string decode(const std::string& s) const { return s; }
};

/// Binds a node name and a codec to an engine for (de)serialization.
template <class EngineT, class Codec>
struct SnapshotNode {
    std::string name;
    EngineT& engine;
    Codec codec;
};

template <class EngineT, class Codec>
SnapshotNode<EngineT, Codec> snapshot_node(std::string name, EngineT& engine, Codec codec) {
    return {std::move(name), engine, std::move(codec)};
}

namespace detail {

template <class E>
concept NestedEngineType = requires { E::arity; };

template <class E>
struct AtomOf {
    using type = typename E::property_type;
};
template <NestedEngineType E>
struct AtomOf<E> {
    using type = typename E::key_type;
};

inline nlohmann::json counters_to_json(const EngineMetrics& m) {
    nlohmann::json j;
    for (auto op : kAllOps) {
        const auto& c = m.at(op);
        j[std::string(op_name(op))] = {
            {"hits", c.hits},
            {"equal_hits", c.equal_hits},
            {"subset_hits", c.subset_hits},
            {"empty_hits", c.empty_hits},
            {"cold_misses", c.cold_misses},
            {"edge_misses", c.edge_misses},
            {"queries", c.queries},
            {"merge_executions", c.merge_executions},
            {"merge_steps", c.merge_steps},
        };
    }
    j["store"] = {
        {"registrations", m.store.registrations},
        {"fresh_registrations", m.store.fresh_registrations},
        {"hashed_elements", m.store.hashed_elements},
        {"rebuilt_elements", m.store.rebuilt_elements},
    };
    return j;
}

inline EngineMetrics counters_from_json(const nlohmann::json& j) {
    EngineMetrics m;
    for (auto op : kAllOps) {
        const auto& o = j.at(std::string(op_name(op)));
        auto& c = m.at(op);
        c.hits = o.at("hits").get<std::uint64_t>();
        c.equal_hits = o.at("equal_hits").get<std::uint64_t>();
        c.subset_hits = o.at("subset_hits").get<std::uint64_t>();
        c.empty_hits = o.at("empty_hits").get<std::uint64_t>();
        c.cold_misses = o.at("cold_misses").get<std::uint64_t>();
        c.edge_misses = o.at("edge_misses").get<std::uint64_t>();
        c.queries = o.at("queries").get<std::uint64_t>();
        c.merge_executions = o.at("merge_executions").get<std::uint64_t>();
        c.merge_steps = o.at("merge_steps").get<std::uint64_t>();
    }
    const auto& s = j.at("store");
    m.store.registrations = s.at("registrations").get<std::uint64_t>();
    m.store.fresh_registrations = s.at("fresh_registrations").get<std::uint64_t>();
    m.store.hashed_elements = s.at("hashed_elements").get<std::uint64_t>();
    m.store.rebuilt_elements = s.at("rebuilt_elements").get<std::uint64_t>();
    return m;
}

template <class E>
std::vector<const void*> child_addresses_of(const E& e) {
    if constexpr (NestedEngineType<E>) {
        auto a = e.child_addresses();
        return std::vector<const void*>(a.begin(), a.end());
    } else {
        return {};
    }
}

template <class Node>
nlohmann::json node_to_json(const Node& node, const std::vector<std::string>& child_names) {
    using E = std::remove_cvref_t<decltype(node.engine)>;
    using Atom = typename AtomOf<E>::type;
    auto state = node.engine.export_state();

    auto atom_of = [](const auto& elem) -> const Atom& {
        if constexpr (NestedEngineType<E>)
            return elem.key;
        else
            return elem;
    };

    std::map<Atom, std::size_t> ordinals;
    for (const auto& slot : state.sets) {
        if (!slot) continue;
        for (const auto& elem : *slot) ordinals.emplace(atom_of(elem), 0);
    }
    nlohmann::json atoms = nlohmann::json::array();
    std::size_t next = 0;
    for (auto& [atom, ord] : ordinals) {
        ord = next++;
        atoms.push_back(node.codec.encode(atom));
    }

    nlohmann::json sets = nlohmann::json::array();
    for (const auto& slot : state.sets) {
        if (!slot) {
            sets.push_back(nullptr);
            continue;
        }
        nlohmann::json s = nlohmann::json::array();
        for (const auto& elem : *slot) {
            if constexpr (NestedEngineType<E>) {
                nlohmann::json t = nlohmann::json::array({ordinals.at(elem.key)});
                for (auto v : elem.values) t.push_back(v.value());
                s.push_back(std::move(t));
            } else {
                s.push_back(ordinals.at(elem));
            }
        }
        sets.push_back(std::move(s));
    }

    nlohmann::json memo = nlohmann::json::object();
    for (auto op : kAllOps) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : state.memo[static_cast<std::size_t>(op)])
            entries.push_back({e.lhs.value(), e.rhs.value(), e.result.value()});
        memo[std::string(op_name(op))] = std::move(entries);
    }

    nlohmann::json subset = nlohmann::json::array();
    for (const auto& e : state.subset) subset.push_back({e.a.value(), e.b.value(), e.a_subset_of_b});

    return {
        {"name", node.name},
        {"children", child_names},
        {"atoms", std::move(atoms)},
        {"sets", std::move(sets)},
        {"memo", std::move(memo)},
        {"subset", std::move(subset)},
        {"counters", counters_to_json(state.metrics)},
    };
}

inline SetIndex index_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number_unsigned()) throw LoadError(where + ": expected a set index");
    const auto v = j.get<std::uint64_t>();
    if (v >= kMaxSetCount) throw LoadError(where + ": set index out of range");
    return SetIndex(static_cast<SetIndex::value_type>(v));
}

template <class Node>
void node_from_json_unchecked(Node& node, const nlohmann::json& j, const std::string& where) {
    using E = std::remove_cvref_t<decltype(node.engine)>;
    using Atom = typename AtomOf<E>::type;
    using Element = typename E::element_type;

    std::vector<Atom> atoms;
    const auto& atoms_json = j.at("atoms");
    for (std::size_t i = 0; i < atoms_json.size(); ++i) {
        try {
            atoms.push_back(node.codec.decode(atoms_json[i].get<std::string>()));
        } catch (const std::exception& e) {
            throw LoadError(where + ".atoms[" + std::to_string(i) + "]: " + e.what());
        }
    }
    auto atom_at = [&](const nlohmann::json& ord, const std::string& at) -> const Atom& {
        if (!ord.is_number_unsigned() || ord.get<std::uint64_t>() >= atoms.size())
            throw LoadError(at + ": atom ordinal out of range");
        return atoms[ord.get<std::size_t>()];
    };

    EngineState<Element> state;
    const auto& sets = j.at("sets");
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const std::string at = where + ".sets[" + std::to_string(i) + "]";
        if (sets[i].is_null()) {
            state.sets.emplace_back(std::nullopt);
            continue;
        }
        if (!sets[i].is_array()) throw LoadError(at + ": expected an array or null");
        std::vector<Element> elems;
        for (std::size_t k = 0; k < sets[i].size(); ++k) {
            const auto& ej = sets[i][k];
            const std::string eat = at + "[" + std::to_string(k) + "]";
            if constexpr (NestedEngineType<E>) {
                if (!ej.is_array() || ej.size() != 1 + E::arity)
                    throw LoadError(eat + ": expected [atom, " + std::to_string(E::arity) + " child index(es)]");
                Element el;
                el.key = atom_at(ej[0], eat);
                for (std::size_t s = 0; s < E::arity; ++s) el.values[s] = index_from_json(ej[1 + s], eat);
                elems.push_back(el);
            } else {
                elems.push_back(atom_at(ej, eat));
            }
        }
        state.sets.emplace_back(std::move(elems));
    }

    const auto& memo = j.at("memo");
    for (auto op : kAllOps) {
        const std::string name(op_name(op));
        const auto& entries = memo.at(name);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::string at = where + ".memo." + name + "[" + std::to_string(i) + "]";
            const auto& e = entries[i];
            if (!e.is_array() || e.size() != 3) throw LoadError(at + ": expected [lhs, rhs, result]");
            state.memo[static_cast<std::size_t>(op)].push_back(
                {index_from_json(e[0], at), index_from_json(e[1], at), index_from_json(e[2], at)});
        }
    }
    const auto& subset = j.at("subset");
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const std::string at = where + ".subset[" + std::to_string(i) + "]";
        const auto& e = subset[i];
        if (!e.is_array() || e.size() != 3 || !e[2].is_boolean()) throw LoadError(at + ": expected [a, b, flag]");
        state.subset.push_back({index_from_json(e[0], at), index_from_json(e[1], at), e[2].get<bool>()});
    }
    state.metrics = counters_from_json(j.at("counters"));

    try {
        node.engine.import_state(std::move(state));
    } catch (const LoadError& e) {
        throw LoadError(where + ": " + e.what());
    }
}

template <class Node>
void node_from_json(Node& node, const nlohmann::json& j, const std::string& where) {
    try {
        node_from_json_unchecked(node, j, where);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(where + ": " + e.what());
    }
}

template <class... Nodes>
std::vector<std::vector<std::string>> resolve_child_names(const Nodes&... nodes) {
    std::vector<std::pair<const void*, std::string>> named;
    std::vector<std::vector<std::string>> result;
    auto visit = [&](const auto& node) {
        std::vector<std::string> names;
        for (const void* addr : child_addresses_of(node.engine)) {
            auto it = std::find_if(named.begin(), named.end(), [&](const auto& p) { return p.first == addr; });
            if (it == named.end())
                throw UsageError("node '" + node.name + "' has a child engine that is not listed before it");
            names.push_back(it->second);
        }
        named.emplace_back(static_cast<const void*>(&node.engine), node.name);
        result.push_back(std::move(names));
    };
    (visit(nodes), ...);
    return result;
}

}  // namespace detail

/// Whole-DAG snapshot. Nodes must be listed children first.
template <class... Nodes>
nlohmann::json serialize(const Nodes&... nodes) {
    const auto child_names = detail::resolve_child_names(nodes...);
    nlohmann::json out = nlohmann::json::array();
    std::size_t i = 0;
    ((out.push_back(detail::node_to_json(nodes, child_names[i++]))), ...);
    return {{"nodes", std::move(out)}};
}

/// Canonical text form: sorted keys, fixed indentation, trailing newline.
inline std::string to_canonical_string(const nlohmann::json& doc) { return doc.dump(1) + "\n"; }

/// Restores every bound engine from `doc`. Bindings must be listed children
/// first and must cover every node in the document.
template <class... Nodes>
void deserialize(const nlohmann::json& doc, Nodes&&... nodes) {
    const auto child_names = detail::resolve_child_names(nodes...);
    try {
        if (!doc.is_object() || !doc.contains("nodes") || !doc.at("nodes").is_array())
            throw LoadError("document: expected an object with a 'nodes' array");
        const auto& doc_nodes = doc.at("nodes");

        std::map<std::string, std::size_t> position;
        for (std::size_t i = 0; i < doc_nodes.size(); ++i) {
            const std::string name = doc_nodes[i].at("name").get<std::string>();
            if (!position.emplace(name, i).second) throw LoadError("nodes[" + std::to_string(i) + "]: duplicate node name '" + name + "'");
            for (const auto& c : doc_nodes[i].at("children")) {
                auto it = position.find(c.get<std::string>());
                if (it == position.end() || it->second >= i)
                    throw LoadError("nodes[" + std::to_string(i) + "]: dangling child reference '" +
                                    c.get<std::string>() + "'");
            }
        }
        if (position.size() != sizeof...(Nodes))
            throw LoadError("document has " + std::to_string(position.size()) + " node(s), expected " +
                            std::to_string(sizeof...(Nodes)));

        std::size_t i = 0;
        auto load = [&](auto& node) {
            auto it = position.find(node.name);
            if (it == position.end()) throw LoadError("document has no node named '" + node.name + "'");
            const std::string where = "nodes[" + std::to_string(it->second) + "]";
            const auto& j = doc_nodes[it->second];
            if (j.at("children").template get<std::vector<std::string>>() != child_names[i])
                throw LoadError(where + ": child list does not match the engine layout");
            detail::node_from_json(node, j, where);
            ++i;
        };
        (load(nodes), ...);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("malformed snapshot: ") + e.what());
    }
}

}  // namespace mde
