#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "mde/engine_base.hpp"

namespace mde {

/// Element of a nested engine's sets: a key plus one index per child engine.
/// Within a set, keys are unique and elements are ordered by key alone.
template <class Key, std::size_t Arity>
struct NestedElement {
    Key key{};
    std::array<SetIndex, Arity> values{};

    [[nodiscard]] SetIndex value() const noexcept
        requires(Arity == 1)
    {
        return values[0];
    }

    [[nodiscard]] bool all_empty() const noexcept {
        return std::all_of(values.begin(), values.end(), [](SetIndex v) { return v == kEmptySet; });
    }

    friend bool operator==(const NestedElement&, const NestedElement&) = default;
};

template <class Key, std::size_t Arity, class KeyHash = std::hash<Key>>
struct NestedElementHash {
    std::size_t operator()(const NestedElement<Key, Arity>& e) const noexcept {
        std::uint64_t h = KeyHash{}(e.key);
        for (auto v : e.values) h = detail::hash_combine(h, v.value());
        return static_cast<std::size_t>(h);
    }
};

/// Engine whose sets are maps from keys to child-engine sets (points-to maps
/// for arity 1). Operations run the ordinary memoizing wrapper at this level;
/// where both operands bind the same key the operation recurses into each
/// child engine, so both whole maps and per-key value sets are deduplicated.
///
/// Children are held by reference and must outlive the parent. Several
/// parents, or other clients, may share one child.
template <class Key, class... Children>
class NestedEngine
    : public EngineBase<NestedEngine<Key, Children...>, NestedElement<Key, sizeof...(Children)>,
                        NestedElementHash<Key, sizeof...(Children)>> {
    static_assert(sizeof...(Children) >= 1, "a nested engine needs at least one child");

    static constexpr std::size_t kArity = sizeof...(Children);
    using Element_ = NestedElement<Key, kArity>;
    using Base = EngineBase<NestedEngine<Key, Children...>, Element_, NestedElementHash<Key, kArity>>;
    friend Base;

public:
    using key_type = Key;
    using Element = Element_;
    using Values = std::array<SetIndex, kArity>;
    using Set = std::vector<Element>;
    static constexpr std::size_t arity = kArity;

    explicit NestedEngine(Children&... children) : children_(children...) {}
    NestedEngine(EngineOptions options, Children&... children) : Base(options), children_(children...) {}

    template <std::size_t J>
    [[nodiscard]] auto& child() noexcept {
        return std::get<J>(children_);
    }
    template <std::size_t J>
    [[nodiscard]] const auto& child() const noexcept {
        return std::get<J>(children_);
    }

    static bool element_less(const Element& a, const Element& b) { return std::less<Key>{}(a.key, b.key); }

    // -- lookups ----------------------------------------------------------

    [[nodiscard]] const Element* find(SetIndex idx, const Key& key) const {
        const auto set = this->resolve(idx);
        const Element* pos = this->locate(set, key, [](const Element& e, const Key& k) { return std::less<Key>{}(e.key, k); });
        if (pos == set.data() + set.size() || std::less<Key>{}(key, pos->key)) return nullptr;
        return pos;
    }

    [[nodiscard]] bool contains_key(SetIndex idx, const Key& key) const { return find(idx, key) != nullptr; }

    [[nodiscard]] std::optional<Values> get_values(SetIndex idx, const Key& key) const {
        if (const Element* e = find(idx, key)) return e->values;
        return std::nullopt;
    }

    /// Child index bound to `key`, or nothing when the key is absent.
    [[nodiscard]] std::optional<SetIndex> get_pointees(SetIndex idx, const Key& key) const
        requires(kArity == 1)
    {
        if (const Element* e = find(idx, key)) return e->values[0];
        return std::nullopt;
    }

    // -- direct manipulation ----------------------------------------------

    /// The set equal to `idx` with `key` bound to `values` (inserted if
    /// absent). Rebuilds and registers; no set operation is involved.
    SetIndex update_values(SetIndex idx, const Key& key, const Values& values) {
        const auto set = this->resolve(idx);
        auto pos = std::lower_bound(set.begin(), set.end(), key,
                                    [](const Element& e, const Key& k) { return std::less<Key>{}(e.key, k); });
        const bool present = pos != set.end() && !std::less<Key>{}(key, pos->key);
        if (present && pos->values == values) return idx;

        Set out;
        out.reserve(set.size() + 1);
        out.insert(out.end(), set.begin(), pos);
        out.push_back(Element{key, values});
        out.insert(out.end(), present ? pos + 1 : pos, set.end());
        this->store_.counters().rebuilt_elements += out.size();
        return this->register_set(std::move(out)).index;
    }

    SetIndex update_pointees(SetIndex idx, const Key& key, SetIndex child_idx)
        requires(kArity == 1)
    {
        return update_values(idx, key, Values{child_idx});
    }

    /// The set equal to `idx` without `key`.
    SetIndex erase_key(SetIndex idx, const Key& key) {
        const auto set = this->resolve(idx);
        auto pos = std::lower_bound(set.begin(), set.end(), key,
                                    [](const Element& e, const Key& k) { return std::less<Key>{}(e.key, k); });
        if (pos == set.end() || std::less<Key>{}(key, pos->key)) return idx;
        Set out;
        out.reserve(set.size() - 1);
        out.insert(out.end(), set.begin(), pos);
        out.insert(out.end(), pos + 1, set.end());
        this->store_.counters().rebuilt_elements += out.size();
        return this->register_set(std::move(out)).index;
    }

    /// Adds `prop` to the value set of `key`; a union with a one-entry map.
    template <class Prop>
    SetIndex insert_pointee(SetIndex idx, const Key& key, const Prop& prop)
        requires(kArity == 1)
    {
        const SetIndex single = std::get<0>(children_).singleton(prop);
        const SetIndex entry = this->register_set(Set{Element{key, Values{single}}}).index;
        return this->set_union(idx, entry);
    }

    // -- flattening ---------------------------------------------------------

    /// Expands slot `J` of every element into (key, child property) pairs, in
    /// (key, property) order. Keys bound to an empty set contribute nothing.
    template <std::size_t J = 0>
    [[nodiscard]] auto flatten(SetIndex idx) const {
        using ChildProp = typename std::tuple_element_t<J, std::tuple<Children...>>::property_type;
        std::vector<std::pair<Key, ChildProp>> out;
        for (const auto& e : this->resolve(idx)) {
            for (const auto& p : std::get<J>(children_).resolve(e.values[J])) out.emplace_back(e.key, p);
        }
        return out;
    }

    // -- DAG support --------------------------------------------------------

    [[nodiscard]] std::array<const void*, kArity> child_addresses() const {
        return std::apply([](const auto&... c) { return std::array<const void*, kArity>{static_cast<const void*>(&c)...}; },
                          children_);
    }

    /// First (parent index, child index) pair where a registered set of this
    /// engine refers to one of `doomed` inside the child at `child`.
    template <class Doomed>
    [[nodiscard]] std::optional<std::pair<SetIndex, SetIndex>> find_child_reference(const void* child,
                                                                                    const Doomed& doomed) const {
        const auto addrs = child_addresses();
        for (std::size_t i = 0; i < this->slot_count(); ++i) {
            const SetIndex idx(static_cast<SetIndex::value_type>(i));
            if (!this->is_live(idx)) continue;
            for (const auto& e : this->resolve(idx)) {
                for (std::size_t j = 0; j < kArity; ++j) {
                    if (addrs[j] == child && doomed.contains(e.values[j])) return std::pair{idx, e.values[j]};
                }
            }
        }
        return std::nullopt;
    }

private:
    void validate_elements(std::span<const Element> set) const {
        for (const auto& e : set) {
            for_each_slot([&]<std::size_t J>(std::integral_constant<std::size_t, J>) {
                if (!std::get<J>(children_).is_live(e.values[J]))
                    throw UsageError("child index " + std::to_string(e.values[J].value()) + " in slot " +
                                     std::to_string(J) + " is not registered in the child engine");
            });
        }
    }

    template <class F>
    static void for_each_slot(F&& f) {
        [&]<std::size_t... J>(std::index_sequence<J...>) {
            (f(std::integral_constant<std::size_t, J>{}), ...);
        }(std::make_index_sequence<kArity>{});
    }

    Values combine(OpKind op, const Values& a, const Values& b) {
        Values out{};
        for_each_slot([&]<std::size_t J>(std::integral_constant<std::size_t, J>) {
            out[J] = std::get<J>(children_).operate(op, a[J], b[J]);
        });
        return out;
    }

    Set kernel(OpKind op, std::span<const Element> first, std::span<const Element> second, std::uint64_t& steps) {
        const std::less<Key> less{};
        Set out;
        auto c1 = first.begin(), e1 = first.end();
        auto c2 = second.begin(), e2 = second.end();

        switch (op) {
            case OpKind::Union:
                out.reserve(first.size() + second.size());
                while (c1 != e1) {
                    if (c2 == e2) {
                        steps += static_cast<std::uint64_t>(e1 - c1);
                        out.insert(out.end(), c1, e1);
                        c1 = e1;
                        break;
                    }
                    if (less(c2->key, c1->key)) {
                        out.push_back(*c2++);
                        ++steps;
                    } else {
                        if (!less(c1->key, c2->key)) {
                            out.push_back(Element{c1->key, combine(op, c1->values, c2->values)});
                            ++c2;
                            ++steps;
                        } else {
                            out.push_back(*c1);
                        }
                        ++c1;
                        ++steps;
                    }
                }
                steps += static_cast<std::uint64_t>(e2 - c2);
                out.insert(out.end(), c2, e2);
                break;

            case OpKind::Intersection:
                while (c1 != e1 && c2 != e2) {
                    if (less(c1->key, c2->key)) {
                        ++c1;
                        ++steps;
                    } else if (less(c2->key, c1->key)) {
                        ++c2;
                        ++steps;
                    } else {
                        Element e{c1->key, combine(op, c1->values, c2->values)};
                        // An explicit empty binding in either operand survives, so
                        // that a structural subset intersects to itself.
                        if (!e.all_empty() || c1->all_empty() || c2->all_empty()) out.push_back(e);
                        ++c1;
                        ++c2;
                        steps += 2;
                    }
                }
                break;

            case OpKind::Difference:
                while (c1 != e1) {
                    if (c2 == e2) {
                        steps += static_cast<std::uint64_t>(e1 - c1);
                        out.insert(out.end(), c1, e1);
                        break;
                    }
                    if (less(c1->key, c2->key)) {
                        out.push_back(*c1++);
                        ++steps;
                    } else if (less(c2->key, c1->key)) {
                        ++c2;
                        ++steps;
                    } else {
                        Element e{c1->key, combine(op, c1->values, c2->values)};
                        if (!e.all_empty()) out.push_back(e);
                        ++c1;
                        ++c2;
                        steps += 2;
                    }
                }
                break;
        }
        return out;
    }

    /// Structural inclusion: every key of `sub` is bound in `super` to
    /// per-slot supersets.
    bool includes(std::span<const Element> super, std::span<const Element> sub) {
        const std::less<Key> less{};
        auto cs = super.begin();
        for (const auto& e : sub) {
            while (cs != super.end() && less(cs->key, e.key)) ++cs;
            if (cs == super.end() || less(e.key, cs->key)) return false;
            bool ok = true;
            for_each_slot([&]<std::size_t J>(std::integral_constant<std::size_t, J>) {
                ok = ok && std::get<J>(children_).is_subset(e.values[J], cs->values[J]);
            });
            if (!ok) return false;
            ++cs;
        }
        return true;
    }

    std::tuple<Children&...> children_;
};

}  // namespace mde
