#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include "mde/engine_base.hpp"

namespace mde {

/// Deduplication engine over sets of totally ordered `Property` values.
template <class Property, class Hash = std::hash<Property>, class Less = std::less<Property>>
class Engine : public EngineBase<Engine<Property, Hash, Less>, Property, Hash> {
    using Base = EngineBase<Engine<Property, Hash, Less>, Property, Hash>;
    friend Base;

public:
    using property_type = Property;
    using Set = std::vector<Property>;

    explicit Engine(EngineOptions options = {}) : Base(options) {}

    static bool element_less(const Property& a, const Property& b) { return Less{}(a, b); }

    [[nodiscard]] bool contains(SetIndex idx, const Property& prop) const {
        const auto set = this->resolve(idx);
        const Property* pos = this->locate(set, prop, Less{});
        return pos != set.data() + set.size() && !Less{}(prop, *pos);
    }

    SetIndex singleton(const Property& prop) { return this->register_set(Set{prop}).index; }

    SetIndex insert_single(SetIndex idx, const Property& prop) { return this->set_union(idx, singleton(prop)); }

    SetIndex remove_single(SetIndex idx, const Property& prop) {
        return this->set_difference(idx, singleton(prop));
    }

    // never a parent of anything
    template <class Doomed>
    std::optional<std::pair<SetIndex, SetIndex>> find_child_reference(const void*, const Doomed&) const {
        return std::nullopt;
    }

private:
    void validate_elements(std::span<const Property>) const {}

    Set kernel(OpKind op, std::span<const Property> lhs, std::span<const Property> rhs, std::uint64_t& steps) {
        switch (op) {
            case OpKind::Union: return merge_union(lhs, rhs, steps);
            case OpKind::Intersection: return merge_intersection(lhs, rhs, steps);
            case OpKind::Difference: return merge_difference(lhs, rhs, steps);
        }
        return {};
    }

    static Set merge_union(std::span<const Property> first, std::span<const Property> second, std::uint64_t& steps) {
        const Less less{};
        Set out;
        out.reserve(first.size() + second.size());
        auto c1 = first.begin(), e1 = first.end();
        auto c2 = second.begin(), e2 = second.end();
        while (c1 != e1) {
            if (c2 == e2) {
                steps += static_cast<std::uint64_t>(e1 - c1);
                out.insert(out.end(), c1, e1);
                c1 = e1;
                break;
            }
            if (less(*c2, *c1)) {
                out.push_back(*c2++);
                ++steps;
            } else {
                if (!less(*c1, *c2)) {
                    ++c2;
                    ++steps;
                }
                out.push_back(*c1++);
                ++steps;
            }
        }
        steps += static_cast<std::uint64_t>(e2 - c2);
        out.insert(out.end(), c2, e2);
        return out;
    }

    static Set merge_intersection(std::span<const Property> first, std::span<const Property> second,
                                  std::uint64_t& steps) {
        const Less less{};
        Set out;
        auto c1 = first.begin(), e1 = first.end();
        auto c2 = second.begin(), e2 = second.end();
        while (c1 != e1 && c2 != e2) {
            if (less(*c1, *c2)) {
                ++c1;
                ++steps;
            } else if (less(*c2, *c1)) {
                ++c2;
                ++steps;
            } else {
                out.push_back(*c1);
                ++c1;
                ++c2;
                steps += 2;
            }
        }
        return out;
    }

    static Set merge_difference(std::span<const Property> first, std::span<const Property> second,
                                std::uint64_t& steps) {
        const Less less{};
        Set out;
        auto c1 = first.begin(), e1 = first.end();
        auto c2 = second.begin(), e2 = second.end();
        while (c1 != e1) {
            if (c2 == e2) {
                steps += static_cast<std::uint64_t>(e1 - c1);
                out.insert(out.end(), c1, e1);
                break;
            }
            if (less(*c1, *c2)) {
                out.push_back(*c1++);
                ++steps;
            } else if (less(*c2, *c1)) {
                ++c2;
                ++steps;
            } else {
                ++c1;
                ++c2;
                steps += 2;
            }
        }
        return out;
    }

    bool includes(std::span<const Property> super, std::span<const Property> sub) const {
        return std::includes(super.begin(), super.end(), sub.begin(), sub.end(), Less{});
    }
};

}  // namespace mde
