#pragma once

// Plain-container reference semantics used to check engine results. Nothing
// here touches the engine.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

template <class T>
std::set<T> set_union(const std::set<T>& a, const std::set<T>& b) {
    std::set<T> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

template <class T>
std::set<T> set_intersection(const std::set<T>& a, const std::set<T>& b) {
    std::set<T> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

template <class T>
std::set<T> set_difference(const std::set<T>& a, const std::set<T>& b) {
    std::set<T> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

template <class T>
bool is_subset(const std::set<T>& a, const std::set<T>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// All subsets of {0, ..., n-1}, in mask order.
inline std::vector<std::set<int>> power_set(int n) {
    std::vector<std::set<int>> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::set<int> s;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) s.insert(i);
        out.push_back(std::move(s));
    }
    return out;
}

/// Points-to pairs of a map; keys bound to empty sets contribute nothing.
template <class K, class V>
std::set<std::pair<K, V>> pairs_of(const std::map<K, std::set<V>>& m) {
    std::set<std::pair<K, V>> out;
    for (const auto& [k, vs] : m)
        for (const auto& v : vs) out.emplace(k, v);
    return out;
}

}  // namespace oracle
