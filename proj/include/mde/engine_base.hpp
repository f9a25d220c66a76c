#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mde/metrics.hpp"
#include "mde/store.hpp"
#include "mde/types.hpp"

namespace mde {

struct EngineOptions {
    // sets up to this size are searched linearly by contains()
    std::size_t contains_linear_threshold = 16;
    // when false, the subset map is still populated but never consulted
    bool subset_shortcuts = true;
    // record every distinct (operation, operands) query; used by benchmarks
    bool track_operand_pairs = false;
};

/// Memo key; commutative operations store it with lhs < rhs.
struct OperandPair {
    SetIndex lhs;
    SetIndex rhs;
    friend constexpr auto operator<=>(const OperandPair&, const OperandPair&) = default;
};

struct OperandPairHash {
    std::size_t operator()(const OperandPair& p) const noexcept {
        return static_cast<std::size_t>(
            detail::mix64((static_cast<std::uint64_t>(p.lhs.value()) << 32) | p.rhs.value()));
    }
};

struct MemoEntry {
    SetIndex lhs;
    SetIndex rhs;
    SetIndex result;
    friend constexpr auto operator<=>(const MemoEntry&, const MemoEntry&) = default;
};

/// (a, b) with a < b; `a_subset_of_b` false means a is a superset of b.
struct SubsetEntry {
    SetIndex a;
    SetIndex b;
    bool a_subset_of_b = true;
    friend constexpr auto operator<=>(const SubsetEntry&, const SubsetEntry&) = default;
};

/// Plain-data image of one engine; the persistence layer converts it to and
/// from JSON. Evicted slots are `std::nullopt`.
template <class Element>
struct EngineState {
    std::vector<std::optional<std::vector<Element>>> sets;
    std::array<std::vector<MemoEntry>, 3> memo;
    std::vector<SubsetEntry> subset;
    EngineMetrics metrics;
};

/// Shared machinery of flat and nested engines: interning, the memoizing
/// operation wrapper with its trivial-case checks, the subset relation map and
/// the counters. `Derived` supplies the element order and the merge kernels:
///
///   static bool element_less(const Element&, const Element&);
///   void validate_elements(std::span<const Element>) const;
///   std::vector<Element> kernel(OpKind, span lhs, span rhs, std::uint64_t& steps);
///   bool includes(span super, span sub);
template <class Derived, class Element, class ElementHash>
class EngineBase {
public:
    using element_type = Element;
    using Set = std::vector<Element>;

    explicit EngineBase(EngineOptions options = {}) : options_(options) {}

    EngineBase(const EngineBase&) = delete;
    EngineBase& operator=(const EngineBase&) = delete;

    // -- interning --------------------------------------------------------

    /// Registers a set already in canonical order.
    RegisterResult register_set(Set set) {
        check_canonical(set);
        derived().validate_elements(set);
        return store_.intern(std::move(set));
    }

    /// Sorts and deduplicates `items`, then registers them.
    RegisterResult register_from_items(Set items) {
        std::sort(items.begin(), items.end(), &Derived::element_less);
        auto last = std::unique(items.begin(), items.end(), [](const Element& a, const Element& b) {
            return !Derived::element_less(a, b) && !Derived::element_less(b, a);
        });
        items.erase(last, items.end());
        return register_set(std::move(items));
    }

    [[nodiscard]] std::span<const Element> resolve(SetIndex i) const { return store_.resolve(i); }
    [[nodiscard]] std::size_t set_size(SetIndex i) const { return store_.resolve(i).size(); }
    [[nodiscard]] bool is_live(SetIndex i) const noexcept { return store_.is_live(i); }
    [[nodiscard]] std::optional<SetIndex> lookup(const Set& set) const { return store_.find(set); }
    [[nodiscard]] std::size_t slot_count() const noexcept { return store_.slot_count(); }
    [[nodiscard]] std::size_t live_count() const noexcept { return store_.live_count(); }

    // -- operations -------------------------------------------------------

    SetIndex set_union(SetIndex a, SetIndex b) { return operate(OpKind::Union, a, b); }
    SetIndex set_intersection(SetIndex a, SetIndex b) { return operate(OpKind::Intersection, a, b); }
    SetIndex set_difference(SetIndex a, SetIndex b) { return operate(OpKind::Difference, a, b); }

    SetIndex operate(OpKind op, SetIndex a, SetIndex b) {
        check_live(a);
        check_live(b);
        auto& counters = metrics_.at(op);
        ++counters.queries;
        if (options_.track_operand_pairs) track(op, a, b);

        if (auto shortcut = trivial(op, a, b)) {
            counters.record(shortcut->second);
            return shortcut->first;
        }

        const OperandPair key = memo_key(op, a, b);
        auto& memo = memo_[static_cast<std::size_t>(op)];
        if (auto it = memo.find(key); it != memo.end()) {
            counters.record(Outcome::Hit);
            return it->second;
        }

        std::uint64_t steps = 0;
        Set merged = derived().kernel(op, resolve(key.lhs), resolve(key.rhs), steps);
        counters.merge_steps += steps;
        ++counters.merge_executions;
        const RegisterResult reg = store_.intern(std::move(merged));
        memo.emplace(key, reg.index);

        switch (op) {
            case OpKind::Union:
                record_subset(key.lhs, reg.index);
                record_subset(key.rhs, reg.index);
                break;
            case OpKind::Intersection:
                record_subset(reg.index, key.lhs);
                record_subset(reg.index, key.rhs);
                break;
            case OpKind::Difference:
                record_subset(reg.index, key.lhs);
                break;
        }
        counters.record(reg.fresh ? Outcome::ColdMiss : Outcome::EdgeMiss);
        return reg.index;
    }

    /// Whether the set `a` is contained in the set `b`. Computed answers are
    /// written back to the subset map.
    bool is_subset(SetIndex a, SetIndex b) {
        check_live(a);
        check_live(b);
        if (a == b || a == kEmptySet) return true;
        if (b == kEmptySet) return false;
        if (options_.subset_shortcuts) {
            switch (known_relation(a, b)) {
                case Relation::LhsSubset: return true;
                case Relation::RhsSubset: return false;  // distinct indices, so strict
                case Relation::Unknown: break;
            }
        }
        const auto sa = resolve(a);
        const auto sb = resolve(b);
        if (derived().includes(sb, sa)) {
            record_subset(a, b);
            return true;
        }
        if (sb.size() <= sa.size() && derived().includes(sa, sb)) record_subset(b, a);
        return false;
    }

    // -- eviction ---------------------------------------------------------

    /// Tombstones `victims` and purges every memo and subset entry mentioning
    /// them. Each parent engine is scanned for registered sets that still
    /// reference a victim through this engine; any such reference is an error.
    template <class... Parents>
    void evict(std::span<const SetIndex> victims, const Parents&... parents) {
        std::unordered_set<SetIndex> doomed;
        for (auto v : victims) {
            if (v == kEmptySet) throw UsageError("the empty set (index 0) cannot be evicted");
            if (!store_.is_live(v)) throw UsageError("cannot evict unknown set index " + std::to_string(v.value()));
            doomed.insert(v);
        }
        if (doomed.empty()) return;
        (check_unreferenced(parents, doomed), ...);

        for (auto v : doomed) store_.tombstone(v);
        auto mentions = [&](SetIndex i) { return doomed.contains(i); };
        for (auto& memo : memo_) {
            std::erase_if(memo, [&](const auto& kv) {
                return mentions(kv.first.lhs) || mentions(kv.first.rhs) || mentions(kv.second);
            });
        }
        std::erase_if(subset_, [&](const auto& kv) { return mentions(kv.first.lhs) || mentions(kv.first.rhs); });
    }

    // -- introspection ----------------------------------------------------

    [[nodiscard]] EngineMetrics metrics() const {
        EngineMetrics m = metrics_;
        m.store = store_.counters();
        return m;
    }
    [[nodiscard]] const EngineOptions& options() const noexcept { return options_; }
    void set_options(EngineOptions o) noexcept { options_ = o; }

    [[nodiscard]] std::optional<SetIndex> memoized(OpKind op, SetIndex a, SetIndex b) const {
        const auto& memo = memo_[static_cast<std::size_t>(op)];
        auto it = memo.find(memo_key(op, a, b));
        if (it == memo.end()) return std::nullopt;
        return it->second;
    }

    /// Memo entries of one operation, sorted by operands.
    [[nodiscard]] std::vector<MemoEntry> memo_entries(OpKind op) const {
        std::vector<MemoEntry> out;
        for (const auto& [k, r] : memo_[static_cast<std::size_t>(op)]) out.push_back({k.lhs, k.rhs, r});
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] std::vector<SubsetEntry> subset_entries() const {
        std::vector<SubsetEntry> out;
        for (const auto& [k, flag] : subset_) out.push_back({k.lhs, k.rhs, flag});
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] std::size_t distinct_operand_pairs() const noexcept { return seen_pairs_.size(); }

    // -- snapshot support -------------------------------------------------

    [[nodiscard]] EngineState<Element> export_state() const {
        EngineState<Element> s;
        s.sets.reserve(store_.slot_count());
        for (std::size_t i = 0; i < store_.slot_count(); ++i) {
            const SetIndex idx(static_cast<SetIndex::value_type>(i));
            if (store_.is_live(idx)) {
                auto view = store_.resolve(idx);
                s.sets.emplace_back(std::in_place, view.begin(), view.end());
            } else {
                s.sets.emplace_back(std::nullopt);
            }
        }
        for (auto op : kAllOps) s.memo[static_cast<std::size_t>(op)] = memo_entries(op);
        s.subset = subset_entries();
        s.metrics = metrics();
        return s;
    }

    /// Replaces the whole engine state. Sets are re-sorted under this engine's
    /// element order (property ordinals may differ between runs).
    void import_state(EngineState<Element> s) {
        if (s.sets.empty() || !s.sets[0] || !s.sets[0]->empty())
            throw LoadError("set 0 must be present and empty");

        SetStore<Element, ElementHash> fresh;
        fresh.clear_for_restore();
        for (std::size_t i = 0; i < s.sets.size(); ++i) {
            auto& slot = s.sets[i];
            if (!slot) {
                if (i == 0) throw LoadError("set 0 cannot be evicted");
                fresh.restore_slot(nullptr);
                continue;
            }
            std::sort(slot->begin(), slot->end(), &Derived::element_less);
            try {
                check_canonical(*slot);
                derived().validate_elements(*slot);
            } catch (const UsageError& e) {
                throw LoadError("sets[" + std::to_string(i) + "]: " + e.what());
            }
            fresh.restore_slot(std::make_unique<Set>(std::move(*slot)));
        }

        auto live = [&](SetIndex i) { return fresh.is_live(i); };
        std::array<std::unordered_map<OperandPair, SetIndex, OperandPairHash>, 3> memo;
        for (auto op : kAllOps) {
            for (const auto& e : s.memo[static_cast<std::size_t>(op)]) {
                const std::string where = std::string("memo.") + std::string(op_name(op));
                if (!live(e.lhs) || !live(e.rhs) || !live(e.result))
                    throw LoadError(where + ": entry references a missing set");
                if (is_commutative(op) && !(e.lhs < e.rhs))
                    throw LoadError(where + ": operands of a commutative entry must be ordered");
                memo[static_cast<std::size_t>(op)].emplace(OperandPair{e.lhs, e.rhs}, e.result);
            }
        }
        std::unordered_map<OperandPair, bool, OperandPairHash> subset;
        for (const auto& e : s.subset) {
            if (!live(e.a) || !live(e.b)) throw LoadError("subset: entry references a missing set");
            if (!(e.a < e.b)) throw LoadError("subset: entry keys must satisfy a < b");
            subset.emplace(OperandPair{e.a, e.b}, e.a_subset_of_b);
        }

        store_ = std::move(fresh);
        store_.counters() = s.metrics.store;
        memo_ = std::move(memo);
        subset_ = std::move(subset);
        metrics_ = s.metrics;
        metrics_.store = {};
        seen_pairs_.clear();
    }

protected:
    enum class Relation { Unknown, LhsSubset, RhsSubset };

    [[nodiscard]] Derived& derived() noexcept { return static_cast<Derived&>(*this); }
    [[nodiscard]] const Derived& derived() const noexcept { return static_cast<const Derived&>(*this); }

    void check_live(SetIndex i) const {
        if (!store_.is_live(i)) (void)store_.resolve(i);  // throws with a precise message
    }

    void check_canonical(std::span<const Element> set) const {
        for (std::size_t i = 1; i < set.size(); ++i) {
            if (!Derived::element_less(set[i - 1], set[i]))
                throw UsageError("property set is not strictly ascending at position " + std::to_string(i));
        }
    }

    /// Position of the first element not ordered before `probe` under `less`.
    template <class Probe, class Less>
    [[nodiscard]] const Element* locate(std::span<const Element> set, const Probe& probe, Less less) const {
        if (set.size() <= options_.contains_linear_threshold) {
            for (const auto& e : set) {
                if (!less(e, probe)) return &e;
            }
            return set.data() + set.size();
        }
        return set.data() + (std::lower_bound(set.begin(), set.end(), probe, less) - set.begin());
    }

    [[nodiscard]] Relation known_relation(SetIndex a, SetIndex b) const {
        const bool swapped = b < a;
        auto it = subset_.find(swapped ? OperandPair{b, a} : OperandPair{a, b});
        if (it == subset_.end()) return Relation::Unknown;
        const bool first_is_subset = it->second;
        return (first_is_subset != swapped) ? Relation::LhsSubset : Relation::RhsSubset;
    }

    void record_subset(SetIndex sub, SetIndex super) {
        if (sub == super || sub == kEmptySet) return;
        if (sub < super)
            subset_.insert_or_assign(OperandPair{sub, super}, true);
        else
            subset_.insert_or_assign(OperandPair{super, sub}, false);
    }

    SetStore<Element, ElementHash> store_;

private:
    struct SeenKey {
        OpKind op;
        OperandPair operands;
        friend bool operator==(const SeenKey&, const SeenKey&) = default;
    };
    struct SeenKeyHash {
        std::size_t operator()(const SeenKey& k) const noexcept {
            return detail::hash_combine(OperandPairHash{}(k.operands), static_cast<std::uint64_t>(k.op));
        }
    };

    [[nodiscard]] static OperandPair memo_key(OpKind op, SetIndex a, SetIndex b) noexcept {
        if (is_commutative(op) && b < a) return {b, a};
        return {a, b};
    }

    void track(OpKind op, SetIndex a, SetIndex b) { seen_pairs_.insert(SeenKey{op, memo_key(op, a, b)}); }

    [[nodiscard]] std::optional<std::pair<SetIndex, Outcome>> trivial(OpKind op, SetIndex a, SetIndex b) const {
        using R = std::pair<SetIndex, Outcome>;
        const bool shortcuts = options_.subset_shortcuts;
        switch (op) {
            case OpKind::Union: {
                if (a == b) return R{a, Outcome::EqualHit};
                const auto lo = std::min(a, b), hi = std::max(a, b);
                if (lo == kEmptySet) return R{hi, Outcome::EmptyHit};
                if (shortcuts) {
                    switch (known_relation(lo, hi)) {
                        case Relation::LhsSubset: return R{hi, Outcome::SubsetHit};
                        case Relation::RhsSubset: return R{lo, Outcome::SubsetHit};
                        case Relation::Unknown: break;
                    }
                }
                return std::nullopt;
            }
            case OpKind::Intersection: {
                if (a == b) return R{a, Outcome::EqualHit};
                const auto lo = std::min(a, b), hi = std::max(a, b);
                if (lo == kEmptySet) return R{kEmptySet, Outcome::EmptyHit};
                if (shortcuts) {
                    switch (known_relation(lo, hi)) {
                        case Relation::LhsSubset: return R{lo, Outcome::SubsetHit};
                        case Relation::RhsSubset: return R{hi, Outcome::SubsetHit};
                        case Relation::Unknown: break;
                    }
                }
                return std::nullopt;
            }
            case OpKind::Difference: {
                if (a == b) return R{kEmptySet, Outcome::EqualHit};
                if (b == kEmptySet) return R{a, Outcome::EmptyHit};
                if (a == kEmptySet) return R{kEmptySet, Outcome::EmptyHit};
                if (shortcuts && known_relation(a, b) == Relation::LhsSubset) return R{kEmptySet, Outcome::SubsetHit};
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    template <class Parent>
    void check_unreferenced(const Parent& parent, const std::unordered_set<SetIndex>& doomed) const {
        if (auto hit = parent.find_child_reference(static_cast<const void*>(&derived()), doomed)) {
            throw UsageError("set index " + std::to_string(hit->second.value()) +
                             " is still referenced by parent set " + std::to_string(hit->first.value()));
        }
    }

    EngineOptions options_;
    std::array<std::unordered_map<OperandPair, SetIndex, OperandPairHash>, 3> memo_;
    std::unordered_map<OperandPair, bool, OperandPairHash> subset_;
    EngineMetrics metrics_;
    std::unordered_set<SeenKey, SeenKeyHash> seen_pairs_;
};

}  // namespace mde
