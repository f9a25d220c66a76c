#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mde/metrics.hpp"
#include "mde/types.hpp"

namespace mde {

/// Interning store for immutable sorted sequences.
///
/// Every distinct sequence is owned by its own heap allocation that never moves,
/// so views handed out by `resolve` survive any number of later registrations.
/// The content map is keyed by pointers into that storage; lookup hashes the
/// whole sequence and confirms with full equality, so hash collisions are
/// harmless. Slot 0 always holds the empty sequence.
template <class Element, class ElementHash = std::hash<Element>>
class SetStore {
public:
    using element_type = Element;
    using Set = std::vector<Element>;

    SetStore() { append(Set{}); }

    SetStore(const SetStore&) = delete;
    SetStore& operator=(const SetStore&) = delete;
    SetStore(SetStore&&) noexcept = default;
    SetStore& operator=(SetStore&&) noexcept = default;

    /// Interns `set`, which must already be in canonical (sorted, unique) form.
    RegisterResult intern(Set&& set) {
        counters_.registrations++;
        counters_.hashed_elements += set.size();
        if (auto it = content_.find(&set); it != content_.end()) return {it->second, false};
        counters_.fresh_registrations++;
        return {append(std::move(set)), true};
    }

    [[nodiscard]] std::optional<SetIndex> find(const Set& set) const {
        auto it = content_.find(&set);
        if (it == content_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] bool is_live(SetIndex i) const noexcept {
        return i.value() < slots_.size() && slots_[i.value()] != nullptr;
    }

    [[nodiscard]] std::span<const Element> resolve(SetIndex i) const {
        if (!is_live(i)) {
            throw UsageError(i.value() < slots_.size() ? "set index " + std::to_string(i.value()) + " was evicted"
                                                       : "unknown set index " + std::to_string(i.value()));
        }
        return *slots_[i.value()];
    }

    /// Number of issued indices, tombstones included.
    [[nodiscard]] std::size_t slot_count() const noexcept { return slots_.size(); }
    [[nodiscard]] std::size_t live_count() const noexcept { return content_.size(); }

    /// Drops the slot's content; the index is never issued again.
    void tombstone(SetIndex i) {
        if (!is_live(i)) throw UsageError("cannot evict unknown set index " + std::to_string(i.value()));
        content_.erase(slots_[i.value()].get());
        slots_[i.value()].reset();
    }

    /// Appends a slot without deduplication; used when restoring snapshots.
    /// A null `set` restores a tombstone.
    void restore_slot(std::unique_ptr<Set> set) {
        if (slots_.size() >= kMaxSetCount) throw CapacityError("set index space exhausted");
        if (set) {
            auto [it, inserted] = content_.emplace(set.get(), SetIndex(static_cast<SetIndex::value_type>(slots_.size())));
            if (!inserted) throw LoadError("duplicate set content at index " + std::to_string(slots_.size()));
        }
        slots_.push_back(std::move(set));
    }

    void clear_for_restore() {
        content_.clear();
        slots_.clear();
    }

    [[nodiscard]] StoreCounters& counters() noexcept { return counters_; }
    [[nodiscard]] const StoreCounters& counters() const noexcept { return counters_; }

private:
    struct DerefHash {
        std::size_t operator()(const Set* s) const noexcept {
            std::uint64_t h = detail::mix64(s->size());
            for (const auto& e : *s) h = detail::hash_combine(h, ElementHash{}(e));
            return static_cast<std::size_t>(h);
        }
    };
    struct DerefEqual {
        bool operator()(const Set* a, const Set* b) const noexcept { return *a == *b; }
    };

    SetIndex append(Set&& set) {
        if (slots_.size() >= kMaxSetCount) throw CapacityError("set index space exhausted");
        const SetIndex idx(static_cast<SetIndex::value_type>(slots_.size()));
        slots_.push_back(std::make_unique<Set>(std::move(set)));
        content_.emplace(slots_.back().get(), idx);
        return idx;
    }

    std::vector<std::unique_ptr<Set>> slots_;
    std::unordered_map<const Set*, SetIndex, DerefHash, DerefEqual> content_;
    StoreCounters counters_;
};

}  // namespace mde
