#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mde {

enum class OpKind : std::uint8_t { Union = 0, Intersection = 1, Difference = 2 };

inline constexpr std::array<OpKind, 3> kAllOps{OpKind::Union, OpKind::Intersection, OpKind::Difference};

[[nodiscard]] constexpr std::string_view op_name(OpKind op) noexcept {
    switch (op) {
        case OpKind::Union: return "union";
        case OpKind::Intersection: return "intersection";
        case OpKind::Difference: return "difference";
    }
    return "?";
}

[[nodiscard]] constexpr bool is_commutative(OpKind op) noexcept { return op != OpKind::Difference; }

/// How a top-level operation query was resolved. Priority follows the check
/// order of the operation wrapper: equal, empty, subset, memo, miss.
enum class Outcome : std::uint8_t { Hit, EqualHit, SubsetHit, EmptyHit, ColdMiss, EdgeMiss };

struct OperationCounters {
    std::uint64_t hits = 0;
    std::uint64_t equal_hits = 0;
    std::uint64_t subset_hits = 0;
    std::uint64_t empty_hits = 0;
    std::uint64_t cold_misses = 0;
    std::uint64_t edge_misses = 0;
    // instrumentation: calls entering the wrapper, kernel runs, and input
    // elements consumed by kernels
    std::uint64_t queries = 0;
    std::uint64_t merge_executions = 0;
    std::uint64_t merge_steps = 0;

    void record(Outcome o) noexcept {
        switch (o) {
            case Outcome::Hit: ++hits; break;
            case Outcome::EqualHit: ++equal_hits; break;
            case Outcome::SubsetHit: ++subset_hits; break;
            case Outcome::EmptyHit: ++empty_hits; break;
            case Outcome::ColdMiss: ++cold_misses; break;
            case Outcome::EdgeMiss: ++edge_misses; break;
        }
    }

    [[nodiscard]] std::uint64_t total_queries() const noexcept {
        return hits + equal_hits + subset_hits + empty_hits + cold_misses + edge_misses;
    }

    [[nodiscard]] std::uint64_t misses() const noexcept { return cold_misses + edge_misses; }

    /// All four hit kinds over total queries; absent when nothing was queried.
    [[nodiscard]] std::optional<double> hit_ratio() const noexcept {
        const auto total = total_queries();
        if (total == 0) return std::nullopt;
        return static_cast<double>(total - misses()) / static_cast<double>(total);
    }

    OperationCounters& operator+=(const OperationCounters& o) noexcept {
        hits += o.hits;
        equal_hits += o.equal_hits;
        subset_hits += o.subset_hits;
        empty_hits += o.empty_hits;
        cold_misses += o.cold_misses;
        edge_misses += o.edge_misses;
        queries += o.queries;
        merge_executions += o.merge_executions;
        merge_steps += o.merge_steps;
        return *this;
    }

    friend bool operator==(const OperationCounters&, const OperationCounters&) = default;
};

/// Registration-side instrumentation.
struct StoreCounters {
    std::uint64_t registrations = 0;
    std::uint64_t fresh_registrations = 0;
    std::uint64_t hashed_elements = 0;
    // elements copied by direct-manipulation primitives that rebuild a set
    std::uint64_t rebuilt_elements = 0;

    friend bool operator==(const StoreCounters&, const StoreCounters&) = default;
};

struct EngineMetrics {
    std::array<OperationCounters, 3> ops{};
    StoreCounters store{};

    [[nodiscard]] OperationCounters& at(OpKind op) & noexcept { return ops[static_cast<std::size_t>(op)]; }
    [[nodiscard]] const OperationCounters& at(OpKind op) const& noexcept {
        return ops[static_cast<std::size_t>(op)];
    }
    [[nodiscard]] OperationCounters at(OpKind op) && noexcept { return ops[static_cast<std::size_t>(op)]; }

    [[nodiscard]] std::uint64_t merge_steps() const noexcept {
        std::uint64_t s = 0;
        for (const auto& c : ops) s += c.merge_steps;
        return s;
    }

    [[nodiscard]] std::uint64_t merge_executions() const noexcept {
        std::uint64_t s = 0;
        for (const auto& c : ops) s += c.merge_executions;
        return s;
    }

    /// Every element an engine touched: merge kernels, hashing on registration
    /// and set rebuilds.
    [[nodiscard]] std::uint64_t element_visits() const noexcept {
        return merge_steps() + store.hashed_elements + store.rebuilt_elements;
    }

    friend bool operator==(const EngineMetrics&, const EngineMetrics&) = default;
};

/// Counter snapshot of several named engines, keyed engine -> operation.
class MetricsReport {
public:
    void add(std::string engine, const EngineMetrics& m) { engines_[std::move(engine)] = m; }

    [[nodiscard]] const std::map<std::string, EngineMetrics>& engines() const& noexcept { return engines_; }
    [[nodiscard]] std::map<std::string, EngineMetrics> engines() && { return std::move(engines_); }

    [[nodiscard]] bool partition_holds() const noexcept {
        for (const auto& [name, m] : engines_) {
            for (auto op : kAllOps) {
                const auto& c = m.at(op);
                if (c.total_queries() != c.queries) return false;
                if (c.merge_executions != c.misses()) return false;
            }
        }
        return true;
    }

private:
    std::map<std::string, EngineMetrics> engines_;
};

}  // namespace mde
