#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mde/engine.hpp"
#include "mde/metrics.hpp"
#include "mde/nested_engine.hpp"
#include "mde/pta/program.hpp"

namespace mde::pta {

using PointeeEngine = Engine<VarId>;
using MapEngine = NestedEngine<VarId, PointeeEngine>;

/// Engines shared by every analysis of a run. Liveness sets live in the same
/// engine as pointee sets.
struct Workspace {
    SymbolTable symbols;
    PointeeEngine pointees;
    MapEngine maps;

    explicit Workspace(EngineOptions options = {}) : pointees(options), maps(options, pointees) {}
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    [[nodiscard]] MetricsReport report() const {
        MetricsReport r;
        r.add("pointee_sets", pointees.metrics());
        r.add("points_to_maps", maps.metrics());
        return r;
    }
};

enum class Backend : std::uint8_t { Naive, SingleLevel, MultiLevel };

[[nodiscard]] inline std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::Naive: return "naive";
        case Backend::SingleLevel: return "single-level";
        case Backend::MultiLevel: return "multi-level";
    }
    return "?";
}

[[nodiscard]] inline std::optional<Backend> parse_backend(std::string_view s) noexcept {
    for (auto b : {Backend::Naive, Backend::SingleLevel, Backend::MultiLevel})
        if (backend_name(b) == s) return b;
    return std::nullopt;
}

using PointsToPairs = std::vector<std::pair<VarId, VarId>>;
using VarList = std::vector<VarId>;

// ---------------------------------------------------------------------------
// points-to backends
//
// Each backend exposes the same primitive vocabulary; the transfer function
// below is written once against it. `visits` counts element touches: for the
// naive backend every element read, copied, compared or merged; for engine
// backends the engines' own element visits plus map-entry work done outside
// the engines.

class NaivePointsTo {
public:
    using PSet = std::set<VarId>;
    using Fact = std::map<VarId, PSet>;

    Fact bottom() const { return {}; }
    PSet empty_set() const { return {}; }

    PSet singleton(VarId v) {
        ++visits_;
        return {v};
    }

    PSet pointees(const Fact& f, VarId v) {
        auto it = f.find(v);
        if (it == f.end()) return {};
        visits_ += it->second.size();
        return it->second;
    }

    std::vector<VarId> elements(const PSet& s) {
        visits_ += s.size();
        return {s.begin(), s.end()};
    }

    PSet unite(PSet a, const PSet& b) {
        ++merges_;
        visits_ += a.size() + b.size();
        a.insert(b.begin(), b.end());
        return a;
    }

    Fact assign(Fact f, VarId v, PSet s) {
        visits_ += s.size() + 1;
        if (s.empty())
            f.erase(v);
        else
            f[v] = std::move(s);
        return f;
    }

    Fact add(Fact f, VarId v, const PSet& s) {
        if (s.empty()) return f;
        auto& target = f[v];
        target = unite(std::move(target), s);
        return f;
    }

    Fact join(const Fact& a, const Fact& b) {
        ++merges_;
        Fact out = a;
        visits_ += pairs(a) + a.size();
        for (const auto& [k, s] : b) {
            auto& t = out[k];
            visits_ += t.size() + s.size() + 1;
            t.insert(s.begin(), s.end());
        }
        return out;
    }

    bool same(const Fact& a, const Fact& b) {
        if (a.size() != b.size()) return false;
        for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
            ++visits_;
            if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
            for (auto x = ia->second.begin(), y = ib->second.begin(); x != ia->second.end(); ++x, ++y) {
                ++visits_;
                if (*x != *y) return false;
            }
        }
        return true;
    }

    bool leq(const Fact& a, const Fact& b) const {
        for (const auto& [k, s] : a) {
            auto it = b.find(k);
            if (it == b.end()) {
                if (!s.empty()) return false;
                continue;
            }
            if (!std::includes(it->second.begin(), it->second.end(), s.begin(), s.end())) return false;
        }
        return true;
    }

    /// Copy stored at a program point.
    Fact keep(const Fact& f) {
        visits_ += pairs(f) + f.size();
        return f;
    }

    PointsToPairs flatten(const Fact& f) const {
        PointsToPairs out;
        for (const auto& [k, s] : f)
            for (auto p : s) out.emplace_back(k, p);
        return out;
    }

    std::uint64_t visits() const noexcept { return visits_; }
    std::uint64_t merges() const noexcept { return merges_; }

private:
    static std::uint64_t pairs(const Fact& f) {
        std::uint64_t n = 0;
        for (const auto& [k, s] : f) n += s.size();
        return n;
    }

    std::uint64_t visits_ = 0;
    std::uint64_t merges_ = 0;
};

/// Points-to maps as ordinary ordered maps whose values are interned
/// pointee-set indices.
class SingleLevelPointsTo {
public:
    using PSet = SetIndex;
    using Fact = std::map<VarId, SetIndex>;

    explicit SingleLevelPointsTo(PointeeEngine& e) : e_(e), base_(e.metrics().element_visits()) {}

    Fact bottom() const { return {}; }
    PSet empty_set() const { return kEmptySet; }
    PSet singleton(VarId v) { return e_.singleton(v); }

    PSet pointees(const Fact& f, VarId v) {
        ++map_visits_;
        auto it = f.find(v);
        return it == f.end() ? kEmptySet : it->second;
    }

    std::vector<VarId> elements(PSet s) {
        auto view = e_.resolve(s);
        map_visits_ += view.size();
        return {view.begin(), view.end()};
    }

    PSet unite(PSet a, PSet b) { return e_.set_union(a, b); }

    Fact assign(Fact f, VarId v, PSet s) {
        ++map_visits_;
        if (s == kEmptySet)
            f.erase(v);
        else
            f[v] = s;
        return f;
    }

    Fact add(Fact f, VarId v, PSet s) {
        if (s == kEmptySet) return f;
        ++map_visits_;
        auto& t = f[v];
        t = e_.set_union(t, s);
        return f;
    }

    Fact join(const Fact& a, const Fact& b) {
        Fact out = a;
        map_visits_ += a.size();
        for (const auto& [k, s] : b) {
            ++map_visits_;
            auto& t = out[k];
            t = e_.set_union(t, s);
        }
        return out;
    }

    bool same(const Fact& a, const Fact& b) {
        if (a.size() != b.size()) return false;
        for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
            ++map_visits_;
            if (*ia != *ib) return false;
        }
        return true;
    }

    bool leq(const Fact& a, const Fact& b) {
        for (const auto& [k, s] : a) {
            auto it = b.find(k);
            if (!e_.is_subset(s, it == b.end() ? kEmptySet : it->second)) return false;
        }
        return true;
    }

    Fact keep(const Fact& f) {
        map_visits_ += f.size();
        return f;
    }

    PointsToPairs flatten(const Fact& f) const {
        PointsToPairs out;
        for (const auto& [k, s] : f)
            for (auto p : e_.resolve(s)) out.emplace_back(k, p);
        return out;
    }

    std::uint64_t visits() const { return map_visits_ + e_.metrics().element_visits() - base_; }

private:
    PointeeEngine& e_;
    std::uint64_t base_;
    std::uint64_t map_visits_ = 0;
};

/// Whole points-to maps interned in the nested engine.
class MultiLevelPointsTo {
public:
    using PSet = SetIndex;
    using Fact = SetIndex;

    MultiLevelPointsTo(PointeeEngine& pointees, MapEngine& maps)
        : p_(pointees), m_(maps), base_(pointees.metrics().element_visits() + maps.metrics().element_visits()) {}

    Fact bottom() const { return kEmptySet; }
    PSet empty_set() const { return kEmptySet; }
    PSet singleton(VarId v) { return p_.singleton(v); }
    PSet pointees(Fact f, VarId v) const { return m_.get_pointees(f, v).value_or(kEmptySet); }

    std::vector<VarId> elements(PSet s) {
        auto view = p_.resolve(s);
        extra_visits_ += view.size();
        return {view.begin(), view.end()};
    }

    PSet unite(PSet a, PSet b) { return p_.set_union(a, b); }
    Fact assign(Fact f, VarId v, PSet s) { return s == kEmptySet ? m_.erase_key(f, v) : m_.update_pointees(f, v, s); }

    Fact add(Fact f, VarId v, PSet s) {
        if (s == kEmptySet) return f;
        return m_.set_union(f, m_.register_set({{v, {s}}}).index);
    }

    Fact join(Fact a, Fact b) { return m_.set_union(a, b); }
    bool same(Fact a, Fact b) const { return indices_equal(a, b); }
    bool leq(Fact a, Fact b) { return m_.is_subset(a, b); }
    Fact keep(Fact f) const { return f; }
    PointsToPairs flatten(Fact f) const { return m_.flatten(f); }

    std::uint64_t visits() const {
        return extra_visits_ + p_.metrics().element_visits() + m_.metrics().element_visits() - base_;
    }

private:
    PointeeEngine& p_;
    MapEngine& m_;
    std::uint64_t base_;
    std::uint64_t extra_visits_ = 0;
};

/// Flow-sensitive transfer for one statement. Store updates strongly only
/// when the target is a single non-heap variable; a store through a pointer
/// with no pointees cannot execute, so nothing flows past it.
template <class B>
typename B::Fact points_to_transfer(B& b, const Program& prog, const Statement& s, typename B::Fact f) {
    switch (s.kind) {
        case StmtKind::AddressOf:
        case StmtKind::Alloc: return b.assign(std::move(f), s.lhs, b.singleton(s.rhs));
        case StmtKind::Copy: {
            auto src = b.pointees(f, s.rhs);
            return b.assign(std::move(f), s.lhs, std::move(src));
        }
        case StmtKind::Load: {
            auto acc = b.empty_set();
            for (auto r : b.elements(b.pointees(f, s.rhs))) acc = b.unite(std::move(acc), b.pointees(f, r));
            return b.assign(std::move(f), s.lhs, std::move(acc));
        }
        case StmtKind::Store: {
            const auto targets = b.elements(b.pointees(f, s.lhs));
            if (targets.empty()) return b.bottom();
            auto src = b.pointees(f, s.rhs);
            if (targets.size() == 1 && !prog.symbols.is_heap(targets[0]))
                return b.assign(std::move(f), targets[0], std::move(src));
            for (auto r : targets) f = b.add(std::move(f), r, src);
            return f;
        }
        case StmtKind::Use: return f;
    }
    return f;
}

// ---------------------------------------------------------------------------
// liveness backends

struct DefUse {
    std::optional<VarId> def;
    std::vector<VarId> uses;
};

[[nodiscard]] inline DefUse def_use(const Statement& s) {
    switch (s.kind) {
        case StmtKind::AddressOf:
        case StmtKind::Alloc: return {s.lhs, {}};
        case StmtKind::Copy:
        case StmtKind::Load: return {s.lhs, {s.rhs}};
        case StmtKind::Store: return {std::nullopt, {s.lhs, s.rhs}};
        case StmtKind::Use: return {std::nullopt, {s.lhs}};
    }
    return {};
}

class NaiveLiveness {
public:
    using Fact = std::set<VarId>;

    Fact bottom() const { return {}; }

    Fact join(const Fact& a, const Fact& b) {
        ++merges_;
        visits_ += a.size() + b.size();
        Fact out = a;
        out.insert(b.begin(), b.end());
        return out;
    }

    bool same(const Fact& a, const Fact& b) {
        visits_ += std::min(a.size(), b.size());
        return a == b;
    }

    bool leq(const Fact& a, const Fact& b) const { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

    Fact keep(const Fact& f) {
        visits_ += f.size();
        return f;
    }

    Fact transfer(const Statement& s, Fact out) {
        const auto du = def_use(s);
        if (du.def) {
            visits_ += out.size();
            ++merges_;
            out.erase(*du.def);
        }
        if (!du.uses.empty()) {
            visits_ += out.size() + du.uses.size();
            ++merges_;
            out.insert(du.uses.begin(), du.uses.end());
        }
        return out;
    }

    VarList flatten(const Fact& f) const { return {f.begin(), f.end()}; }
    std::uint64_t visits() const noexcept { return visits_; }
    std::uint64_t merges() const noexcept { return merges_; }

private:
    std::uint64_t visits_ = 0;
    std::uint64_t merges_ = 0;
};

class EngineLiveness {
public:
    using Fact = SetIndex;

    explicit EngineLiveness(PointeeEngine& e) : e_(e), base_(e.metrics().element_visits()) {}

    Fact bottom() const { return kEmptySet; }
    Fact join(Fact a, Fact b) { return e_.set_union(a, b); }
    bool same(Fact a, Fact b) const { return indices_equal(a, b); }
    bool leq(Fact a, Fact b) { return e_.is_subset(a, b); }
    Fact keep(Fact f) const { return f; }

    Fact transfer(const Statement& s, Fact out) {
        const auto du = def_use(s);
        if (du.def) out = e_.remove_single(out, *du.def);
        if (!du.uses.empty()) out = e_.set_union(out, e_.register_from_items(du.uses).index);
        return out;
    }

    VarList flatten(Fact f) const {
        auto v = e_.resolve(f);
        return {v.begin(), v.end()};
    }
    std::uint64_t visits() const { return e_.metrics().element_visits() - base_; }

private:
    PointeeEngine& e_;
    std::uint64_t base_;
};

// ---------------------------------------------------------------------------
// solver

/// Facts in control-flow order: `before[i]` holds just before statement i,
/// `after[i]` just after it. Block facts cover empty blocks.
template <class Fact>
struct Solution {
    std::vector<Fact> before, after;
    std::vector<Fact> block_entry, block_exit;
    std::size_t passes = 0;
    std::size_t monotonicity_violations = 0;
};

/// Round-robin iteration in reverse post-order (forward) or post-order
/// (backward) until no block boundary fact changes.
template <class D, class Transfer>
Solution<typename D::Fact> solve(const Program& prog, D& d, Transfer transfer, bool forward, bool check_monotone) {
    using Fact = typename D::Fact;
    const std::size_t n = prog.statement_count(), nb = prog.blocks.size();
    Solution<Fact> sol;
    sol.before.assign(n, d.bottom());
    sol.after.assign(n, d.bottom());
    sol.block_entry.assign(nb, d.bottom());
    sol.block_exit.assign(nb, d.bottom());

    auto order = prog.reverse_post_order();
    if (!forward) std::reverse(order.begin(), order.end());

    for (bool changed = true; changed;) {
        changed = false;
        ++sol.passes;
        for (auto b : order) {
            const Block& blk = prog.blocks[b];
            const auto& sources = forward ? blk.predecessors : blk.successors;
            auto& facts_from = forward ? sol.block_exit : sol.block_entry;
            Fact cur = d.bottom();
            for (auto s : sources) cur = d.join(cur, facts_from[s]);

            const std::size_t k = blk.statements.size();
            if (forward) {
                sol.block_entry[b] = d.keep(cur);
                for (std::size_t i = 0; i < k; ++i) {
                    const std::size_t g = blk.first_statement + i;
                    sol.before[g] = d.keep(cur);
                    cur = transfer(blk.statements[i], std::move(cur));
                    sol.after[g] = d.keep(cur);
                }
            } else {
                sol.block_exit[b] = d.keep(cur);
                for (std::size_t i = k; i-- > 0;) {
                    const std::size_t g = blk.first_statement + i;
                    sol.after[g] = d.keep(cur);
                    cur = transfer(blk.statements[i], std::move(cur));
                    sol.before[g] = d.keep(cur);
                }
            }
            auto& result = forward ? sol.block_exit[b] : sol.block_entry[b];
            if (!d.same(cur, result)) {
                if (check_monotone && !d.leq(result, cur)) ++sol.monotonicity_violations;
                result = d.keep(cur);
                changed = true;
            }
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// driver

struct AnalysisOptions {
    bool check_monotone = false;
};

/// Flattened fixed points of both analyses plus instrumentation.
struct AnalysisOutput {
    Backend backend = Backend::Naive;
    std::vector<PointsToPairs> points_to_before, points_to_after;
    std::vector<PointsToPairs> points_to_block_entry, points_to_block_exit;
    std::vector<VarList> live_before, live_after;
    std::vector<VarList> live_block_entry, live_block_exit;
    std::size_t points_to_passes = 0;
    std::size_t liveness_passes = 0;
    std::size_t monotonicity_violations = 0;
    std::uint64_t element_visits = 0;
    // kernel runs under the engines; join/union calls under the naive backend
    std::uint64_t merge_executions = 0;
    std::uint64_t distinct_pointee_sets = 0;
    std::uint64_t distinct_maps = 0;
};

namespace detail {

template <class D, class Fact, class Out>
void flatten_all(const D& d, const std::vector<Fact>& in, std::vector<Out>& out) {
    out.clear();
    out.reserve(in.size());
    for (const auto& f : in) out.push_back(d.flatten(f));
}

inline std::uint64_t engine_merges(const Workspace& ws) {
    return ws.pointees.metrics().merge_executions() + ws.maps.metrics().merge_executions();
}

}  // namespace detail

/// Runs points-to and liveness on `prog`. Engine backends need `ws`, whose
/// symbol table must agree with the program's; the naive backend never
/// touches engines.
inline AnalysisOutput run_analyses(const Program& prog, Backend backend, Workspace* ws,
                                   const AnalysisOptions& options = {}) {
    AnalysisOutput out;
    out.backend = backend;
    auto fill = [&](const auto& pd, const auto& pt, const auto& ld, const auto& lv) {
        detail::flatten_all(pd, pt.before, out.points_to_before);
        detail::flatten_all(pd, pt.after, out.points_to_after);
        detail::flatten_all(pd, pt.block_entry, out.points_to_block_entry);
        detail::flatten_all(pd, pt.block_exit, out.points_to_block_exit);
        detail::flatten_all(ld, lv.before, out.live_before);
        detail::flatten_all(ld, lv.after, out.live_after);
        detail::flatten_all(ld, lv.block_entry, out.live_block_entry);
        detail::flatten_all(ld, lv.block_exit, out.live_block_exit);
        out.points_to_passes = pt.passes;
        out.liveness_passes = lv.passes;
        out.monotonicity_violations = pt.monotonicity_violations + lv.monotonicity_violations;
    };

    if (backend == Backend::Naive) {
        NaivePointsTo pd;
        NaiveLiveness ld;
        auto pt = solve(
            prog, pd, [&](const Statement& s, auto f) { return points_to_transfer(pd, prog, s, std::move(f)); }, true,
            options.check_monotone);
        auto lv = solve(
            prog, ld, [&](const Statement& s, auto f) { return ld.transfer(s, std::move(f)); }, false,
            options.check_monotone);
        fill(pd, pt, ld, lv);
        out.element_visits = pd.visits() + ld.visits();
        out.merge_executions = pd.merges() + ld.merges();

        std::set<std::set<VarId>> sets;
        std::set<NaivePointsTo::Fact> maps;
        for (const auto* facts : {&pt.before, &pt.after}) {
            for (const auto& f : *facts) {
                maps.insert(f);
                for (const auto& [k, s] : f) sets.insert(s);
            }
        }
        for (const auto* facts : {&lv.before, &lv.after})
            for (const auto& f : *facts) sets.insert(f);
        sets.erase(std::set<VarId>{});
        maps.erase(decltype(maps)::key_type{});
        out.distinct_pointee_sets = sets.size();
        out.distinct_maps = maps.size();
        return out;
    }

    if (ws == nullptr) throw UsageError("engine backends need a workspace");
    const auto merges_before = detail::engine_merges(*ws);
    EngineLiveness ld(ws->pointees);
    if (backend == Backend::SingleLevel) {
        SingleLevelPointsTo pd(ws->pointees);
        auto pt = solve(
            prog, pd, [&](const Statement& s, auto f) { return points_to_transfer(pd, prog, s, std::move(f)); }, true,
            options.check_monotone);
        auto lv = solve(
            prog, ld, [&](const Statement& s, auto f) { return ld.transfer(s, std::move(f)); }, false,
            options.check_monotone);
        fill(pd, pt, ld, lv);
        out.element_visits = pd.visits() + ld.visits();
        std::set<std::map<VarId, SetIndex>> maps;
        for (const auto* facts : {&pt.before, &pt.after})
            for (const auto& f : *facts) maps.insert(f);
        maps.erase(decltype(maps)::key_type{});
        out.distinct_maps = maps.size();
    } else {
        MultiLevelPointsTo pd(ws->pointees, ws->maps);
        auto pt = solve(
            prog, pd, [&](const Statement& s, auto f) { return points_to_transfer(pd, prog, s, std::move(f)); }, true,
            options.check_monotone);
        auto lv = solve(
            prog, ld, [&](const Statement& s, auto f) { return ld.transfer(s, std::move(f)); }, false,
            options.check_monotone);
        fill(pd, pt, ld, lv);
        out.element_visits = pd.visits() + ld.visits();
        out.distinct_maps = ws->maps.live_count() - 1;
    }
    out.merge_executions = detail::engine_merges(*ws) - merges_before;
    out.distinct_pointee_sets = ws->pointees.live_count() - 1;
    return out;
}

}  // namespace mde::pta
