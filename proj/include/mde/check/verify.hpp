#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mde/engine.hpp"
#include "mde/metrics.hpp"
#include "mde/nested_engine.hpp"
#include "mde/pta/analysis.hpp"
#include "mde/pta/generate.hpp"
#include "mde/pta/program.hpp"
#include "mde/rng.hpp"

namespace mde::check {

struct VerifyConfig {
    std::uint64_t seed = 1;
    std::size_t trials = 10000;
    std::size_t programs = 200;
    EngineOptions options{};
    std::vector<pta::Backend> backends{pta::Backend::SingleLevel, pta::Backend::MultiLevel};  // compared with naive
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::size_t cases = 0;
    std::string detail;  // first failure, minimized where possible
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    MetricsReport metrics;

    [[nodiscard]] bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

/// Greedy one-at-a-time deletion: drops every item whose removal keeps
/// `fails` true, until no single deletion does.
template <class T, class Fails>
std::vector<T> minimize(std::vector<T> items, Fails fails) {
    for (bool shrunk = true; shrunk;) {
        shrunk = false;
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto candidate = items;
            candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
            if (fails(candidate)) {
                items = std::move(candidate);
                shrunk = true;
                --i;
            }
        }
    }
    return items;
}

namespace detail {

using Plain = std::set<int>;

inline Plain plain_apply(OpKind op, const Plain& a, const Plain& b) {
    Plain out;
    switch (op) {
        case OpKind::Union: std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end())); break;
        case OpKind::Intersection:
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
        case OpKind::Difference:
            std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
    }
    return out;
}

inline bool plain_subset(const Plain& a, const Plain& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

inline std::string show(const Plain& s) {
    std::string out = "{";
    for (auto v : s) out += (out.size() > 1 ? "," : "") + std::to_string(v);
    return out + "}";
}

/// One fuzz step, by content so that steps stay meaningful after deletion.
struct FlatStep {
    OpKind op;
    Plain lhs, rhs;
    int probe;
};

inline Plain random_plain(Rng& rng, int universe) {
    Plain s;
    const auto density = rng.between(1, 4);
    for (int i = 0; i < universe; ++i)
        if (rng.chance(1, density + 1)) s.insert(i);
    return s;
}

template <class E>
Plain contents(const E& e, SetIndex i) {
    auto v = e.resolve(i);
    return {v.begin(), v.end()};
}

/// Replays `steps` on a fresh engine; returns a description of the first
/// disagreement with the plain-set oracle, or an empty string.
inline std::string replay_flat(const std::vector<FlatStep>& steps, const EngineOptions& options,
                               EngineMetrics* metrics = nullptr) {
    Engine<int> e(options);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        const auto a = e.register_set({s.lhs.begin(), s.lhs.end()}).index;
        const auto b = e.register_set({s.rhs.begin(), s.rhs.end()}).index;
        const auto r = e.operate(s.op, a, b);
        const auto want = plain_apply(s.op, s.lhs, s.rhs);
        std::ostringstream msg;
        if (contents(e, r) != want) {
            msg << "step " << i << ": " << op_name(s.op) << "(" << show(s.lhs) << ", " << show(s.rhs) << ") gave "
                << show(contents(e, r)) << ", expected " << show(want);
            return msg.str();
        }
        if (e.is_subset(a, b) != plain_subset(s.lhs, s.rhs)) {
            msg << "step " << i << ": is_subset(" << show(s.lhs) << ", " << show(s.rhs) << ") is wrong";
            return msg.str();
        }
        if (e.contains(a, s.probe) != s.lhs.contains(s.probe)) {
            msg << "step " << i << ": contains(" << show(s.lhs) << ", " << s.probe << ") is wrong";
            return msg.str();
        }
    }
    for (const auto& entry : e.subset_entries()) {
        const auto sa = contents(e, entry.a), sb = contents(e, entry.b);
        if (entry.a_subset_of_b ? !plain_subset(sa, sb) : !plain_subset(sb, sa))
            return "subset map entry (" + std::to_string(entry.a.value()) + ", " + std::to_string(entry.b.value()) +
                   ") is false";
    }
    if (metrics) *metrics = e.metrics();
    return {};
}

inline std::string show_script(const std::vector<FlatStep>& steps) {
    std::string out;
    for (const auto& s : steps)
        out += std::string(op_name(s.op)) + " " + show(s.lhs) + " " + show(s.rhs) + " probe " +
               std::to_string(s.probe) + "\n";
    return out;
}

using FlatMap = std::map<int, Plain>;
using Pairs = std::set<std::pair<int, int>>;

inline Pairs pairs_of(const FlatMap& m) {
    Pairs out;
    for (const auto& [k, s] : m)
        for (auto v : s) out.emplace(k, v);
    return out;
}

template <class Set>
Set pair_apply(OpKind op, const Set& a, const Set& b) {
    Set out;
    switch (op) {
        case OpKind::Union: std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end())); break;
        case OpKind::Intersection:
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
        case OpKind::Difference:
            std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
    }
    return out;
}

using IntMaps = NestedEngine<int, Engine<int>>;

inline SetIndex build_map(IntMaps& m, const FlatMap& map) {
    IntMaps::Set set;
    for (const auto& [k, v] : map) set.push_back({k, {m.child<0>().register_set({v.begin(), v.end()}).index}});
    return m.register_set(std::move(set)).index;
}

inline Pairs flat_of(const IntMaps& m, SetIndex i) {
    auto v = m.flatten(i);
    return {v.begin(), v.end()};
}

/// Checks the flattening law for one (op, a, b); empty string when it holds.
inline std::string check_nested(IntMaps& m, OpKind op, const FlatMap& a, const FlatMap& b) {
    const auto ia = build_map(m, a), ib = build_map(m, b);
    const auto r = m.operate(op, ia, ib);
    const auto fa = pairs_of(a), fb = pairs_of(b);
    if (flat_of(m, r) != pair_apply(op, fa, fb))
        return std::string(op_name(op)) + " of maps " + std::to_string(ia.value()) + " and " +
               std::to_string(ib.value()) + " breaks the flattening law";
    if (m.is_subset(ia, ib) != std::includes(fb.begin(), fb.end(), fa.begin(), fa.end()))
        return "is_subset of maps " + std::to_string(ia.value()) + " and " + std::to_string(ib.value()) + " is wrong";
    return {};
}

inline void accumulate(MetricsReport& report, const std::string& name, const EngineMetrics& m) {
    auto merged = report.engines().contains(name) ? report.engines().at(name) : EngineMetrics{};
    for (auto op : kAllOps) merged.at(op) += m.at(op);
    report.add(name, merged);
}

inline bool same_facts(const pta::AnalysisOutput& a, const pta::AnalysisOutput& b) {
    return a.points_to_before == b.points_to_before && a.points_to_after == b.points_to_after &&
           a.points_to_block_entry == b.points_to_block_entry && a.points_to_block_exit == b.points_to_block_exit &&
           a.live_before == b.live_before && a.live_after == b.live_after &&
           a.live_block_entry == b.live_block_entry && a.live_block_exit == b.live_block_exit;
}

/// Empty string when all backends agree on `text` and iteration was monotone.
inline std::string check_program(const std::string& text, const EngineOptions& options, MetricsReport* metrics,
                                 const std::vector<pta::Backend>& backends = {pta::Backend::SingleLevel,
                                                                             pta::Backend::MultiLevel}) {
    pta::Program prog;
    try {
        prog = pta::parse_program(text);
    } catch (const pta::ParseError& e) {
        return std::string("does not parse: ") + e.what();
    }
    const auto naive = pta::run_analyses(prog, pta::Backend::Naive, nullptr, {.check_monotone = true});
    for (auto backend : backends) {
        pta::Workspace ws(options);
        ws.symbols = prog.symbols;
        const auto out = pta::run_analyses(prog, backend, &ws, {.check_monotone = true});
        if (!same_facts(naive, out))
            return std::string(pta::backend_name(backend)) + " disagrees with the naive backend";
        if (out.monotonicity_violations != 0) return std::string(pta::backend_name(backend)) + " is not monotone";
        if (metrics)
            for (const auto& [name, m] : ws.report().engines()) accumulate(*metrics, name, m);
    }
    if (naive.monotonicity_violations != 0) return "naive backend is not monotone";
    return {};
}

inline std::string minimize_program(const std::string& text, const EngineOptions& options) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    auto join = [](const std::vector<std::string>& ls) {
        std::string out;
        for (const auto& l : ls) out += l + "\n";
        return out;
    };
    auto is_statement = [](const std::string& l) {
        const auto t = l.find_first_not_of(' ');
        if (t == std::string::npos) return false;
        for (const char* kw : {"func", "var", "block", "end", "goto"})
            if (l.compare(t, std::string(kw).size(), kw) == 0) return false;
        return true;
    };
    for (bool shrunk = true; shrunk;) {
        shrunk = false;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (!is_statement(lines[i])) continue;
            auto candidate = lines;
            candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
            const auto why = check_program(join(candidate), options, nullptr);
            if (!why.empty() && why.rfind("does not parse", 0) != 0) {
                lines = std::move(candidate);
                shrunk = true;
                --i;
            }
        }
    }
    return join(lines);
}

}  // namespace detail

/// Seeded property runs against plain-set oracles. Each check stops at its
/// first failure and reports a minimized reproduction.
inline VerifyReport run_verify(const VerifyConfig& cfg) {
    using namespace detail;
    VerifyReport report;
    Rng rng(cfg.seed);

    {
        CheckResult c{"flat_fuzz", true, 0, {}};
        std::vector<FlatStep> steps;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            steps.push_back({kAllOps[rng.below(3)], random_plain(rng, 12), random_plain(rng, 12),
                             static_cast<int>(rng.below(13))});
        }
        c.cases = steps.size();
        EngineMetrics m;
        if (auto why = replay_flat(steps, cfg.options, &m); !why.empty()) {
            c.passed = false;
            auto small = minimize(steps, [&](const auto& s) { return !replay_flat(s, cfg.options).empty(); });
            c.detail = replay_flat(small, cfg.options) + "\n" + show_script(small);
        } else {
            accumulate(report.metrics, "flat_fuzz", m);
        }
        report.checks.push_back(std::move(c));
    }

    {
        CheckResult c{"flat_exhaustive", true, 0, {}};
        Engine<int> e(cfg.options);
        std::vector<Plain> all;
        std::vector<SetIndex> idx;
        for (int mask = 0; mask < 32; ++mask) {
            Plain s;
            for (int i = 0; i < 5; ++i)
                if (mask & (1 << i)) s.insert(i);
            idx.push_back(e.register_set({s.begin(), s.end()}).index);
            all.push_back(std::move(s));
        }
        for (std::size_t i = 0; i < all.size() && c.passed; ++i) {
            for (std::size_t j = 0; j < all.size() && c.passed; ++j) {
                for (auto op : kAllOps) {
                    ++c.cases;
                    if (contents(e, e.operate(op, idx[i], idx[j])) != plain_apply(op, all[i], all[j])) {
                        c.passed = false;
                        c.detail = std::string(op_name(op)) + "(" + show(all[i]) + ", " + show(all[j]) + ")";
                    }
                }
                ++c.cases;
                if (e.is_subset(idx[i], idx[j]) != plain_subset(all[i], all[j])) {
                    c.passed = false;
                    c.detail = "is_subset(" + show(all[i]) + ", " + show(all[j]) + ")";
                }
            }
            for (int p = 0; p < 6; ++p) {
                ++c.cases;
                if (e.contains(idx[i], p) != all[i].contains(p)) {
                    c.passed = false;
                    c.detail = "contains(" + show(all[i]) + ", " + std::to_string(p) + ")";
                }
            }
        }
        accumulate(report.metrics, "flat_exhaustive", e.metrics());
        report.checks.push_back(std::move(c));
    }

    {
        CheckResult c{"memo_replay", true, 0, {}};
        Engine<int> e(cfg.options);
        std::vector<std::tuple<OpKind, SetIndex, SetIndex>> script;
        for (std::size_t t = 0; t < std::min<std::size_t>(cfg.trials, 2000); ++t) {
            const auto a = random_plain(rng, 10), b = random_plain(rng, 10);
            script.emplace_back(kAllOps[rng.below(3)], e.register_set({a.begin(), a.end()}).index,
                                e.register_set({b.begin(), b.end()}).index);
        }
        std::vector<SetIndex> first, second;
        for (auto [op, a, b] : script) first.push_back(e.operate(op, a, b));
        const auto merges = e.metrics().merge_executions();
        for (auto [op, a, b] : script) second.push_back(e.operate(op, a, b));
        c.cases = script.size();
        if (first != second) {
            c.passed = false;
            c.detail = "replayed script produced a different index trace";
        } else if (e.metrics().merge_executions() != merges) {
            c.passed = false;
            c.detail = "replayed script ran " + std::to_string(e.metrics().merge_executions() - merges) + " merges";
        }
        accumulate(report.metrics, "memo_replay", e.metrics());
        report.checks.push_back(std::move(c));
    }

    {
        CheckResult c{"nested_exhaustive", true, 0, {}};
        Engine<int> child(cfg.options);
        IntMaps m(cfg.options, child);
        std::vector<FlatMap> maps;
        for (int code = 0; code < 8 * 8 * 8; ++code) {
            FlatMap map;
            for (int key = 0, rest = code; key < 3; ++key, rest /= 8) {
                Plain s;
                for (int i = 0; i < 3; ++i)
                    if ((rest % 8) & (1 << i)) s.insert(i);
                if (!s.empty()) map[key] = s;
            }
            maps.push_back(std::move(map));
        }
        for (std::size_t a = 0; a < maps.size() && c.passed; ++a) {
            for (std::size_t b = 0; b < maps.size() && c.passed; ++b) {
                for (auto op : kAllOps) {
                    ++c.cases;
                    if (auto why = check_nested(m, op, maps[a], maps[b]); !why.empty()) {
                        c.passed = false;
                        c.detail = why;
                        break;
                    }
                }
            }
        }
        accumulate(report.metrics, "nested_exhaustive.points_to_maps", m.metrics());
        accumulate(report.metrics, "nested_exhaustive.pointee_sets", child.metrics());
        report.checks.push_back(std::move(c));
    }

    {
        CheckResult c{"nested_fuzz", true, 0, {}};
        Engine<int> child(cfg.options);
        IntMaps m(cfg.options, child);
        auto random_map = [&] {
            FlatMap map;
            for (int k = 0; k < 8; ++k) {
                auto s = random_plain(rng, 8);
                if (!s.empty() && rng.chance(1, 2)) map[k] = s;
            }
            return map;
        };
        for (std::size_t t = 0; t < cfg.trials && c.passed; ++t) {
            ++c.cases;
            const auto a = random_map(), b = random_map();
            if (auto why = check_nested(m, kAllOps[rng.below(3)], a, b); !why.empty()) {
                c.passed = false;
                c.detail = why;
            }
        }
        for (const auto& entry : m.subset_entries()) {
            const auto fa = flat_of(m, entry.a), fb = flat_of(m, entry.b);
            const bool holds = entry.a_subset_of_b ? std::includes(fb.begin(), fb.end(), fa.begin(), fa.end())
                                                   : std::includes(fa.begin(), fa.end(), fb.begin(), fb.end());
            if (!holds) {
                c.passed = false;
                c.detail = "subset map entry (" + std::to_string(entry.a.value()) + ", " +
                           std::to_string(entry.b.value()) + ") is false";
                break;
            }
        }
        accumulate(report.metrics, "nested_fuzz.points_to_maps", m.metrics());
        accumulate(report.metrics, "nested_fuzz.pointee_sets", child.metrics());
        report.checks.push_back(std::move(c));
    }

    {
        CheckResult c{"analysis_equivalence", true, 0, {}};
        for (std::size_t t = 0; t < cfg.programs && c.passed; ++t) {
            ++c.cases;
            const auto text = pta::random_program_text(rng);
            if (auto why = check_program(text, cfg.options, &report.metrics, cfg.backends); !why.empty()) {
                c.passed = false;
                c.detail = why + "\n" + minimize_program(text, cfg.options);
            }
        }
        report.checks.push_back(std::move(c));
    }

    CheckResult partition{"metrics_partition", report.metrics.partition_holds(), report.metrics.engines().size(), {}};
    if (!partition.passed) partition.detail = "a counter partition does not add up";
    report.checks.push_back(std::move(partition));
    return report;
}

}  // namespace mde::check
