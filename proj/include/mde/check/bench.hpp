#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mde/engine.hpp"
#include "mde/pta/analysis.hpp"
#include "mde/pta/generate.hpp"
#include "mde/pta/program.hpp"
#include "mde/report.hpp"
#include "mde/rng.hpp"

namespace mde::check {

struct BenchConfig {
    std::uint64_t seed = 1;
    std::optional<std::string> program_text;  // generated from the seed when absent
    EngineOptions options{};
    std::uint64_t repeat = 100;          // forced-redundancy script length
    std::uint64_t disjoint_pairs = 100;  // adversarial script length
    bool timing = false;
    pta::Backend target = pta::Backend::MultiLevel;  // run alongside naive; both engine backends when absent
    bool all_backends = true;
};

struct BackendRun {
    pta::Backend backend;
    double wall_ms = 0;
    std::uint64_t merge_executions = 0;
    std::uint64_t element_visits = 0;
    std::uint64_t distinct_pointee_sets = 0;
    std::uint64_t distinct_maps = 0;
    std::uint64_t distinct_operand_pairs = 0;
    std::optional<MetricsReport> metrics;
};

struct BenchResult {
    std::string program_name;
    std::size_t statements = 0;
    std::vector<BackendRun> runs;
    bool backends_agree = true;
    EngineMetrics forced;       // one union repeated
    EngineMetrics adversarial;  // pairwise disjoint operands, each queried once
    bool merges_within_pairs = true;
    bool fewer_visits_than_naive = true;
    bool partition_holds = true;

    [[nodiscard]] const BackendRun& run(pta::Backend b) const {
        for (const auto& r : runs)
            if (r.backend == b) return r;
        throw UsageError("backend was not run");
    }

    [[nodiscard]] bool passed() const {
        return backends_agree && merges_within_pairs && fewer_visits_than_naive && partition_holds;
    }
};

inline BenchResult run_bench(const BenchConfig& cfg) {
    BenchResult result;
    std::string text;
    if (cfg.program_text) {
        text = *cfg.program_text;
    } else {
        Rng rng(cfg.seed);
        text = pta::loop_program_text(rng);
    }
    const auto prog = pta::parse_program(text);
    result.program_name = prog.name;
    result.statements = prog.statement_count();

    std::optional<pta::AnalysisOutput> naive_out;
    std::vector<pta::Backend> backends{pta::Backend::Naive};
    if (cfg.all_backends)
        backends.insert(backends.end(), {pta::Backend::SingleLevel, pta::Backend::MultiLevel});
    else
        backends.push_back(cfg.target);
    for (auto backend : backends) {
        BackendRun run;
        run.backend = backend;
        EngineOptions options = cfg.options;
        options.track_operand_pairs = true;
        std::optional<pta::Workspace> ws;
        if (backend != pta::Backend::Naive) {
            ws.emplace(options);
            ws->symbols = prog.symbols;
        }
        const auto start = std::chrono::steady_clock::now();
        const auto out = pta::run_analyses(prog, backend, ws ? &*ws : nullptr);
        run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        run.merge_executions = out.merge_executions;
        run.element_visits = out.element_visits;
        run.distinct_pointee_sets = out.distinct_pointee_sets;
        run.distinct_maps = out.distinct_maps;
        if (ws) {
            run.distinct_operand_pairs = ws->pointees.distinct_operand_pairs() + ws->maps.distinct_operand_pairs();
            run.metrics = ws->report();
            result.partition_holds = result.partition_holds && run.metrics->partition_holds();
            result.merges_within_pairs = result.merges_within_pairs && run.merge_executions <= run.distinct_operand_pairs;
        }
        if (!naive_out) {
            naive_out = out;
        } else {
            result.backends_agree = result.backends_agree && out.points_to_after == naive_out->points_to_after &&
                                    out.points_to_before == naive_out->points_to_before &&
                                    out.live_before == naive_out->live_before && out.live_after == naive_out->live_after;
        }
        result.runs.push_back(std::move(run));
    }
    result.fewer_visits_than_naive =
        result.run(cfg.target).element_visits < result.run(pta::Backend::Naive).element_visits;

    {
        Engine<int> e(cfg.options);
        const auto a = e.register_set({1}).index;
        const auto b = e.register_set({2}).index;
        for (std::uint64_t i = 0; i < cfg.repeat; ++i) e.set_union(a, b);
        result.forced = e.metrics();
    }
    {
        Engine<int> e(cfg.options);
        for (std::uint64_t i = 0; i < cfg.disjoint_pairs; ++i) {
            const int base = static_cast<int>(2 * i);
            const auto a = e.register_set({base}).index;
            const auto b = e.register_set({base + 1}).index;
            e.set_union(a, b);
        }
        result.adversarial = e.metrics();
    }
    MetricsReport scripted;
    scripted.add("forced", result.forced);
    scripted.add("adversarial", result.adversarial);
    result.partition_holds = result.partition_holds && scripted.partition_holds();
    return result;
}

inline nlohmann::json bench_json(const BenchResult& r, bool timing) {
    nlohmann::json backends = nlohmann::json::object();
    for (const auto& run : r.runs) {
        nlohmann::json j = {
            {"merge_executions", run.merge_executions},
            {"element_visits", run.element_visits},
            {"distinct_pointee_sets", run.distinct_pointee_sets},
            {"distinct_maps", run.distinct_maps},
        };
        if (run.metrics) {
            j["distinct_operand_pairs"] = run.distinct_operand_pairs;
            j["metrics"] = metrics_json(*run.metrics);
        }
        if (timing) j["wall_ms"] = run.wall_ms;
        backends[std::string(pta::backend_name(run.backend))] = std::move(j);
    }
    auto ratio = [](const EngineMetrics& m) {
        auto v = m.at(OpKind::Union).hit_ratio();
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    const auto adversarial_ratio = r.adversarial.at(OpKind::Union).hit_ratio().value_or(0.0);
    return {
        {"program", {{"name", r.program_name}, {"statements", r.statements}}},
        {"backends", std::move(backends)},
        {"forced_redundancy",
         {{"repeats", r.forced.at(OpKind::Union).total_queries()}, {"hit_ratio", ratio(r.forced)}}},
        {"adversarial",
         {{"queries", r.adversarial.at(OpKind::Union).total_queries()},
          {"hit_ratio", ratio(r.adversarial)},
          {"low_redundancy", adversarial_ratio < 0.5}}},
        {"checks",
         {{"backends_agree", r.backends_agree},
          {"merges_within_operand_pairs", r.merges_within_pairs},
          {"fewer_element_visits_than_naive", r.fewer_visits_than_naive},
          {"metrics_partition", r.partition_holds}}},
    };
}

}  // namespace mde::check
