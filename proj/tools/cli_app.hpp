#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mde/check/bench.hpp"
#include "mde/check/verify.hpp"
#include "mde/demo.hpp"
#include "mde/persistence.hpp"
#include "mde/pta/analysis.hpp"
#include "mde/pta/footprint.hpp"
#include "mde/pta/program.hpp"
#include "mde/report.hpp"

namespace mde::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kIo = 3 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string program;
    std::string backend;
    std::uint64_t seed = 1;
    std::string out;
    bool pretty = false;
    std::size_t trials = 10000;
    std::size_t programs = 200;
    std::string state_in;
    std::string state_out;
    bool no_subset_shortcuts = false;
    std::size_t contains_threshold = 16;
    std::string demo;
    std::uint64_t repeat = 1;
    std::vector<std::size_t> points;
    bool timing = false;
    std::string emit_program;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

class Runner {
public:
    Runner(const Options& o, std::ostream& out) : o_(o), out_(out) {}

    [[nodiscard]] EngineOptions engine_options() const {
        return {.contains_linear_threshold = o_.contains_threshold, .subset_shortcuts = !o_.no_subset_shortcuts};
    }

    void emit(const nlohmann::json& doc, const std::string& text_form) {
        const std::string body = o_.pretty ? text_form : to_canonical_string(doc);
        if (o_.out.empty())
            out_ << body;
        else
            write_file(o_.out, body);
    }

    // -- analyze ---------------------------------------------------------

    /// Selected backend, or `fallback` when --backend was not given.
    [[nodiscard]] pta::Backend backend_or(pta::Backend fallback) const {
        if (o_.backend.empty()) return fallback;
        const auto b = pta::parse_backend(o_.backend);
        if (!b) throw UsageError("unknown backend '" + o_.backend + "' (expected naive, single-level or multi-level)");
        return *b;
    }

    /// Demos and snapshots exist only for engine backends.
    void require_engines(const char* what) const {
        if (backend_or(pta::Backend::MultiLevel) == pta::Backend::Naive)
            throw UsageError(std::string(what) + " needs an engine backend; the naive backend keeps no engine state");
        if (o_.demo == "nested" && backend_or(pta::Backend::MultiLevel) != pta::Backend::MultiLevel)
            throw UsageError("the nested example needs the multi-level backend");
    }

    int analyze() {
        const auto backend = backend_or(pta::Backend::MultiLevel);
        if (backend == pta::Backend::Naive && (!o_.state_in.empty() || !o_.state_out.empty()))
            throw UsageError("the naive backend keeps no engine state to load or dump");

        const std::string text = read_file(o_.program);
        std::optional<pta::Workspace> ws;
        if (backend != pta::Backend::Naive) {
            ws.emplace(engine_options());
            if (!o_.state_in.empty()) load_workspace(*ws);
        }
        const auto prog = pta::parse_program(text, ws ? ws->symbols : pta::SymbolTable{});
        if (ws) ws->symbols = prog.symbols;
        const auto result = pta::run_analyses(prog, backend, ws ? &*ws : nullptr);
        if (ws && !o_.state_out.empty()) dump_workspace(*ws);

        for (auto p : o_.points)
            if (p == 0 || p > prog.statement_count())
                throw UsageError("point " + std::to_string(p) + " is out of range");
        const auto footprint = pta::footprint_report(result.points_to_after, o_.points);
        auto doc = analysis_json(prog, result, footprint);
        doc["metrics"] = ws ? metrics_json(ws->report()) : nlohmann::json::object();
        emit(doc, analysis_text(prog, result, footprint));
        return kOk;
    }

    // -- demo ------------------------------------------------------------

    int demo() {
        require_engines("demo");
        if (o_.repeat == 0) throw UsageError("--repeat must be at least 1");
        nlohmann::json runs = nlohmann::json::array();
        nlohmann::json doc;
        std::string text;
        if (o_.demo == "basic") {
            demo::NameSets sets(engine_options());
            if (!o_.state_in.empty()) load_basic(sets);
            for (std::uint64_t i = 0; i < o_.repeat; ++i) {
                const auto before = sets.metrics();
                const auto r = demo::run_basic(sets);
                runs.push_back(run_json(r, {{"sets", before}}, {{"sets", sets.metrics()}}));
            }
            if (!o_.state_out.empty()) write_file(o_.state_out, to_canonical_string(basic_snapshot(sets)));
            MetricsReport report;
            report.add("sets", sets.metrics());
            doc = {{"demo", "basic"}, {"engines", {{"sets", demo::describe(sets)}}}, {"metrics", metrics_json(report)}};
            text = "sets\n" + describe_text(sets);
        } else if (o_.demo == "nested") {
            demo::NameSets pointees(engine_options());
            demo::NameMaps maps(engine_options(), pointees);
            if (!o_.state_in.empty()) load_nested(pointees, maps);
            for (std::uint64_t i = 0; i < o_.repeat; ++i) {
                const auto b1 = pointees.metrics(), b2 = maps.metrics();
                const auto r = demo::run_nested(pointees, maps);
                runs.push_back(run_json(r, {{"pointee_sets", b1}, {"points_to_maps", b2}},
                                        {{"pointee_sets", pointees.metrics()}, {"points_to_maps", maps.metrics()}}));
            }
            if (!o_.state_out.empty())
                write_file(o_.state_out, to_canonical_string(nested_snapshot(pointees, maps)));
            MetricsReport report;
            report.add("pointee_sets", pointees.metrics());
            report.add("points_to_maps", maps.metrics());
            doc = {{"demo", "nested"},
                   {"engines", {{"pointee_sets", demo::describe(pointees)}, {"points_to_maps", demo::describe(maps)}}},
                   {"metrics", metrics_json(report)}};
            text = "pointee_sets\n" + describe_text(pointees) + "points_to_maps\n" + describe_text(maps);
        } else {
            throw UsageError("unknown demo '" + o_.demo + "' (expected basic or nested)");
        }
        doc["runs"] = runs;
        for (std::size_t i = 0; i < runs.size(); ++i)
            text += "run " + std::to_string(i + 1) + ": result " + runs[i]["result"].dump() + ", merges " +
                    runs[i]["merge_executions"].dump() + ", cold misses " + runs[i]["cold_misses"].dump() + "\n";
        emit(doc, text);
        return kOk;
    }

    // -- verify ----------------------------------------------------------

    int verify() {
        check::VerifyConfig cfg{o_.seed, o_.trials, o_.programs, engine_options()};
        if (!o_.backend.empty()) {
            const auto b = backend_or(pta::Backend::MultiLevel);
            if (b == pta::Backend::Naive) throw UsageError("verify compares engine backends against naive; pick one");
            cfg.backends = {b};
        }
        const auto report = check::run_verify(cfg);
        nlohmann::json checks = nlohmann::json::array();
        std::string text;
        for (const auto& c : report.checks) {
            nlohmann::json j = {{"name", c.name}, {"passed", c.passed}, {"cases", c.cases}};
            if (!c.passed) j["counterexample"] = c.detail;
            checks.push_back(std::move(j));
            text += std::string(c.passed ? "ok   " : "FAIL ") + c.name + " (" + std::to_string(c.cases) + " cases)\n";
            if (!c.passed) text += c.detail + "\n";
        }
        const nlohmann::json doc = {{"seed", o_.seed},
                                    {"subset_shortcuts", !o_.no_subset_shortcuts},
                                    {"passed", report.passed()},
                                    {"checks", std::move(checks)},
                                    {"metrics", metrics_json(report.metrics)}};
        emit(doc, text);
        return report.passed() ? kOk : kFailed;
    }

    // -- bench -----------------------------------------------------------

    int bench() {
        check::BenchConfig cfg;
        cfg.seed = o_.seed;
        cfg.options = engine_options();
        cfg.timing = o_.timing;
        if (!o_.backend.empty()) {
            cfg.target = backend_or(pta::Backend::MultiLevel);
            if (cfg.target == pta::Backend::Naive) throw UsageError("bench compares an engine backend against naive; pick one");
            cfg.all_backends = false;
        }
        if (!o_.program.empty()) cfg.program_text = read_file(o_.program);
        if (!o_.emit_program.empty()) {
            Rng rng(o_.seed);
            write_file(o_.emit_program, pta::loop_program_text(rng));
        }
        const auto r = check::run_bench(cfg);
        auto doc = check::bench_json(r, o_.timing);
        doc["seed"] = o_.seed;
        std::ostringstream text;
        text << "program " << r.program_name << " (" << r.statements << " statements)\n";
        text << std::left << std::setw(14) << "backend" << std::setw(18) << "merge_executions" << std::setw(16)
             << "element_visits" << std::setw(14) << "pointee_sets" << "maps\n";
        for (const auto& run : r.runs) {
            text << std::setw(14) << pta::backend_name(run.backend) << std::setw(18) << run.merge_executions
                 << std::setw(16) << run.element_visits << std::setw(14) << run.distinct_pointee_sets
                 << run.distinct_maps << "\n";
        }
        text << "forced redundancy hit ratio " << doc["forced_redundancy"]["hit_ratio"].dump() << "\n";
        text << "adversarial hit ratio " << doc["adversarial"]["hit_ratio"].dump()
             << (doc["adversarial"]["low_redundancy"].get<bool>() ? " (low redundancy)" : "") << "\n";
        for (const auto& [k, v] : doc["checks"].items()) text << (v.get<bool>() ? "ok   " : "FAIL ") << k << "\n";
        emit(doc, text.str());
        return r.passed() ? kOk : kFailed;
    }

    // -- snapshots -------------------------------------------------------

    int dump_state() {
        if (o_.state_out.empty()) throw UsageError("dump-state needs --state-out");
        require_engines("dump-state");
        std::string doc;
        if (o_.demo == "basic") {
            demo::NameSets sets(engine_options());
            demo::run_basic(sets);
            doc = to_canonical_string(basic_snapshot(sets));
        } else if (o_.demo == "nested") {
            demo::NameSets pointees(engine_options());
            demo::NameMaps maps(engine_options(), pointees);
            demo::run_nested(pointees, maps);
            doc = to_canonical_string(nested_snapshot(pointees, maps));
        } else if (o_.demo.empty()) {
            pta::Workspace ws(engine_options());
            if (!o_.program.empty()) {
                const auto prog = pta::parse_program(read_file(o_.program));
                ws.symbols = prog.symbols;
                pta::run_analyses(prog, backend_or(pta::Backend::MultiLevel), &ws);
            }
            doc = to_canonical_string(workspace_snapshot(ws));
        } else {
            throw UsageError("unknown demo '" + o_.demo + "'");
        }
        write_file(o_.state_out, doc);
        emit({{"written", o_.state_out}}, "wrote " + o_.state_out + "\n");
        return kOk;
    }

    int load_state() {
        if (o_.state_in.empty()) throw UsageError("load-state needs --state-in");
        require_engines("load-state");
        nlohmann::json doc;
        if (o_.demo == "basic") {
            demo::NameSets sets(engine_options());
            load_basic(sets);
            if (!o_.state_out.empty()) write_file(o_.state_out, to_canonical_string(basic_snapshot(sets)));
            MetricsReport report;
            report.add("sets", sets.metrics());
            doc = {{"live_sets", {{"sets", sets.live_count()}}}, {"metrics", metrics_json(report)}};
        } else if (o_.demo == "nested") {
            demo::NameSets pointees(engine_options());
            demo::NameMaps maps(engine_options(), pointees);
            load_nested(pointees, maps);
            if (!o_.state_out.empty())
                write_file(o_.state_out, to_canonical_string(nested_snapshot(pointees, maps)));
            MetricsReport report;
            report.add("pointee_sets", pointees.metrics());
            report.add("points_to_maps", maps.metrics());
            doc = {{"live_sets", {{"pointee_sets", pointees.live_count()}, {"points_to_maps", maps.live_count()}}},
                   {"metrics", metrics_json(report)}};
        } else if (o_.demo.empty()) {
            pta::Workspace ws(engine_options());
            load_workspace(ws);
            if (!o_.program.empty()) {
                const auto prog = pta::parse_program(read_file(o_.program), ws.symbols);
                ws.symbols = prog.symbols;
                pta::run_analyses(prog, backend_or(pta::Backend::MultiLevel), &ws);
            }
            if (!o_.state_out.empty()) dump_workspace(ws);
            doc = {{"live_sets", {{"pointee_sets", ws.pointees.live_count()}, {"points_to_maps", ws.maps.live_count()}}},
                   {"metrics", metrics_json(ws.report())}};
        } else {
            throw UsageError("unknown demo '" + o_.demo + "'");
        }
        emit(doc, doc.dump(2) + "\n");
        return kOk;
    }

private:
    static nlohmann::json load_json(const std::string& path) {
        const auto text = read_file(path);
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw LoadError(path + ": " + e.what());
        }
    }

    static nlohmann::json basic_snapshot(demo::NameSets& sets) {
        return serialize(snapshot_node("sets", sets, StringCodec{}));
    }
    static nlohmann::json nested_snapshot(demo::NameSets& p, demo::NameMaps& m) {
        return serialize(snapshot_node("pointee_sets", p, StringCodec{}), snapshot_node("points_to_maps", m, StringCodec{}));
    }
    static nlohmann::json workspace_snapshot(pta::Workspace& ws) {
        return serialize(snapshot_node("pointee_sets", ws.pointees, pta::VarCodec{&ws.symbols}),
                         snapshot_node("points_to_maps", ws.maps, pta::VarCodec{&ws.symbols}));
    }

    void load_basic(demo::NameSets& sets) const {
        deserialize(load_json(o_.state_in), snapshot_node("sets", sets, StringCodec{}));
    }
    void load_nested(demo::NameSets& p, demo::NameMaps& m) const {
        deserialize(load_json(o_.state_in), snapshot_node("pointee_sets", p, StringCodec{}),
                    snapshot_node("points_to_maps", m, StringCodec{}));
    }
    void load_workspace(pta::Workspace& ws) const {
        deserialize(load_json(o_.state_in), snapshot_node("pointee_sets", ws.pointees, pta::VarCodec{&ws.symbols}),
                    snapshot_node("points_to_maps", ws.maps, pta::VarCodec{&ws.symbols}));
    }
    void dump_workspace(pta::Workspace& ws) const { write_file(o_.state_out, to_canonical_string(workspace_snapshot(ws))); }

    static nlohmann::json run_json(SetIndex result, const std::map<std::string, EngineMetrics>& before,
                                   const std::map<std::string, EngineMetrics>& after) {
        std::uint64_t merges = 0, cold = 0, queries = 0, hits = 0;
        for (const auto& [name, m] : after) {
            const auto& b = before.at(name);
            merges += m.merge_executions() - b.merge_executions();
            for (auto op : kAllOps) {
                cold += m.at(op).cold_misses - b.at(op).cold_misses;
                queries += m.at(op).total_queries() - b.at(op).total_queries();
                hits += (m.at(op).total_queries() - m.at(op).misses()) - (b.at(op).total_queries() - b.at(op).misses());
            }
        }
        return {{"result", result.value()}, {"merge_executions", merges}, {"cold_misses", cold},
                {"queries", queries},       {"hits", hits}};
    }

    template <class E>
    static std::string describe_text(const E& e) {
        const nlohmann::json d = demo::describe(e);
        std::string out = "  storage\n";
        for (std::size_t i = 0; i < d["storage"].size(); ++i) {
            const auto& s = d["storage"][i];
            out += "    " + std::to_string(i) + ": ";
            if (s.is_null()) {
                out += "(evicted)\n";
                continue;
            }
            std::string body;
            for (const auto& e : s) {
                if (!body.empty()) body += ", ";
                body += e.is_array() ? e[0].get<std::string>() + " -> " + e[1].dump() : e.get<std::string>();
            }
            out += "{" + body + "}\n";
        }
        for (const auto& [op, entries] : d["memo"].items()) {
            if (entries.empty()) continue;
            out += "  " + op + " memo\n";
            for (const auto& m : entries)
                out += "    (" + m[0].dump() + ", " + m[1].dump() + ") -> " + m[2].dump() + "\n";
        }
        if (!d["subset"].empty()) {
            out += "  subset map\n";
            for (const auto& s : d["subset"])
                out += "    (" + s[0].dump() + ", " + s[1].dump() + ") -> " + s[2].dump() + "\n";
        }
        return out;
    }

    static nlohmann::json pairs_json(const pta::Program& p, const pta::PointsToPairs& pairs) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : pairs) j[p.symbols.name(k)].push_back(p.symbols.name(v));
        for (auto& [k, v] : j.items()) std::sort(v.begin(), v.end());
        return j;
    }

    static nlohmann::json vars_json(const pta::Program& p, const pta::VarList& vars) {
        std::vector<std::string> names;
        for (auto v : vars) names.push_back(p.symbols.name(v));
        std::sort(names.begin(), names.end());
        return names;
    }

    nlohmann::json analysis_json(const pta::Program& p, const pta::AnalysisOutput& r,
                                 const pta::FootprintReport& f) const {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& b : p.blocks) {
            for (std::size_t i = 0; i < b.statements.size(); ++i) {
                const std::size_t g = b.first_statement + i;
                points.push_back({{"point", g + 1},
                                  {"line", b.statements[i].line},
                                  {"block", b.label},
                                  {"points_to_in", pairs_json(p, r.points_to_before[g])},
                                  {"points_to_out", pairs_json(p, r.points_to_after[g])},
                                  {"live_in", vars_json(p, r.live_before[g])},
                                  {"live_out", vars_json(p, r.live_after[g])}});
            }
        }
        nlohmann::json blocks = nlohmann::json::array();
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            blocks.push_back({{"label", p.blocks[b].label},
                              {"points_to_entry", pairs_json(p, r.points_to_block_entry[b])},
                              {"points_to_exit", pairs_json(p, r.points_to_block_exit[b])},
                              {"live_entry", vars_json(p, r.live_block_entry[b])},
                              {"live_exit", vars_json(p, r.live_block_exit[b])}});
        }
        return {
            {"program", p.name},
            {"backend", pta::backend_name(r.backend)},
            {"points", std::move(points)},
            {"blocks", std::move(blocks)},
            {"passes", {{"points_to", r.points_to_passes}, {"liveness", r.liveness_passes}}},
            {"footprint",
             {{"model", "unit count: one unit per node, edge or reference"},
              {"points", f.points},
              {"flat_per_point", f.flat_per_point},
              {"flat_total", f.flat_total},
              {"single_level_per_point", f.single_level_per_point},
              {"single_level_total", f.single_level_total},
              {"multi_level_total", f.multi_level_total},
              {"distinct_pointee_sets", f.distinct_pointee_sets},
              {"distinct_maps", f.distinct_maps}}},
            {"instrumentation",
             {{"merge_executions", r.merge_executions},
              {"element_visits", r.element_visits},
              {"distinct_pointee_sets", r.distinct_pointee_sets},
              {"distinct_maps", r.distinct_maps}}},
        };
    }

    std::string analysis_text(const pta::Program& p, const pta::AnalysisOutput& r,
                              const pta::FootprintReport& f) const {
        std::ostringstream out;
        out << "func " << p.name << " (" << pta::backend_name(r.backend) << ")\n";
        auto map_text = [&](const pta::PointsToPairs& pairs) {
            std::string s;
            const auto j = pairs_json(p, pairs);
            for (const auto& [k, v] : j.items()) {
                if (!s.empty()) s += ", ";
                std::string vs;
                for (const auto& x : v) vs += (vs.empty() ? "" : ",") + x.get<std::string>();
                s += k + "->{" + vs + "}";
            }
            return "{" + s + "}";
        };
        auto vars_text = [&](const pta::VarList& vars) {
            std::string s;
            for (const auto& x : vars_json(p, vars)) s += (s.empty() ? "" : ",") + x.get<std::string>();
            return "{" + s + "}";
        };
        for (const auto& b : p.blocks) {
            out << "block " << b.label << "\n";
            for (std::size_t i = 0; i < b.statements.size(); ++i) {
                const std::size_t g = b.first_statement + i;
                out << "  " << std::setw(3) << g + 1 << "  out " << map_text(r.points_to_after[g]) << "  live-in "
                    << vars_text(r.live_before[g]) << "\n";
            }
        }
        out << "footprint over " << f.points.size() << " point(s): flat " << f.flat_total << ", single-level "
            << f.single_level_total << ", multi-level " << f.multi_level_total << "\n";
        return out.str();
    }

    const Options& o_;
    std::ostream& out_;
};

/// Full command line entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Multi-level deduplication engine: analyses, worked examples, verification and benchmarks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--backend", o.backend, "naive | single-level | multi-level");
        sub->add_option("--out", o.out, "Write the report to this file instead of stdout");
        sub->add_flag("--pretty", o.pretty, "Human-readable text instead of JSON");
        sub->add_flag("--no-subset-shortcuts", o.no_subset_shortcuts, "Disable subset-map short circuits");
        sub->add_option("--contains-threshold", o.contains_threshold,
                        "Largest set searched linearly by contains (binary search above)");
    };

    auto* analyze = app.add_subcommand("analyze", "Points-to and liveness analysis of a program file");
    analyze->add_option("program", o.program, "Program file")->required();
    analyze->add_option("--points", o.points, "Statement numbers for the footprint report (default: all)")
        ->delimiter(',');
    analyze->add_option("--state-in", o.state_in, "Load engine state before analysing");
    analyze->add_option("--state-out", o.state_out, "Dump engine state after analysing");
    common(analyze);

    auto* demo = app.add_subcommand("demo", "Run a worked example and print the final engine configuration");
    demo->add_option("which", o.demo, "basic | nested")->required();
    demo->add_option("--repeat", o.repeat, "Run the script this many times in one process");
    demo->add_option("--state-in", o.state_in, "Load engine state first");
    demo->add_option("--state-out", o.state_out, "Dump engine state afterwards");
    common(demo);

    auto* verify = app.add_subcommand("verify", "Seeded property checks against plain-set oracles");
    verify->add_option("--seed", o.seed, "PRNG seed");
    verify->add_option("--trials", o.trials, "Random trials per fuzz check");
    verify->add_option("--programs", o.programs, "Random programs for analysis equivalence");
    common(verify);

    auto* bench = app.add_subcommand("bench", "Redundancy benchmark over all backends");
    bench->add_option("program", o.program, "Program file (default: generated from the seed)");
    bench->add_option("--seed", o.seed, "PRNG seed");
    bench->add_flag("--timing", o.timing, "Include wall-clock times (makes output nondeterministic)");
    bench->add_option("--emit-program", o.emit_program, "Also write the generated program to this file");
    common(bench);

    auto* dump = app.add_subcommand("dump-state", "Write an engine snapshot");
    dump->add_option("program", o.program, "Analyse this program first");
    dump->add_option("--demo", o.demo, "Snapshot a worked example instead: basic | nested");
    dump->add_option("--state-out", o.state_out, "Snapshot file")->required();
    common(dump);

    auto* load = app.add_subcommand("load-state", "Load an engine snapshot and report its counters");
    load->add_option("program", o.program, "Analyse this program on the loaded engines");
    load->add_option("--demo", o.demo, "Snapshot layout of a worked example: basic | nested");
    load->add_option("--state-in", o.state_in, "Snapshot file")->required();
    load->add_option("--state-out", o.state_out, "Dump the state again afterwards");
    common(load);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        Runner r(o, out);
        if (*analyze) return r.analyze();
        if (*demo) return r.demo();
        if (*verify) {
            const int code = r.verify();
            if (code != kOk) err << "verification failed\n";
            return code;
        }
        if (*bench) return r.bench();
        if (*dump) return r.dump_state();
        if (*load) return r.load_state();
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const pta::ParseError& e) {
        err << "error: " << o.program << ": " << e.what() << "\n";
        return kUsage;
    } catch (const LoadError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kUsage;
}

}  // namespace mde::cli
