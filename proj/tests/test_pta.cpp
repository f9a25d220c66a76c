#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "mde/pta/analysis.hpp"
#include "mde/pta/footprint.hpp"
#include "mde/pta/generate.hpp"
#include "mde/pta/program.hpp"

namespace {

using namespace mde::pta;

std::string read_data(const std::string& name) {
    std::ifstream in(std::string(MDE_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PointsToPairs named_pairs(const Program& p, std::initializer_list<std::pair<const char*, const char*>> pairs) {
    std::set<std::pair<VarId, VarId>> s;
    for (auto [k, v] : pairs) s.emplace(*p.symbols.find(k), *p.symbols.find(v));
    return {s.begin(), s.end()};
}

AnalysisOutput analyze(const Program& p, Backend b) {
    Workspace ws;
    ws.symbols = p.symbols;
    return run_analyses(p, b, &ws, {.check_monotone = true});
}

void expect_equivalent(const AnalysisOutput& a, const AnalysisOutput& b) {
    EXPECT_EQ(a.points_to_before, b.points_to_before);
    EXPECT_EQ(a.points_to_after, b.points_to_after);
    EXPECT_EQ(a.points_to_block_entry, b.points_to_block_entry);
    EXPECT_EQ(a.points_to_block_exit, b.points_to_block_exit);
    EXPECT_EQ(a.live_before, b.live_before);
    EXPECT_EQ(a.live_after, b.live_after);
    EXPECT_EQ(a.live_block_entry, b.live_block_entry);
    EXPECT_EQ(a.live_block_exit, b.live_block_exit);
}

TEST(Parse, MotivatingExample) {
    const auto p = parse_program(read_data("motivating.ptl"));
    EXPECT_EQ(p.name, "motivating");
    EXPECT_EQ(p.statement_count(), 9u);
    EXPECT_EQ(p.blocks.size(), 5u);
    ASSERT_EQ(p.heap_sites.size(), 3u);
    EXPECT_EQ(p.symbols.name(p.heap_sites[0]), "H0");
    EXPECT_EQ(p.symbols.name(p.heap_sites[2]), "H2");
    EXPECT_TRUE(p.symbols.is_heap(p.heap_sites[1]));
    EXPECT_EQ(p.blocks[0].successors, (std::vector<std::size_t>{1, 3}));
}

TEST(Parse, EmptyBody) {
    const auto p = parse_program("func f\nend\n");
    EXPECT_EQ(p.blocks.size(), 1u);
    EXPECT_EQ(p.entry(), p.exit());
    EXPECT_EQ(p.statement_count(), 0u);
}

TEST(Parse, FallThroughAndComments) {
    const auto p = parse_program("func f # name\nvar p x\nblock a\n  p = &x\nblock b\n  use p\nend\n");
    EXPECT_EQ(p.blocks[0].successors, (std::vector<std::size_t>{1}));
    EXPECT_EQ(p.blocks[1].statements[0].kind, StmtKind::Use);
}

void expect_parse_error(const std::string& text, int line, const std::string& fragment) {
    try {
        parse_program(text);
        FAIL() << "no error for:\n" << text;
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

TEST(Parse, Errors) {
    expect_parse_error("func f\nvar p\nblock a\n  p = &q\nend\n", 4, "undeclared variable 'q'");
    expect_parse_error("func f\nvar p\nblock a\nblock a\nend\n", 4, "duplicate block label");
    expect_parse_error("func f\nvar p\n  use p\nend\n", 3, "missing entry");
    expect_parse_error("func f\nvar p\nblock a\n  goto nowhere\nblock b\nend\n", 4, "unknown block label");
    expect_parse_error("func f\nvar p\nblock a\n  goto c\nblock b\nblock c\nend\n", 5, "unreachable");
    expect_parse_error("func f\nvar H1\nend\n", 2, "reserved");
    expect_parse_error("func f\nvar p\nblock a\n  p = = p\nend\n", 4, "unrecognized");
    expect_parse_error("func f\nvar p\nblock a\n", 3, "missing 'end'");
    expect_parse_error("var p\n", 1, "func");
    expect_parse_error("func f\nvar p\nblock a\n  goto a\nend\n", 4, "exit");
    expect_parse_error("func f\nvar p\nblock a\n  goto b\n  use p\nblock b\nend\n", 5, "after goto");
    expect_parse_error("func f\nvar p p\nend\n", 2, "duplicate variable");
}

TEST(PointsTo, MotivatingExampleFixedPoint) {
    const auto p = parse_program(read_data("motivating.ptl"));
    const auto expected = named_pairs(p, {{"b", "H0"}, {"c", "H0"}, {"c", "H1"}, {"c", "H2"},
                                          {"d", "H0"}, {"d", "H1"}, {"d", "H2"}});
    for (auto backend : {Backend::Naive, Backend::SingleLevel, Backend::MultiLevel}) {
        const auto out = analyze(p, backend);
        for (std::size_t point = 6; point <= 9; ++point) EXPECT_EQ(out.points_to_after[point - 1], expected);
        EXPECT_EQ(out.points_to_after[0], named_pairs(p, {{"b", "H0"}}));
        EXPECT_EQ(out.points_to_after[1], named_pairs(p, {{"b", "H0"}, {"c", "H0"}}));
        EXPECT_EQ(out.monotonicity_violations, 0u);
    }
}

TEST(PointsTo, MotivatingExampleFootprint) {
    const auto p = parse_program(read_data("motivating.ptl"));
    const auto out = analyze(p, Backend::MultiLevel);
    const auto f = footprint_report(out.points_to_after, {6, 7, 8, 9});
    EXPECT_EQ(f.flat_per_point, (std::vector<std::uint64_t>{13, 13, 13, 13}));
    EXPECT_EQ(f.flat_total, 52u);
    EXPECT_EQ(f.single_level_per_point, (std::vector<std::uint64_t>{6, 6, 6, 6}));
    EXPECT_EQ(f.single_level_total, 24u);
    EXPECT_EQ(f.multi_level_total, 4u);
    EXPECT_EQ(f.distinct_pointee_sets, 2u);
    EXPECT_EQ(f.distinct_maps, 1u);

    const auto none = footprint_report({});
    EXPECT_EQ(none.flat_total + none.single_level_total + none.multi_level_total, 0u);

    const auto one = footprint_report({{{0, 1}}});
    EXPECT_EQ(one.flat_total, 3u);
    EXPECT_EQ(one.single_level_total, 2u);
    EXPECT_EQ(one.multi_level_total, 1u);
    EXPECT_EQ(one.distinct_pointee_sets, 1u);
}

TEST(PointsTo, StatementKinds) {
    const auto p = parse_program(R"(func f
var p q r x y
block a
  p = &x
  q = &y
  r = &p
  *r = q
  x = *r
  q = p
end
)");
    const auto out = analyze(p, Backend::MultiLevel);
    EXPECT_EQ(out.points_to_after[0], named_pairs(p, {{"p", "x"}}));
    // *r = q with r -> {p}: strong update of p
    EXPECT_EQ(out.points_to_after[3], named_pairs(p, {{"p", "y"}, {"q", "y"}, {"r", "p"}}));
    // x = *r: pointees of p
    EXPECT_EQ(out.points_to_after[4], named_pairs(p, {{"p", "y"}, {"q", "y"}, {"r", "p"}, {"x", "y"}}));
    // q = p where p -> {y}
    EXPECT_EQ(out.points_to_after[5], out.points_to_after[4]);
    expect_equivalent(out, analyze(p, Backend::Naive));
}

TEST(PointsTo, WeakStoreThroughHeapOrSeveralTargets) {
    const auto p = parse_program(R"(func f
var p q x y
block a
  p = new
  q = &x
  *p = q
  *p = q
  p = &x
  goto b c
block b
  p = &y
block c
  *p = q
  q = &y
  x = q
end
)");
    const auto out = analyze(p, Backend::MultiLevel);
    // heap target: weak
    EXPECT_EQ(out.points_to_after[2], named_pairs(p, {{"p", "H0"}, {"q", "x"}, {"H0", "x"}}));
    // p -> {x, y} at the store: both gain x, nothing is killed
    const auto at_store = out.points_to_after[6];
    EXPECT_EQ(at_store, named_pairs(p, {{"p", "x"}, {"p", "y"}, {"q", "x"}, {"H0", "x"}, {"x", "x"}, {"y", "x"}}));
    expect_equivalent(out, analyze(p, Backend::Naive));
    expect_equivalent(out, analyze(p, Backend::SingleLevel));
}

TEST(PointsTo, StoreThroughNothingIsUnreachable) {
    const auto p = parse_program("func f\nvar p q x\nblock a\n  q = &x\n  *p = q\n  use q\nend\n");
    const auto out = analyze(p, Backend::MultiLevel);
    EXPECT_EQ(out.points_to_before[1], named_pairs(p, {{"q", "x"}}));
    EXPECT_TRUE(out.points_to_after[1].empty());
    EXPECT_TRUE(out.points_to_after[2].empty());
}

TEST(PointsTo, CopyOfUnboundPointerKills) {
    const auto p = parse_program("func f\nvar p q x\nblock a\n  p = &x\n  p = q\n  p = *q\nend\n");
    const auto out = analyze(p, Backend::MultiLevel);
    EXPECT_TRUE(out.points_to_after[1].empty());
    EXPECT_TRUE(out.points_to_after[2].empty());
}

TEST(Liveness, AssignmentExample) {
    const auto p = parse_program("func f\nvar a b\nblock x\n  a = b\nend\n");
    for (auto backend : {Backend::Naive, Backend::MultiLevel}) {
        const auto out = analyze(p, backend);
        EXPECT_EQ(out.live_before[0], (VarList{*p.symbols.find("b")}));
        EXPECT_TRUE(out.live_after[0].empty());
    }
}

TEST(Liveness, NoUsesMeansNothingLive) {
    const auto p = parse_program("func f\nvar a b\nblock x\n  a = &b\n  b = new\nend\n");
    const auto out = analyze(p, Backend::MultiLevel);
    for (const auto& l : out.live_before) EXPECT_TRUE(l.empty());
    for (const auto& l : out.live_after) EXPECT_TRUE(l.empty());
}

TEST(Liveness, LoopCarriesUses) {
    const auto p = parse_program(R"(func f
var a b c
block head
  a = b
  goto body done
block body
  b = c
  goto head
block done
  use a
end
)");
    const auto out = analyze(p, Backend::MultiLevel);
    const auto b = *p.symbols.find("b"), c = *p.symbols.find("c");
    EXPECT_EQ(out.live_before[0], (VarList{b, c}));
    EXPECT_EQ(out.live_before[1], (VarList{c}));
    expect_equivalent(out, analyze(p, Backend::Naive));
}

TEST(Liveness, SharesTheChildEngine) {
    const auto p = parse_program("func f\nvar p x\nblock a\n  p = &x\n  use x\nend\n");
    Workspace ws;
    ws.symbols = p.symbols;
    run_analyses(p, Backend::MultiLevel, &ws);
    // {x} is both the pointee set of p and the live set before `use x`
    const auto pointees = ws.maps.get_pointees(ws.maps.insert_pointee(mde::kEmptySet, *p.symbols.find("p"),
                                                                      *p.symbols.find("x")),
                                               *p.symbols.find("p"));
    const auto live = ws.pointees.lookup({*p.symbols.find("x")});
    ASSERT_TRUE(live.has_value());
    EXPECT_EQ(*pointees, *live);
}

TEST(Backends, EmptyProgram) {
    const auto p = parse_program(read_data("empty.ptl"));
    for (auto backend : {Backend::Naive, Backend::SingleLevel, Backend::MultiLevel}) {
        const auto out = analyze(p, backend);
        EXPECT_TRUE(out.points_to_after.empty());
        EXPECT_EQ(out.points_to_block_exit, std::vector<PointsToPairs>{{}});
        EXPECT_EQ(out.merge_executions, 0u);
    }
}

TEST(Backends, AgreeOnRandomPrograms) {
    mde::Rng rng(2024);
    for (int t = 0; t < 200; ++t) {
        const auto text = random_program_text(rng);
        const auto p = parse_program(text);
        const auto naive = analyze(p, Backend::Naive);
        const auto single = analyze(p, Backend::SingleLevel);
        const auto multi = analyze(p, Backend::MultiLevel);
        SCOPED_TRACE(text);
        expect_equivalent(naive, multi);
        expect_equivalent(naive, single);
        EXPECT_EQ(multi.monotonicity_violations, 0u);
        EXPECT_EQ(naive.monotonicity_violations, 0u);
        if (::testing::Test::HasFailure()) break;
    }
}

TEST(Backends, LoopProgramShowsRedundancy) {
    mde::Rng rng(7);
    const auto p = parse_program(loop_program_text(rng));
    Workspace ws(mde::EngineOptions{.track_operand_pairs = true});
    ws.symbols = p.symbols;
    const auto multi = run_analyses(p, Backend::MultiLevel, &ws);
    const auto naive = run_analyses(p, Backend::Naive, nullptr);
    expect_equivalent(naive, multi);
    EXPECT_LE(multi.merge_executions, ws.pointees.distinct_operand_pairs() + ws.maps.distinct_operand_pairs());
    EXPECT_LT(multi.element_visits, naive.element_visits);
    EXPECT_LT(multi.merge_executions, naive.merge_executions);
    EXPECT_TRUE(ws.report().partition_holds());
}

}  // namespace

namespace {

NaivePointsTo::Fact as_fact(const PointsToPairs& pairs) {
    NaivePointsTo::Fact f;
    for (const auto& [k, v] : pairs) f[k].insert(v);
    return f;
}

PointsToPairs as_pairs(const NaivePointsTo::Fact& f) {
    PointsToPairs out;
    for (const auto& [k, vs] : f)
        for (auto v : vs) out.emplace_back(k, v);
    return out;
}

}  // namespace

// One more application of every transfer and join reproduces the solution.
TEST(Backends, SolutionsAreFixedPoints) {
    mde::Rng rng(99);
    for (int t = 0; t < 100; ++t) {
        const auto p = parse_program(random_program_text(rng));
        const auto out = analyze(p, Backend::MultiLevel);
        NaivePointsTo naive;
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            const auto& block = p.blocks[b];
            std::set<std::pair<VarId, VarId>> joined;
            for (auto pred : block.predecessors)
                joined.insert(out.points_to_block_exit[pred].begin(), out.points_to_block_exit[pred].end());
            if (b != p.entry()) {
                EXPECT_EQ(out.points_to_block_entry[b], PointsToPairs(joined.begin(), joined.end()));
            }
            std::set<VarId> live_out;
            for (auto succ : block.successors)
                live_out.insert(out.live_block_entry[succ].begin(), out.live_block_entry[succ].end());
            EXPECT_EQ(out.live_block_exit[b], VarList(live_out.begin(), live_out.end()));

            for (std::size_t i = 0; i < block.statements.size(); ++i) {
                const auto g = block.first_statement + i;
                const auto& s = block.statements[i];
                EXPECT_EQ(as_pairs(points_to_transfer(naive, p, s, as_fact(out.points_to_before[g]))),
                          out.points_to_after[g]);
                std::set<VarId> live(out.live_after[g].begin(), out.live_after[g].end());
                const auto du = def_use(s);
                if (du.def) live.erase(*du.def);
                live.insert(du.uses.begin(), du.uses.end());
                EXPECT_EQ(out.live_before[g], VarList(live.begin(), live.end()));
            }
        }
        if (::testing::Test::HasFailure()) break;
    }
}
