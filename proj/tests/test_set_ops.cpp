#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mde/engine.hpp"
#include "oracle.hpp"

namespace {

using mde::kEmptySet;
using mde::OpKind;
using mde::SetIndex;
using IntEngine = mde::Engine<int>;

std::set<int> contents(const IntEngine& e, SetIndex i) {
    auto v = e.resolve(i);
    return {v.begin(), v.end()};
}

SetIndex reg(IntEngine& e, const std::set<int>& s) { return e.register_set({s.begin(), s.end()}).index; }

std::set<int> random_subset(std::mt19937_64& rng, int universe) {
    std::set<int> s;
    for (int i = 0; i < universe; ++i)
        if (rng() & 1) s.insert(i);
    return s;
}

// The worked example: {a,b,c} ∪ {a,b,d}.
TEST(SetOps, WorkedUnionExample) {
    mde::Engine<char> e;
    auto p1 = e.register_set({'a', 'b', 'c'}).index;
    auto p2 = e.register_set({'a', 'b', 'd'}).index;
    ASSERT_EQ(p1, SetIndex{1});
    ASSERT_EQ(p2, SetIndex{2});

    auto u = e.set_union(p1, p2);
    EXPECT_EQ(u, SetIndex{3});
    auto view = e.resolve(u);
    EXPECT_EQ(std::vector<char>(view.begin(), view.end()), (std::vector<char>{'a', 'b', 'c', 'd'}));
    EXPECT_EQ(e.set_size(u), 4u);

    auto memo = e.memo_entries(OpKind::Union);
    ASSERT_EQ(memo.size(), 1u);
    EXPECT_EQ(memo[0], (mde::MemoEntry{SetIndex{1}, SetIndex{2}, SetIndex{3}}));
    auto subset = e.subset_entries();
    ASSERT_EQ(subset.size(), 2u);
    EXPECT_EQ(subset[0], (mde::SubsetEntry{SetIndex{1}, SetIndex{3}, true}));
    EXPECT_EQ(subset[1], (mde::SubsetEntry{SetIndex{2}, SetIndex{3}, true}));

    EXPECT_TRUE(e.is_subset(p1, u));
    EXPECT_TRUE(e.is_subset(p2, u));
    EXPECT_FALSE(e.is_subset(u, p1));
    EXPECT_TRUE(e.contains(p1, 'a'));
    EXPECT_FALSE(e.contains(p1, 'd'));

    // {a,b,c} ∩ {a,b,d} = {a,b}; {a,b,c,d} \ {a,b,c} = {d}
    auto i = e.set_intersection(p1, p2);
    EXPECT_EQ(std::vector<char>(e.resolve(i).begin(), e.resolve(i).end()), (std::vector<char>{'a', 'b'}));
    auto d = e.set_difference(u, p1);
    EXPECT_EQ(std::vector<char>(e.resolve(d).begin(), e.resolve(d).end()), (std::vector<char>{'d'}));

    // inserting d into {a,b,c} lands on the existing {a,b,c,d}
    EXPECT_EQ(e.insert_single(p1, 'd'), u);
}

TEST(SetOps, TrivialCases) {
    IntEngine e;
    auto x = reg(e, {1, 4, 9});
    EXPECT_EQ(e.set_union(x, kEmptySet), x);
    EXPECT_EQ(e.set_union(kEmptySet, x), x);
    EXPECT_EQ(e.set_union(x, x), x);
    EXPECT_EQ(e.set_intersection(x, kEmptySet), kEmptySet);
    EXPECT_EQ(e.set_intersection(x, x), x);
    EXPECT_EQ(e.set_difference(x, x), kEmptySet);
    EXPECT_EQ(e.set_difference(x, kEmptySet), x);
    EXPECT_EQ(e.set_difference(kEmptySet, x), kEmptySet);
    EXPECT_TRUE(e.is_subset(kEmptySet, x));
    EXPECT_TRUE(e.is_subset(x, x));
    EXPECT_FALSE(e.is_subset(x, kEmptySet));
    EXPECT_FALSE(e.contains(kEmptySet, 1));
    EXPECT_EQ(e.metrics().merge_executions(), 0u);
}

TEST(SetOps, SingleElementWrappers) {
    IntEngine e;
    auto x = reg(e, {2, 3});
    EXPECT_EQ(e.insert_single(x, 3), x);
    EXPECT_EQ(contents(e, e.insert_single(kEmptySet, 5)), (std::set<int>{5}));
    EXPECT_EQ(e.remove_single(x, 7), x);
    auto a = reg(e, {8});
    EXPECT_EQ(e.remove_single(a, 8), kEmptySet);
}

TEST(SetOps, RandomUnionsMatchOracle) {
    IntEngine e;
    std::mt19937_64 rng(1);
    for (int t = 0; t < 1000; ++t) {
        auto a = random_subset(rng, 12), b = random_subset(rng, 12);
        auto u = e.set_union(reg(e, a), reg(e, b));
        ASSERT_EQ(contents(e, u), oracle::set_union(a, b));
    }
}

TEST(SetOps, ExhaustiveFiveElementUniverse) {
    IntEngine e;
    const auto all = oracle::power_set(5);
    std::vector<SetIndex> idx;
    for (const auto& s : all) idx.push_back(reg(e, s));
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = 0; j < all.size(); ++j) {
            const auto &a = all[i], &b = all[j];
            ASSERT_EQ(contents(e, e.set_union(idx[i], idx[j])), oracle::set_union(a, b));
            ASSERT_EQ(contents(e, e.set_intersection(idx[i], idx[j])), oracle::set_intersection(a, b));
            ASSERT_EQ(contents(e, e.set_difference(idx[i], idx[j])), oracle::set_difference(a, b));
            ASSERT_EQ(e.is_subset(idx[i], idx[j]), oracle::is_subset(a, b));
            ASSERT_EQ(mde::indices_equal(idx[i], idx[j]), a == b);
        }
        for (int p = 0; p < 6; ++p) ASSERT_EQ(e.contains(idx[i], p), all[i].contains(p));
    }
}

TEST(SetOps, ContainsAgreesWithOracleAcrossThreshold) {
    for (std::size_t threshold : {std::size_t{0}, std::size_t{16}, std::size_t{1000}}) {
        IntEngine e(mde::EngineOptions{.contains_linear_threshold = threshold});
        std::mt19937_64 rng(99);
        for (int t = 0; t < 10000; ++t) {
            std::set<int> s;
            const int n = static_cast<int>(rng() % 40);
            for (int k = 0; k < n; ++k) s.insert(static_cast<int>(rng() % 64));
            const int probe = static_cast<int>(rng() % 64);
            ASSERT_EQ(e.contains(reg(e, s), probe), s.contains(probe));
        }
    }
}

TEST(SetOps, RandomWrappersAndSubsetMatchOracle) {
    IntEngine e;
    std::mt19937_64 rng(5);
    for (int t = 0; t < 3000; ++t) {
        auto a = random_subset(rng, 12), b = random_subset(rng, 12);
        const int p = static_cast<int>(rng() % 12);
        auto ia = reg(e, a), ib = reg(e, b);
        auto with = a;
        with.insert(p);
        auto without = a;
        without.erase(p);
        ASSERT_EQ(contents(e, e.insert_single(ia, p)), with);
        ASSERT_EQ(contents(e, e.remove_single(ia, p)), without);
        ASSERT_EQ(e.is_subset(ia, ib), oracle::is_subset(a, b));
        ASSERT_EQ(mde::indices_equal(ia, ib), a == b);
    }
}

TEST(SetOps, MemoizedReplayRunsNoKernels) {
    IntEngine e;
    std::mt19937_64 rng(11);
    std::vector<std::tuple<OpKind, SetIndex, SetIndex>> script;
    for (int t = 0; t < 500; ++t) {
        script.emplace_back(mde::kAllOps[rng() % 3], reg(e, random_subset(rng, 10)), reg(e, random_subset(rng, 10)));
    }
    std::vector<SetIndex> first;
    for (auto [op, a, b] : script) first.push_back(e.operate(op, a, b));
    const auto before = e.metrics();
    std::vector<SetIndex> second;
    for (auto [op, a, b] : script) second.push_back(e.operate(op, a, b));
    EXPECT_EQ(first, second);
    EXPECT_EQ(e.metrics().merge_executions(), before.merge_executions());
}

TEST(SetOps, CommutativeOperandsAreNormalized) {
    IntEngine e;
    auto a = reg(e, {1, 2}), b = reg(e, {2, 3});
    auto u1 = e.set_union(b, a);
    auto u2 = e.set_union(a, b);
    EXPECT_EQ(u1, u2);
    EXPECT_EQ(e.metrics().at(OpKind::Union).merge_executions, 1u);
    EXPECT_TRUE(e.memoized(OpKind::Union, a, b).has_value());

    auto i1 = e.set_intersection(b, a);
    EXPECT_EQ(e.set_intersection(a, b), i1);
    EXPECT_EQ(e.metrics().at(OpKind::Intersection).merge_executions, 1u);

    // difference keeps operand order
    auto d1 = e.set_difference(a, b);
    auto d2 = e.set_difference(b, a);
    EXPECT_NE(d1, d2);
    EXPECT_EQ(e.metrics().at(OpKind::Difference).merge_executions, 2u);
}

TEST(SetOps, KernelIsLinear) {
    IntEngine e;
    std::mt19937_64 rng(3);
    for (int t = 0; t < 300; ++t) {
        auto a = random_subset(rng, 30), b = random_subset(rng, 30);
        auto ia = reg(e, a), ib = reg(e, b);
        for (auto op : mde::kAllOps) {
            const auto before = e.metrics().at(op);
            auto r = e.operate(op, ia, ib);
            const auto after = e.metrics().at(op);
            if (after.merge_executions > before.merge_executions) {
                EXPECT_LE(after.merge_steps - before.merge_steps, a.size() + b.size());
            }
            auto view = e.resolve(r);
            EXPECT_TRUE(std::adjacent_find(view.begin(), view.end(), std::greater_equal<int>()) == view.end());
        }
    }
}

TEST(SetOps, SubsetMapShortcutsQueries) {
    IntEngine e;
    auto a = reg(e, {1}), b = reg(e, {2});
    auto u = e.set_union(a, b);  // records a ⊆ u and b ⊆ u
    EXPECT_EQ(e.set_union(a, u), u);
    EXPECT_EQ(e.set_union(u, b), u);
    EXPECT_EQ(e.set_intersection(a, u), a);
    EXPECT_EQ(e.set_difference(a, u), kEmptySet);
    const auto& c = e.metrics();
    EXPECT_EQ(c.at(OpKind::Union).subset_hits, 2u);
    EXPECT_EQ(c.at(OpKind::Intersection).subset_hits, 1u);
    EXPECT_EQ(c.at(OpKind::Difference).subset_hits, 1u);
}

TEST(SetOps, SubsetMapStaysSoundUnderFuzz) {
    IntEngine e;
    std::mt19937_64 rng(17);
    std::vector<SetIndex> pool{kEmptySet};
    for (int t = 0; t < 10000; ++t) {
        if (pool.size() < 8 || rng() % 4 == 0) pool.push_back(reg(e, random_subset(rng, 12)));
        auto a = pool[rng() % pool.size()], b = pool[rng() % pool.size()];
        switch (rng() % 4) {
            case 0: pool.push_back(e.set_union(a, b)); break;
            case 1: pool.push_back(e.set_intersection(a, b)); break;
            case 2: pool.push_back(e.set_difference(a, b)); break;
            default: e.is_subset(a, b); break;
        }
    }
    for (const auto& entry : e.subset_entries()) {
        ASSERT_LT(entry.a, entry.b);
        auto sa = contents(e, entry.a), sb = contents(e, entry.b);
        if (entry.a_subset_of_b)
            ASSERT_TRUE(oracle::is_subset(sa, sb));
        else
            ASSERT_TRUE(oracle::is_subset(sb, sa));
    }
}

TEST(SetOps, DisablingSubsetShortcutsKeepsResults) {
    IntEngine with, without(mde::EngineOptions{.subset_shortcuts = false});
    std::mt19937_64 rng(23);
    std::vector<std::set<int>> sets;
    for (int i = 0; i < 40; ++i) sets.push_back(random_subset(rng, 8));
    for (int t = 0; t < 4000; ++t) {
        const auto &a = sets[rng() % sets.size()], &b = sets[rng() % sets.size()];
        auto op = mde::kAllOps[rng() % 3];
        auto r1 = with.operate(op, reg(with, a), reg(with, b));
        auto r2 = without.operate(op, reg(without, a), reg(without, b));
        ASSERT_EQ(contents(with, r1), contents(without, r2));
    }
    std::uint64_t hits_without = 0;
    for (auto op : mde::kAllOps) hits_without += without.metrics().at(op).subset_hits;
    EXPECT_EQ(hits_without, 0u);
    EXPECT_GT(with.metrics().at(OpKind::Union).subset_hits, 0u);
}

}  // namespace
