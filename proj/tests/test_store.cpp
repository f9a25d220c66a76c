#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mde/engine.hpp"

namespace {

using CharEngine = mde::Engine<char>;
using mde::SetIndex;

TEST(Store, FreshEngineHoldsOnlyTheEmptySet) {
    CharEngine e;
    EXPECT_EQ(e.slot_count(), 1u);
    EXPECT_TRUE(e.resolve(mde::kEmptySet).empty());
    EXPECT_EQ(e.set_size(mde::kEmptySet), 0u);

    auto r = e.register_set({});
    EXPECT_EQ(r.index, mde::kEmptySet);
    EXPECT_FALSE(r.fresh);
    EXPECT_EQ(e.slot_count(), 1u);

    // next issued index is 1
    EXPECT_EQ(e.register_set({'x'}).index, SetIndex{1});
}

TEST(Store, RegistrationIsIdempotent) {
    CharEngine e;
    auto abc = e.register_set({'a', 'b', 'c'});
    EXPECT_EQ(abc.index, SetIndex{1});
    EXPECT_TRUE(abc.fresh);
    auto again = e.register_set({'a', 'b', 'c'});
    EXPECT_EQ(again.index, SetIndex{1});
    EXPECT_FALSE(again.fresh);
    auto abd = e.register_set({'a', 'b', 'd'});
    EXPECT_EQ(abd.index, SetIndex{2});
    EXPECT_TRUE(abd.fresh);
    EXPECT_EQ(e.set_size(abc.index), 3u);
}

TEST(Store, RejectsNonCanonicalInput) {
    CharEngine e;
    EXPECT_THROW(e.register_set({'b', 'a'}), mde::UsageError);
    EXPECT_THROW(e.register_set({'a', 'a'}), mde::UsageError);
    auto r = e.register_from_items({'c', 'a', 'b', 'a', 'c'});
    EXPECT_EQ(std::vector<char>(e.resolve(r.index).begin(), e.resolve(r.index).end()),
              (std::vector<char>{'a', 'b', 'c'}));
}

TEST(Store, UnknownIndexIsAUsageError) {
    CharEngine e;
    EXPECT_THROW((void)e.resolve(SetIndex{999}), mde::UsageError);
    EXPECT_THROW((void)e.set_size(SetIndex{1}), mde::UsageError);
    EXPECT_THROW(e.set_union(SetIndex{0}, SetIndex{5}), mde::UsageError);
}

TEST(Store, ViewsSurviveGrowth) {
    CharEngine e;
    auto idx = e.register_set({'k', 'q'}).index;
    auto view = e.resolve(idx);
    const char* data = view.data();
    for (int i = 0; i < 5000; ++i) e.register_from_items({static_cast<char>(i % 120), static_cast<char>(i % 7 + 1)});
    EXPECT_EQ(e.resolve(idx).data(), data);
    EXPECT_EQ(view[0], 'k');
    EXPECT_EQ(view[1], 'q');
}

struct ConstantHash {
    std::size_t operator()(int) const noexcept { return 42; }
};

TEST(Store, CollisionsAreResolvedByEquality) {
    mde::Engine<int, ConstantHash> e;
    std::map<std::set<int>, SetIndex> seen{{{}, mde::kEmptySet}};
    std::mt19937 rng(7);
    for (int i = 0; i < 400; ++i) {
        std::set<int> s;
        const int n = static_cast<int>(rng() % 5);
        for (int k = 0; k < n; ++k) s.insert(static_cast<int>(rng() % 6));
        auto r = e.register_set({s.begin(), s.end()});
        auto [it, inserted] = seen.emplace(s, r.index);
        EXPECT_EQ(r.fresh, inserted);
        EXPECT_EQ(it->second, r.index);
    }
}

// Soundness, completeness, density and stability of interning over random
// registrations.
TEST(Store, InterningProperties) {
    mde::Engine<int> e;
    std::map<std::set<int>, SetIndex> by_content;
    std::vector<std::set<int>> by_index{{}};
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 3000; ++i) {
        std::vector<int> items;
        const int n = static_cast<int>(rng() % 7);
        for (int k = 0; k < n; ++k) items.push_back(static_cast<int>(rng() % 9));
        auto r = e.register_from_items(items);
        std::set<int> s(items.begin(), items.end());
        if (r.fresh) {
            EXPECT_EQ(r.index.value(), by_index.size());
            by_index.push_back(s);
        }
        auto [it, inserted] = by_content.emplace(s, r.index);
        EXPECT_EQ(inserted && !s.empty(), r.fresh);
        EXPECT_EQ(it->second, r.index);
    }
    ASSERT_EQ(e.slot_count(), by_index.size());
    for (std::size_t i = 0; i < by_index.size(); ++i) {
        auto view = e.resolve(SetIndex(static_cast<std::uint32_t>(i)));
        EXPECT_EQ(std::set<int>(view.begin(), view.end()), by_index[i]);
    }
}

}  // namespace
