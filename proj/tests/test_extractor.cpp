#include <gtest/gtest.h>

#include "support.hpp"

using namespace corrhist;
using namespace testing_support;

namespace {

using Names = std::set<std::string>;

std::vector<std::string> v(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

std::set<GroupShape> swapped(const std::vector<RawGroup>& gs) {
    std::set<GroupShape> out;
    for (const auto& g : gs)
        out.insert({"split", g.targets, g.sources});
    return out;
}

}  // namespace

TEST(ReferencePredecessors, Examples) {
    History unchanged = make_history({{{"P", {"d1"}}}, {{"P", {"d1"}}}});
    EXPECT_EQ(reference_predecessors(unchanged, "P", day(0), day(1)), Names{"P"});

    History h = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"A", {"d1", "d2"}}}});
    EXPECT_EQ(reference_predecessors(h, "A", day(0), day(1)), (Names{"A", "B"}));
    EXPECT_TRUE(reference_predecessors(h, "B", day(0), day(1)).empty());
    EXPECT_THROW(reference_predecessors(h, "A", day(0), day(7)), UnobservedTimeError);
    EXPECT_THROW(reference_predecessors(h, "A", day(1), day(0)), Error);
}

TEST(ReferenceSuccessors, Examples) {
    History unchanged = make_history({{{"P", {"d1"}}}, {{"P", {"d1"}}}});
    EXPECT_EQ(reference_successors(unchanged, "P", day(0), day(1)), Names{"P"});

    History h = make_history({{{"A", {"d1", "d2"}}}, {{"A", {"d1"}}, {"C", {"d2"}}}});
    EXPECT_EQ(reference_successors(h, "A", day(0), day(1)), (Names{"A", "C"}));
    EXPECT_TRUE(reference_successors(h, "C", day(0), day(1)).empty());
}

TEST(ConsistentPredecessor, Examples) {
    History h = make_history({{{"A", {"d1", "d2"}}, {"E", {}}}, {{"A", {"d1"}}, {"C", {"d2"}}}});
    EXPECT_TRUE(is_consistent_predecessor(h, "E", day(0), "A", day(1)));
    EXPECT_TRUE(is_consistent_predecessor(h, "nobody", day(0), "C", day(1)));
    EXPECT_FALSE(is_consistent_predecessor(h, "A", day(0), "A", day(1)));
    History same = make_history({{{"A", {"d1"}}}, {{"A", {"d1"}}}});
    EXPECT_TRUE(is_consistent_predecessor(same, "A", day(0), "A", day(1)));
    EXPECT_THROW(is_consistent_predecessor(same, "A", day(0), "A", day(9)), UnobservedTimeError);
}

TEST(MergeGroups, Examples) {
    History h = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"A", {"d1", "d2"}}, {"B", {}}}});
    auto gs = detect_merge_groups(h, day(0), day(1));
    ASSERT_EQ(gs.size(), 1u);
    EXPECT_EQ(gs[0].sources, v({"A", "B"}));
    EXPECT_EQ(gs[0].targets, v({"A"}));

    History kept = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"A", {"d1", "d2"}}, {"B", {"d3"}}}});
    EXPECT_TRUE(detect_merge_groups(kept, day(0), day(1)).empty());

    History same = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"A", {"d1"}}, {"B", {"d2"}}}});
    EXPECT_TRUE(detect_merge_groups(same, day(0), day(1)).empty());
}

TEST(MergeGroups, FreshSurvivorIsNotASource) {
    History h = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"N", {"d1", "d2"}}}});
    auto gs = detect_merge_groups(h, day(0), day(1));
    ASSERT_EQ(gs.size(), 1u);
    EXPECT_EQ(gs[0].sources, v({"A", "B"}));
    EXPECT_EQ(gs[0].targets, v({"N"}));
}

TEST(SplitGroups, Examples) {
    History h = make_history({{{"A", {"d1", "d2"}}}, {{"A", {"d1"}}, {"C", {"d2"}}}});
    auto gs = detect_split_groups(h, day(0), day(1));
    ASSERT_EQ(gs.size(), 1u);
    EXPECT_EQ(gs[0].sources, v({"A"}));
    EXPECT_EQ(gs[0].targets, v({"A", "C"}));
    History same = make_history({{{"A", {"d1", "d2"}}}, {{"A", {"d1", "d2"}}}});
    EXPECT_TRUE(detect_split_groups(same, day(0), day(1)).empty());

    History merge = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"A", {"d1", "d2"}}}});
    History rev = time_reversed(merge);
    EXPECT_EQ(shapes(detect_split_groups(rev, day(0), day(1))), swapped(detect_merge_groups(merge, day(0), day(1))));
}

TEST(Distributes, Examples) {
    History h = make_history({{{"A", {"d1", "d2"}}, {"B", {"d3"}}}, {{"A", {"d1"}}, {"B", {"d2", "d3"}}}});
    auto gs = detect_distributes(h, day(0), day(1));
    ASSERT_EQ(gs.size(), 1u);
    EXPECT_EQ(gs[0].sources, v({"A", "B"}));
    EXPECT_EQ(gs[0].targets, v({"A", "B"}));

    History merge = make_history({{{"A", {"d1"}}, {"B", {"d2"}}}, {{"A", {"d1", "d2"}}}});
    EXPECT_TRUE(detect_distributes(merge, day(0), day(1)).empty());
    History same = make_history({{{"A", {"d1"}}}, {{"A", {"d1"}}}});
    EXPECT_TRUE(detect_distributes(same, day(0), day(1)).empty());
}

TEST(RawGroups, NoGroupFromTwoDetectors) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        auto [a, b] = random_pair(rng, 12, 6, 0.3);
        History h = make_history({a, b});
        std::set<std::vector<std::string>> seen;
        for (const auto& g : detect_raw_groups(h, day(0), day(1)))
            EXPECT_TRUE(seen.insert(g.profiles()).second);
    }
}

TEST(Detectors, MatchBruteForceOracles) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        auto [a, b] = random_pair(rng, 3 + static_cast<int>(rng() % 15), 2 + static_cast<int>(rng() % 8), 0.05 * (rng() % 10));
        History h = make_history({a, b});
        const Snapshot& s0 = h[0];
        const Snapshot& s1 = h[1];
        for (const auto& id : all_ids(s0, s1)) {
            ASSERT_EQ(reference_predecessors(h, id, day(0), day(1)), oracle_predecessors(s0, s1, id));
            ASSERT_EQ(reference_successors(h, id, day(0), day(1)), oracle_successors(s0, s1, id));
        }
        ASSERT_EQ(shapes(detect_merge_groups(h, day(0), day(1))), oracle_merges(s0, s1));
        ASSERT_EQ(shapes(detect_split_groups(h, day(0), day(1))), oracle_splits(s0, s1));
        ASSERT_EQ(shapes(detect_distributes(h, day(0), day(1))), oracle_distributes(s0, s1));
        ASSERT_EQ(shapes(detect_raw_groups(h, day(0), day(1))), oracle_raw_groups(s0, s1));
    }
}

TEST(Duality, SplitsAreReversedMerges) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        auto [a, b] = random_pair(rng, 15, 7, 0.4);
        History h = make_history({a, b});
        History r = time_reversed(h);
        ASSERT_EQ(shapes(detect_split_groups(h, day(0), day(1))), swapped(detect_merge_groups(r, day(0), day(1))));
    }
}

TEST(Chaining, DirectlySuccessiveMergesJoin) {
    History h = make_history({{{"p1", {"d1"}}, {"p2", {"d2"}}, {"p3", {"d3"}}},
                              {{"p1", {"d1", "d2"}}, {"p3", {"d3"}}},
                              {{"p1", {"d1", "d2", "d3"}}}});
    auto raw = detect_all_raw_groups(h);
    ASSERT_EQ(raw.size(), 2u);
    auto cases = extract_corrections(h);
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].kind, CorrectionKind::Merge);
    EXPECT_EQ(cases[0].profile_ids(), v({"p1", "p2", "p3"}));
    EXPECT_EQ(cases[0].t_before, day(0));
    EXPECT_EQ(cases[0].t_after, day(2));
    EXPECT_EQ(cases[0].chained_from.size(), 2u);

    History coarse = make_history({{{"p1", {"d1"}}, {"p2", {"d2"}}, {"p3", {"d3"}}}, {{"p1", {"d1", "d2", "d3"}}}});
    auto one = detect_all_raw_groups(coarse);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].sources, v({"p1", "p2", "p3"}));
}

TEST(Chaining, DisjointOrDistantGroupsStaySeparate) {
    History disjoint = make_history({{{"a", {"d1"}}, {"b", {"d2"}}, {"c", {"d3"}}, {"d", {"d4"}}},
                                     {{"a", {"d1", "d2"}}, {"c", {"d3"}}, {"d", {"d4"}}},
                                     {{"a", {"d1", "d2"}}, {"c", {"d3", "d4"}}}});
    EXPECT_EQ(extract_corrections(disjoint).size(), 2u);

    History distant = make_history({{{"p1", {"d1"}}, {"p2", {"d2"}}, {"p3", {"d3"}}},
                                    {{"p1", {"d1", "d2"}}, {"p3", {"d3"}}},
                                    {{"p1", {"d1", "d2"}}, {"p3", {"d3"}}},
                                    {{"p1", {"d1", "d2", "d3"}}}});
    EXPECT_EQ(extract_corrections(distant).size(), 2u);
}

TEST(Chaining, MixedKindsBecomeDistribute) {
    History h = make_history({{{"p1", {"d1", "d2"}}}, {{"p1", {"d1"}}, {"p2", {"d2"}}}, {{"p2", {"d1", "d2"}}}});
    auto cases = extract_corrections(h);
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].kind, CorrectionKind::Distribute);
}

TEST(Chaining, EmptyInputGivesNoChains) { EXPECT_TRUE(chain_groups({}).empty()); }

TEST(ExtractCorrections, SingleSnapshotIsError) {
    History h = make_history({{{"a", {"d1"}}}});
    EXPECT_THROW(extract_corrections(h), Error);
}

TEST(ExtractCorrections, NewMentionsAreFlagged) {
    auto docs = std::set<std::string>{"d1", "d2"};
    Snapshot s0 = make_snapshot("2017-01-01", {{"A", {"d1"}}, {"B", {"d2"}}}, docs);
    Snapshot s1 = make_snapshot("2017-01-02", {{"A", {"d1", "d2", "d3"}}}, {"d1", "d2", "d3"});
    auto cases = extract_corrections(History({s0, s1}));
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].new_mentions, (std::set<MentionKey>{{"d3", 0, Role::Author}}));
}

TEST(ExtractCorrections, ZeroPlanGivesNoCases) {
    auto c = GeneratorConfig::desk(1);
    for (auto& p : c.plan)
        p = IntervalPlan{};
    EXPECT_TRUE(extract_corrections(generate(c).history).empty());
}

TEST(ExtractCorrections, DenseHistoryMatchesLog) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto g = generate(GeneratorConfig::dense(seed, IntervalPlan{12, 6, 6, 4, 10}));
        auto mism = log_mismatches(extract_corrections(g.history), g.log);
        EXPECT_TRUE(mism.empty()) << "seed " << seed << ": " << (mism.empty() ? "" : mism.front());
    }
}

TEST(ExtractCorrections, DeterministicAcrossWorkerCounts) {
    auto g = generate(GeneratorConfig::desk(5));
    auto one = extract_corrections(g.history, 1);
    EXPECT_EQ(extract_corrections(g.history, 3), one);
    EXPECT_EQ(case_summary_tsv(extract_corrections(g.history, 8)), case_summary_tsv(one));
}

TEST(Coalescing, SparseObservationKeepsEverySingleEditProfile) {
    auto c = GeneratorConfig::desk(17);
    c.isolation = Isolation::Global;
    auto g = generate(c);
    std::set<std::string> dense, sparse;
    for (const auto& k : extract_corrections(g.history))
        for (const auto& id : k.profile_ids())
            dense.insert(id);
    History two({g.history[0], g.history.latest()});
    for (const auto& k : extract_corrections(two))
        for (const auto& id : k.profile_ids())
            sparse.insert(id);
    EXPECT_FALSE(dense.empty());
    EXPECT_TRUE(std::includes(sparse.begin(), sparse.end(), dense.begin(), dense.end()));
}

TEST(Coalescing, OverlappingCorrectionsMerge) {
    // distribute between p1 and p2, then p3 merged into p1; observed only at the ends
    History dense = make_history({{{"p1", {"d1", "d2"}}, {"p2", {"d3"}}, {"p3", {"d4"}}},
                                  {{"p1", {"d1"}}, {"p2", {"d2", "d3"}}, {"p3", {"d4"}}},
                                  {{"p1", {"d1", "d4"}}, {"p2", {"d2", "d3"}}}});
    EXPECT_EQ(detect_all_raw_groups(dense).size(), 2u);
    History sparse({dense[0], dense[2]});
    auto cases = extract_corrections(sparse);
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].kind, CorrectionKind::Distribute);
    EXPECT_EQ(cases[0].profile_ids(), v({"p1", "p2", "p3"}));
}

TEST(CaseIds, CountPerKindAndDate) {
    History h = make_history({{{"a", {"d1"}}, {"b", {"d2"}}, {"c", {"d3"}}, {"d", {"d4"}}},
                              {{"a", {"d1", "d2"}}, {"c", {"d3", "d4"}}}});
    auto ids = case_ids(extract_corrections(h));
    EXPECT_EQ(ids, v({"merge-2017-01-01-1", "merge-2017-01-01-2"}));
}
