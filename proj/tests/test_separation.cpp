#include <gtest/gtest.h>

#include "lemma_checks.hpp"

using namespace lfci;
using lfci::testing::fixture;
using lfci::testing::labelled;

TEST(MSeparation, Chain) {
    MixedGraph g(3);
    g.add_directed(0, 1);
    g.add_directed(1, 2);
    EXPECT_TRUE(m_separated(g, 0, 2, {1}));
    EXPECT_FALSE(m_separated(g, 0, 2, {}));
}

TEST(MSeparation, Collider) {
    MixedGraph g(4);
    g.add_directed(0, 1);
    g.add_directed(2, 1);
    g.add_directed(1, 3);
    EXPECT_TRUE(m_separated(g, 0, 2, {}));
    EXPECT_FALSE(m_separated(g, 0, 2, {1}));
    EXPECT_FALSE(m_separated(g, 0, 2, {3}));  // descendant of the collider
}

TEST(MSeparation, DiscriminatingPath) {
    MixedGraph g = fixture("discriminating_path.txt");
    EXPECT_TRUE(m_separated(g, g.at("i"), g.at("j"), labelled(g, {"w", "u", "v", "x", "y"})));
    EXPECT_FALSE(m_separated(g, g.at("i"), g.at("j"), labelled(g, {"w", "u", "v", "x"})));
}

TEST(MSeparation, RejectsEndpointsInS) {
    MixedGraph g(3);
    EXPECT_THROW(m_separated(g, 0, 1, {0}), InvalidConditioningSet);
    EXPECT_THROW(m_separated(g, 0, 0, {}), InvalidConditioningSet);
}

TEST(MSeparation, BruteForceTrivia) {
    MixedGraph empty(4);
    EXPECT_TRUE(m_separated_bruteforce(empty, 0, 3, {1, 2}));
    MixedGraph g(3);
    g.add_bidirected(0, 1);
    EXPECT_FALSE(m_separated_bruteforce(g, 0, 1, {}));
    EXPECT_FALSE(m_separated_bruteforce(g, 0, 1, {2}));
    EXPECT_THROW(m_separated_bruteforce(MixedGraph(21), 0, 1, {}), GraphTooLarge);
}

TEST(MSeparation, MatchesBruteForceExhaustively) {
    Rng rng(17);
    for (int rep = 0; rep < 60; ++rep) {
        MixedGraph g = lfci::testing::random_mag(7, 2, 0.35, rng);
        for (NodeId i = 0; i < 7; ++i)
            for (NodeId j = i + 1; j < 7; ++j) {
                NodeSet rest = set_difference({0, 1, 2, 3, 4, 5, 6}, {i, j});
                for (int k = 0; k <= 5; ++k)
                    for_each_combination(rest, k, [&](const NodeSet& s) {
                        EXPECT_EQ(m_separated(g, i, j, s), m_separated_bruteforce(g, i, j, s))
                            << serialize_graph(g) << i << "," << j << " | " << to_string(s);
                        return true;
                    });
            }
    }
}

TEST(MSeparation, MaskEqualsInducedSubgraph) {
    Rng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        MixedGraph g = lfci::testing::random_mag(9, 2, 0.3, rng);
        NodeSet keep;
        for (NodeId v = 0; v < 9; ++v)
            if (rng.coin(0.7)) keep.push_back(v);
        if (keep.size() < 3) continue;
        MixedGraph sub = induced_subgraph(g, keep);
        std::vector<char> mask(9, 0);
        for (NodeId v : keep) mask[v] = 1;
        NodeId a = 0, b = static_cast<NodeId>(keep.size()) - 1;
        NodeSet s_sub, s;
        for (NodeId v = 1; v < b; ++v)
            if (rng.coin(0.4)) {
                s_sub.push_back(v);
                s.push_back(keep[v]);
            }
        EXPECT_EQ(m_separated(g, keep[a], keep[b], s, &mask), m_separated(sub, a, b, s_sub));
    }
}

TEST(LocalGraph, TwoRoutesWholeGraph) {
    MixedGraph g = fixture("two_routes.txt");
    LocalGraph lg = local_graph(g, g.at("i"), g.at("j"), 3);
    EXPECT_EQ(static_cast<int>(lg.nodes.size()), g.size());
    EXPECT_EQ(lg.induced.edge_count(), g.edge_count());
}

TEST(LocalGraph, LocalSeparatorMag) {
    MixedGraph g = fixture("local_separator.txt");
    EXPECT_EQ(local_graph(g, g.at("1"), g.at("8"), 4).nodes, labelled(g, {"1", "2", "3", "4", "5", "6", "7", "8"}));
    EXPECT_EQ(local_graph(g, g.at("1"), g.at("8"), 3).nodes, labelled(g, {"1", "2", "4", "5", "7", "8"}));
}

TEST(LocalGraph, NoShortPath) {
    MixedGraph g(4);
    g.add_directed(0, 2);
    LocalGraph lg = local_graph(g, 0, 1, 3);
    EXPECT_EQ(lg.nodes, (NodeSet{0, 1}));
    EXPECT_EQ(lg.induced.edge_count(), 0);
}

TEST(LocalGraph, MatchesPathDefinitionAndIsMonotone) {
    Rng rng(29);
    for (int rep = 0; rep < 150; ++rep) {
        MixedGraph g = lfci::testing::random_mag(10, 2, 0.25, rng);
        for (NodeId i = 0; i < 10; ++i)
            for (NodeId j = i + 1; j < 10; ++j) {
                NodeSet prev;
                for (int gamma = 1; gamma <= 6; ++gamma) {
                    std::vector<char> on(10, 0);
                    on[i] = on[j] = 1;
                    for_each_simple_path(g, i, j, kUnbounded, [&](const std::vector<NodeId>& path) {
                        if (static_cast<int>(path.size()) - 1 <= gamma)
                            for (NodeId v : path) on[v] = 1;
                        return true;
                    });
                    NodeSet expected;
                    for (NodeId v = 0; v < 10; ++v)
                        if (on[v]) expected.push_back(v);
                    NodeSet got = local_nodes(g, i, j, gamma);
                    ASSERT_EQ(got, expected);
                    EXPECT_TRUE(is_subset(prev, got));
                    EXPECT_TRUE(is_subset(set_difference(got, {i, j}), distance_pool(g, i, j, gamma)));
                    prev = got;
                }
            }
    }
}

TEST(ShortPaths, ShortPaths) {
    MixedGraph g = fixture("short_paths.txt");
    EXPECT_EQ(count_short_paths(skeleton(g), g.at("i"), g.at("j"), 4), 4);
    EXPECT_EQ(count_short_paths(skeleton(g), g.at("i"), g.at("j"), 6), 5);
}

TEST(ShortPaths, SmallCases) {
    MixedGraph k4 = complete_undirected(4);
    EXPECT_EQ(count_short_paths(k4, 0, 3, 2), 3);
    MixedGraph two(3);
    two.add_undirected(0, 2);
    EXPECT_EQ(count_short_paths(two, 0, 1, 5), 0);
}

TEST(LocalPathProperty, Examples) {
    MixedGraph tree(6);
    tree.add_undirected(0, 1);
    tree.add_undirected(1, 2);
    tree.add_undirected(1, 3);
    tree.add_undirected(3, 4);
    tree.add_undirected(3, 5);
    EXPECT_TRUE(has_local_path_property(tree, 1, 5));
    MixedGraph c4(4);
    c4.add_undirected(0, 1);
    c4.add_undirected(1, 2);
    c4.add_undirected(2, 3);
    c4.add_undirected(3, 0);
    EXPECT_FALSE(has_local_path_property(c4, 1, 3));
    EXPECT_FALSE(has_local_path_property(skeleton(fixture("two_routes.txt")), 3, 3));
}

TEST(LocalSeparator, TwoRoutes) {
    MixedGraph g = fixture("two_routes.txt");
    NodeId i = g.at("i"), j = g.at("j");
    EXPECT_TRUE(is_local_separator(g, i, j, labelled(g, {"2", "3", "5"}), 3));
    auto found = find_local_separator(g, {i, j, 3, kUnbounded});
    ASSERT_TRUE(found);
    EXPECT_EQ(found->size(), 3u);
    EXPECT_TRUE(is_local_separator(g, i, j, *found, 3));
    // size two never suffices: 3 must be in S and it opens both sides
    EXPECT_FALSE(find_local_separator(g, {i, j, 3, 2}));
}

TEST(LocalSeparator, LocalSeparatorMag) {
    MixedGraph g = fixture("local_separator.txt");
    NodeId one = g.at("1"), eight = g.at("8");
    EXPECT_EQ(find_local_separator(g, {one, eight, 4, 2}), labelled(g, {"4", "5"}));
    EXPECT_TRUE(is_local_separator(g, one, eight, labelled(g, {"4", "5"}), 3));
    // at gamma = 3 node 3 is outside the local graph, so {2,5} also separates
    // and comes first in (size, lexicographic) order
    EXPECT_EQ(find_local_separator(g, {one, eight, 3, 2}), labelled(g, {"2", "5"}));
    // neither is a separator in the full graph: 1 <- a <- c1 <-> c2 -> c3 -> b -> 8
    EXPECT_FALSE(m_separated(g, one, eight, labelled(g, {"4", "5"})));
}

TEST(LocalSeparator, MarginallyIndependent) {
    MixedGraph g(4);
    g.add_directed(0, 1);
    g.add_directed(2, 3);
    EXPECT_EQ(find_local_separator(g, {0, 3, 3, 2}), NodeSet{});
}

TEST(LocalSeparator, AdjacentPairRejected) {
    MixedGraph g(2);
    g.add_directed(0, 1);
    EXPECT_THROW(find_local_separator(g, {0, 1, 3, 2}), AdjacentPair);
}

TEST(LocalSeparator, SeparableIffNonAdjacent) {
    Rng rng(31);
    for (int rep = 0; rep < 150; ++rep) {
        MixedGraph g = lfci::testing::random_mag(8, 2, 0.3, rng);
        int gamma = 1 + static_cast<int>(rng.below(5));
        for (NodeId i = 0; i < 8; ++i)
            for (NodeId j = i + 1; j < 8; ++j) {
                if (g.adjacent(i, j)) continue;
                EXPECT_TRUE(find_local_separator(g, {i, j, gamma, kUnbounded}));
            }
    }
}

TEST(SeparatorSize, TreeSkeletons) {
    Rng rng(37);
    for (int rep = 0; rep < 100; ++rep) {
        MixedGraph g(9);
        std::vector<int> order = rng.permutation(9);
        for (int k = 1; k < 9; ++k) {
            NodeId parent = order[rng.below(static_cast<std::uint64_t>(k))];
            if (rng.coin(0.5))
                g.add_directed(parent, order[k]);
            else
                g.add_directed(order[k], parent);
        }
        if (!is_dag(g)) continue;
        EXPECT_LE(L_gamma(g, 3, 1), 1);
    }
    MixedGraph edge(2);
    edge.add_directed(0, 1);
    EXPECT_EQ(L_gamma(edge, 2, 0), 0);
}

TEST(SeparatorSize, CapExceededNamesPair) {
    MixedGraph g = fixture("two_routes.txt");
    try {
        L_gamma(g, 3, 2);
        FAIL() << "expected CapExceeded";
    } catch (const CapExceeded& e) {
        EXPECT_EQ(e.pair, std::make_pair(g.at("i"), g.at("j")));
    }
}

TEST(SeparatorSize, ParentSeparatorOnDags) {
    auto t = lfci::testing::check_parent_separator(200, 41);
    EXPECT_EQ(t.violations, 0) << t.first_violation;
    EXPECT_GT(t.pairs, 1000);
}

TEST(SeparatorSize, MagSeparatorSize) {
    auto t = lfci::testing::check_mag_separator_size(200, 43);
    EXPECT_EQ(t.violations, 0) << t.first_violation;
    EXPECT_GE(t.max_bound, 2);
}

TEST(SeparatorSize, BlanketSeparatorSize) {
    auto t = lfci::testing::check_blanket_separator_size(200, 47);
    EXPECT_EQ(t.violations, 0) << t.first_violation;
}

TEST(MarkovBlanket, Examples) {
    MixedGraph bi(3);
    bi.add_bidirected(0, 1);
    bi.add_bidirected(1, 2);
    EXPECT_TRUE(is_subset({1, 2}, markov_blanket(bi, 0, kUnbounded)));
    MixedGraph chain(3);
    chain.add_directed(0, 1);
    chain.add_directed(1, 2);
    for (int gamma : {1, 2, 5, kUnbounded}) EXPECT_EQ(markov_blanket(chain, 0, gamma), (NodeSet{1}));
    MixedGraph v(3);
    v.add_directed(0, 1);
    v.add_directed(2, 1);
    EXPECT_EQ(markov_blanket(v, 0, kUnbounded), (NodeSet{1, 2}));
    EXPECT_EQ(markov_blanket(v, 0, 1), (NodeSet{1}));
}

TEST(MarkovBlanket, MatchesColliderPathEnumeration) {
    Rng rng(53);
    for (int rep = 0; rep < 200; ++rep) {
        MixedGraph g = lfci::testing::random_mag(8, 2, 0.3, rng);
        for (int gamma : {1, 2, 3, kUnbounded})
            for (NodeId i = 0; i < 8; ++i) {
                NodeSet expected;
                for (NodeId v = 0; v < 8; ++v) {
                    if (v == i) continue;
                    bool found = false;
                    for_each_simple_path(g, i, v, gamma == kUnbounded ? 8 : gamma, [&](const std::vector<NodeId>& path) {
                        bool collider = true;
                        for (std::size_t k = 1; k + 1 < path.size(); ++k)
                            collider = collider && g.mark_at(path[k], path[k - 1]) == Mark::Head &&
                                       g.mark_at(path[k], path[k + 1]) == Mark::Head;
                        found = found || collider;
                        return !found;
                    });
                    if (found) expected.push_back(v);
                }
                EXPECT_EQ(markov_blanket(g, i, gamma), expected);
            }
    }
}

TEST(MoralGraph, Examples) {
    MixedGraph v(3);
    v.add_directed(0, 1);
    v.add_directed(2, 1);
    MixedGraph m = moral_graph(v, kUnbounded);
    EXPECT_EQ(m.edge_count(), 3);
    MixedGraph chain(3);
    chain.add_directed(0, 1);
    chain.add_directed(1, 2);
    MixedGraph mc = moral_graph(chain, kUnbounded);
    EXPECT_EQ(mc.edge_count(), 2);
    EXPECT_FALSE(mc.adjacent(0, 2));
}

TEST(BlanketSize, Examples) {
    MixedGraph g(4);
    g.add_bidirected(0, 1);
    g.add_bidirected(1, 2);
    g.add_directed(1, 3);
    EXPECT_EQ(L_mb(g, 3, 3), 0);
    MixedGraph chain(3);
    chain.add_directed(0, 1);
    chain.add_directed(1, 2);
    EXPECT_EQ(L_mb(chain, 3, 3), 0);
}

TEST(Maximality, Examples) {
    EXPECT_TRUE(is_maximal(fixture("local_separator.txt")));
    EXPECT_TRUE(is_maximal(complete_undirected(5)));
    // inducing path a <-> b <-> c <-> d with b -> d and c -> a
    MixedGraph g(4);
    g.add_bidirected(0, 1);
    g.add_bidirected(1, 2);
    g.add_bidirected(2, 3);
    g.add_directed(1, 3);
    g.add_directed(2, 0);
    ASSERT_TRUE(is_ancestral(g));
    EXPECT_FALSE(is_maximal(g));
    EXPECT_FALSE(is_maximal_bruteforce(g));
}

TEST(Maximality, MatchesSubsetSearch) {
    Rng rng(59);
    int checked = 0, non_maximal = 0;
    while (checked < 1000) {
        // arrowhead-heavy graphs so that inducing paths are common
        MixedGraph g(7);
        for (NodeId a = 0; a < 7; ++a)
            for (NodeId b = a + 1; b < 7; ++b)
                if (rng.coin(0.4)) g.add_edge(a, b, rng.coin(0.75) ? Mark::Head : Mark::Tail, rng.coin(0.75) ? Mark::Head : Mark::Tail);
        if (!is_ancestral(g)) continue;
        ++checked;
        bool brute = is_maximal_bruteforce(g);
        non_maximal += !brute;
        EXPECT_EQ(is_maximal(g), brute) << serialize_graph(g);
    }
    EXPECT_GT(non_maximal, 0);
}
