#include <random>

#include <gtest/gtest.h>

#include "sublinear/graph.hpp"
#include "sublinear/matching.hpp"
#include "support/test_support.hpp"

using namespace sublinear;

TEST(AttributedGraph, RejectsInvalidEdges) {
    AttributedGraph g(2);
    g.add_node({1, 2});
    g.add_node({3, 4});
    EXPECT_THROW(g.add_edge(0, 0, {1, 1}), ValidationError);
    EXPECT_THROW(g.add_edge(0, 2, {1, 1}), ValidationError);
    EXPECT_THROW(g.add_edge(0, 1, {0, 0}), ValidationError);
    EXPECT_THROW(g.add_edge(0, 1, {1}), ValidationError);
    EXPECT_THROW(g.add_node({1, NAN}), ValidationError);
    EXPECT_THROW(AttributedGraph(0), ValidationError);
    g.add_edge(1, 0, {5, 6});
    ASSERT_TRUE(g.edge(0, 1).has_value());
    EXPECT_EQ((*g.edge(0, 1))[1], 6.0);
    EXPECT_EQ(g.edges().begin()->first, (EdgeKey{0, 1}));
}

TEST(PadToOrder, IdentityWhenOrderMatches) {
    const auto x = testgen::running_x();
    EXPECT_EQ(pad_to_order(x, 2), x);
}

TEST(PadToOrder, EmptyGraphGetsIsolatedZeroNodes) {
    const auto g = pad_to_order(AttributedGraph(1), 3);
    ASSERT_EQ(g.order(), 3u);
    EXPECT_EQ(g.edge_count(), 0u);
    for (const auto& a : g.nodes()) EXPECT_EQ(a, Attr{0.0});
}

TEST(PadToOrder, KeepsEdgesAndZeroesNewNodes) {
    const auto g = pad_to_order(testgen::running_x(), 4);
    ASSERT_EQ(g.order(), 4u);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(*g.edge(0, 1)->begin(), 1.0);
    EXPECT_EQ(g.nodes()[2], Attr{0.0});
    EXPECT_EQ(g.nodes()[3], Attr{0.0});
}

TEST(PadToOrder, ShrinkingIsASizeError) { EXPECT_THROW(pad_to_order(testgen::running_x(), 1), SizeError); }

TEST(EdgeFlag, AppendsOneOnEdgesAndZeroOnNodes) {
    AttributedGraph g(1);
    g.add_node({2.5});
    g.add_node({0.0});
    g.add_edge(0, 1, {3.0});
    const auto f = attach_edge_flag(g);
    EXPECT_EQ(f.attr_dim(), 2u);
    EXPECT_EQ(f.nodes()[0], (Attr{2.5, 0.0}));
    const auto e = *f.edge(0, 1);
    EXPECT_EQ(Attr(e.begin(), e.end()), (Attr{3.0, 1.0}));
}

TEST(EdgeFlag, EdgelessGraphOnlyGrowsDimension) {
    AttributedGraph g(1);
    g.add_node({1.0});
    const auto f = attach_edge_flag(g);
    EXPECT_EQ(f.attr_dim(), 2u);
    EXPECT_EQ(f.edge_count(), 0u);
}

TEST(Representation, SingleNode) {
    AttributedGraph g(1);
    g.add_node({3.0});
    const auto r = to_representation(g);
    EXPECT_EQ(r.order(), 1u);
    EXPECT_EQ(r.cell(0, 0)[0], 3.0);
}

TEST(Representation, RunningExampleCells) {
    const auto r = to_representation(testgen::running_x());
    const std::vector<double> expect{1, 1, 1, 2};
    EXPECT_EQ(std::vector<double>(r.values().begin(), r.values().end()), expect);
    EXPECT_TRUE(r.is_symmetric());
}

TEST(Representation, RoundTripThroughGraph) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        const auto g = testgen::graph(rng, 0, 6, 3);
        EXPECT_EQ(from_representation(to_representation(g)), g);
    }
}

TEST(Representation, ZeroCellsBecomeIsolatedZeroNodes) {
    const auto g = from_representation(Representation(2, 1));
    EXPECT_EQ(g.order(), 2u);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Representation, AsymmetricIsRejected) {
    Representation r(2, 1);
    r.cell(0, 1)[0] = 1.0;
    EXPECT_THROW(from_representation(r), ValidationError);
}

TEST(Permutation, RejectsNonBijection) {
    EXPECT_THROW(Permutation({0, 0}), ValidationError);
    EXPECT_THROW(Permutation({0, 2}), ValidationError);
}

TEST(ApplyPermutation, IdentityAndSwap) {
    const auto r = to_representation(testgen::running_x());
    EXPECT_EQ(apply_permutation(r, Permutation::identity(2)), r);
    Representation expected(2, 1, {2, 1, 1, 1});
    // [[1,3],[3,2]] swapped -> [[2,3],[3,1]]
    Representation s(2, 1, {1, 3, 3, 2});
    EXPECT_EQ(apply_permutation(s, Permutation({1, 0})), Representation(2, 1, {2, 3, 3, 1}));
    EXPECT_EQ(apply_permutation(r, Permutation({1, 0})), expected);
}

TEST(ApplyPermutation, LengthMismatchIsSizeError) {
    EXPECT_THROW(apply_permutation(Representation(3, 1), Permutation::identity(2)), SizeError);
}

TEST(ApplyPermutation, InverseRestores) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const auto g = testgen::graph(rng, 1, 7, 2);
        const auto r = to_representation(g);
        const auto p = testgen::permutation(rng, g.order());
        EXPECT_EQ(apply_permutation(apply_permutation(r, p), p.inverse()), r);
    }
}

TEST(ApplyPermutation, NormIsInvariant) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto r = to_representation(testgen::graph(rng, 1, 8, 3));
        const auto p = testgen::permutation(rng, r.order());
        EXPECT_TRUE(testgen::close(apply_permutation(r, p).norm(), r.norm(), 1e-12));
    }
}

TEST(ApplyPermutation, IsAGroupAction) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto r = to_representation(testgen::graph(rng, 1, 7, 2));
        const auto p = testgen::permutation(rng, r.order());
        const auto q = testgen::permutation(rng, r.order());
        EXPECT_EQ(apply_permutation(apply_permutation(r, p), q), apply_permutation(r, q.after(p)));
    }
}

TEST(ApplyPermutation, PermutedGraphIsIsomorphic) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 30; ++t) {
        const auto g = testgen::graph(rng, 1, 6, 2);
        const auto h = permute(g, testgen::permutation(rng, g.order()));
        EXPECT_TRUE(testgen::close(exact_sdp(h, h).value, exact_sdp(g, g).value, 1e-12));
        EXPECT_TRUE(testgen::close(exact_sdp(g, h).value, exact_sdp(g, g).value, 1e-12));
    }
}

TEST(PadToOrder, ZeroPaddingLeavesSelfProductUnchanged) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 30; ++t) {
        const auto g = testgen::graph(rng, 1, 5, 2);
        const auto p = pad_to_order(g, g.order() + 2);
        EXPECT_TRUE(testgen::close(exact_sdp(p, p).value, exact_sdp(g, g).value, 1e-12));
    }
}
