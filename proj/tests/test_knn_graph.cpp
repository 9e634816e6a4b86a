#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "lcc/knn_graph.hpp"
#include "oracles.hpp"

using namespace lcc;

namespace {

Matrix column(std::initializer_list<double> values) { return Matrix(values.size(), 1, std::vector<double>(values)); }

std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(const WeightedGraph& g) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> out;
    for (const auto& e : g.edges()) out.emplace(e.i, e.j);
    return out;
}

Matrix random_points(std::size_t n, std::size_t d, std::mt19937_64& rng, bool on_grid) {
    Matrix z(n, d);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 3);
    for (auto& v : z.data()) v = on_grid ? grid(rng) : g(rng);
    return z;
}

}  // namespace

TEST(RbfWeight, Values) {
    const std::vector<double> a{0.0}, b{1.0}, far{1000.0};
    EXPECT_EQ(rbf_weight(a, a, 1.0), 1.0);
    EXPECT_NEAR(rbf_weight(a, b, 1.0), 0.3678794, 1e-7);
    EXPECT_EQ(rbf_weight(a, far, 1.0), 0.0);
}

TEST(KnnGraph, ThreePointLine) {
    const auto g = build_knn_graph(column({0, 1, 3}), 1, 1.0);
    ASSERT_EQ(g.n_edges(), 2u);
    EXPECT_DOUBLE_EQ(g.weight(0, 1), std::exp(-1.0));
    EXPECT_DOUBLE_EQ(g.weight(1, 2), std::exp(-4.0));
    EXPECT_EQ(g.weight(0, 2), 0.0);
}

TEST(KnnGraph, FullNeighborhoodIsComplete) {
    std::mt19937_64 rng(3);
    const auto z = random_points(9, 2, rng, false);
    const auto g = build_knn_graph(z, 8, 0.1);
    EXPECT_EQ(g.n_edges(), 9u * 8u / 2u);
    for (std::size_t v = 0; v < 9; ++v) EXPECT_EQ(g.neighbors(v).size(), 8u);
}

TEST(KnnGraph, IdenticalPointsGetUnitWeight) {
    const auto g = build_knn_graph(column({2.5, 2.5}), 1, 1.0);
    ASSERT_EQ(g.n_edges(), 1u);
    EXPECT_EQ(g.weight(0, 1), 1.0);
}

TEST(KnnGraph, UnderflowedEdgeIsDropped) {
    const auto g = build_knn_graph(column({0, 1, 1000}), 1, 1.0);
    EXPECT_EQ(g.n_edges(), 1u);
    EXPECT_EQ(g.weight(1, 2), 0.0);
    EXPECT_TRUE(g.neighbors(2).empty());
}

TEST(KnnGraph, InvalidK) {
    const auto z = column({0, 1, 2});
    EXPECT_THROW(build_knn_graph(z, 0), ParameterError);
    EXPECT_THROW(build_knn_graph(z, 3), ParameterError);
    EXPECT_THROW(build_knn_graph(z, 1, 0.0), ParameterError);
}

TEST(KnnGraph, DistanceTiesGoToSmallerIndex) {
    // node 1 is equidistant from 0 and 2
    const auto g = build_knn_graph(column({0, 1, 2}), 1, 1.0);
    EXPECT_GT(g.weight(0, 1), 0.0);
    EXPECT_GT(g.weight(1, 2), 0.0);
    EXPECT_EQ(g.n_edges(), 2u);
    const auto lists = knn_lists(column({0, 1, 2}), 1);
    EXPECT_EQ(lists[1][0].index, 0u);
}

TEST(KnnGraph, MatchesBruteForceOracle) {
    std::mt19937_64 rng(17);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 5 + rng() % 60, d = 1 + rng() % 6, k = 1 + rng() % std::min<std::size_t>(n - 1, 8);
        const auto z = random_points(n, d, rng, inst % 2 == 1);
        const auto expected = oracle::knn_edge_set(z, k);
        for (auto method : {KnnMethod::kdtree, KnnMethod::exhaustive}) {
            const auto g = build_knn_graph(z, k, 0.01, {method, 1});
            ASSERT_EQ(edge_set(g), expected) << "instance " << inst;
        }
    }
}

TEST(KnnGraph, KdTreeAndExhaustiveAgreeExactly) {
    std::mt19937_64 rng(5);
    for (int inst = 0; inst < 50; ++inst) {
        const auto z = random_points(200, 1 + inst % 8, rng, inst % 3 == 0);
        const auto a = build_knn_graph(z, 7, 0.5, {KnnMethod::kdtree, 1});
        const auto b = build_knn_graph(z, 7, 0.5, {KnnMethod::exhaustive, 1});
        ASSERT_EQ(a.n_edges(), b.n_edges());
        for (std::size_t e = 0; e < a.n_edges(); ++e) {
            ASSERT_EQ(a.edges()[e].i, b.edges()[e].i);
            ASSERT_EQ(a.edges()[e].j, b.edges()[e].j);
            ASSERT_EQ(a.edges()[e].weight, b.edges()[e].weight);
        }
    }
}

TEST(KnnGraph, SymmetricWithConsistentTotals) {
    std::mt19937_64 rng(8);
    const auto z = random_points(120, 4, rng, false);
    const auto g = build_knn_graph(z, 6, 0.3);
    double degree_sum = 0.0;
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        auto nb = g.neighbors(v);
        auto w = g.neighbor_weights(v);
        double k = 0.0;
        for (std::size_t p = 0; p < nb.size(); ++p) {
            EXPECT_EQ(g.weight(nb[p], v), w[p]);
            k += w[p];
        }
        EXPECT_DOUBLE_EQ(g.degree(v), k);
        degree_sum += k;
    }
    EXPECT_NEAR(degree_sum, 2.0 * g.total_weight(), 1e-9);
    EXPECT_LE(g.n_edges(), 120u * 6u);
    EXPECT_GE(g.n_edges(), 120u * 6u / 2u);
}

TEST(KnnGraph, ThreadCountDoesNotChangeGraph) {
    std::mt19937_64 rng(21);
    const auto z = random_points(300, 20, rng, false);
    const auto a = build_knn_graph(z, 10, 0.2, {KnnMethod::automatic, 1});
    const auto b = build_knn_graph(z, 10, 0.2, {KnnMethod::automatic, 4});
    std::ostringstream sa, sb;
    write_graph_text(a, sa);
    write_graph_text(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(KnnGraph, MedianBeta) {
    const auto z = column({0, 1, 3});
    // squared distances 1, 4, 9
    EXPECT_DOUBLE_EQ(median_beta(z, 0), 0.25);
    EXPECT_THROW(median_beta(column({1, 1, 1}), 0), ParameterError);
}

TEST(WeightedGraph, SelfLoopsAndParallelEdges) {
    const auto g = WeightedGraph::from_edges(3, {{0, 1, 1.0}, {1, 0, 2.0}, {2, 2, 0.5}, {1, 2, 0.0}});
    EXPECT_EQ(g.n_edges(), 2u);
    EXPECT_EQ(g.weight(0, 1), 3.0);
    EXPECT_EQ(g.self_loop(2), 0.5);
    EXPECT_EQ(g.degree(2), 1.0);
    EXPECT_EQ(g.total_weight(), 3.5);
    EXPECT_THROW(WeightedGraph::from_edges(2, {{0, 2, 1.0}}), ParameterError);
    EXPECT_THROW(WeightedGraph::from_edges(2, {{0, 1, -1.0}}), ParameterError);
}
