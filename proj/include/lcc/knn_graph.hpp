#pragma once

// k-nearest-neighbor graph with Gaussian RBF edge weights.
//
// Nodes i and j are linked when either is among the other's k nearest
// neighbors (a point is never its own neighbor). The edge weight is
// exp(-beta * |z_i - z_j|^2); edges whose weight underflows to 0 are dropped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "lcc/dataset.hpp"
#include "lcc/error.hpp"
#include "lcc/graph.hpp"
#include "lcc/kdtree.hpp"
#include "lcc/matrix.hpp"
#include "lcc/parallel.hpp"
#include "lcc/random.hpp"

namespace lcc {

using KnnGraph = WeightedGraph;

inline double rbf_weight(std::span<const double> a, std::span<const double> b, double beta) {
    return std::exp(-beta * squared_distance(a, b));
}

enum class KnnMethod {
    automatic,   ///< kd-tree in low dimension, exhaustive otherwise
    exhaustive,  ///< O(N^2) reference
    kdtree,
};

struct KnnOptions {
    KnnMethod method = KnnMethod::automatic;
    std::size_t threads = 1;
};

/// Neighbor list of every row, each sorted by (distance, index).
inline std::vector<std::vector<Neighbor>> knn_lists(const Matrix& z, std::size_t k, const KnnOptions& opts = {}) {
    const std::size_t n = z.rows();
    if (k == 0) throw ParameterError("k must be positive");
    if (k >= n) {
        throw ParameterError("k must be smaller than the number of samples (k = " + std::to_string(k) +
                             ", N = " + std::to_string(n) + ")");
    }
    KnnMethod method = opts.method;
    if (method == KnnMethod::automatic) method = z.cols() <= 16 ? KnnMethod::kdtree : KnnMethod::exhaustive;

    std::vector<std::vector<Neighbor>> lists(n);
    if (method == KnnMethod::kdtree) {
        const KdTree tree(z);
        parallel_for(n, opts.threads, [&](std::size_t i) {
            lists[i] = tree.query(z.row(i), k, static_cast<std::uint32_t>(i));
        });
    } else {
        std::vector<std::uint32_t> all(n);
        std::iota(all.begin(), all.end(), 0u);
        parallel_for(n, opts.threads, [&](std::size_t i) {
            lists[i] = brute_force_knn(z, all, z.row(i), k, static_cast<std::uint32_t>(i));
        });
    }
    return lists;
}

inline KnnGraph build_knn_graph(const Matrix& z, std::size_t k, double beta = 1.0, const KnnOptions& opts = {}) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be a positive finite number");
    const auto lists = knn_lists(z, k, opts);

    std::vector<Edge> edges;
    edges.reserve(z.rows() * k);
    for (std::size_t i = 0; i < lists.size(); ++i) {
        for (const auto& nb : lists[i]) {
            const auto a = static_cast<NodeId>(std::min<std::size_t>(i, nb.index));
            const auto b = static_cast<NodeId>(std::max<std::size_t>(i, nb.index));
            edges.push_back({a, b, std::exp(-beta * nb.dist2)});
        }
    }
    // a mutual pair is nominated twice with bit-identical weights
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) { return x.i == y.i && x.j == y.j; }),
                edges.end());
    return KnnGraph::from_edges(z.rows(), std::move(edges));
}

/// beta = 1 / median squared pairwise distance. All pairs are used when there
/// are at most max_pairs of them, otherwise max_pairs seeded random pairs.
inline double median_beta(const Matrix& z, std::uint64_t seed, std::size_t max_pairs = 100000) {
    const std::size_t n = z.rows();
    if (n < 2) throw ParameterError("median beta needs at least two samples");
    std::vector<double> d2;
    const std::size_t total = n * (n - 1) / 2;
    if (total <= max_pairs) {
        d2.reserve(total);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) d2.push_back(squared_distance(z.row(i), z.row(j)));
    } else {
        Rng rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        d2.reserve(max_pairs);
        while (d2.size() < max_pairs) {
            const auto i = pick(rng), j = pick(rng);
            if (i != j) d2.push_back(squared_distance(z.row(i), z.row(j)));
        }
    }
    auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
    std::nth_element(d2.begin(), mid, d2.end());
    if (!(*mid > 0.0)) throw ParameterError("median squared distance is zero; cannot derive beta");
    return 1.0 / *mid;
}

/// Debug dump: one `i j w` line per edge, sorted by (i, j).
inline void write_graph_text(const WeightedGraph& g, std::ostream& out) {
    for (const auto& e : g.edges()) out << e.i << ' ' << e.j << ' ' << detail::format_double(e.weight) << '\n';
}

}  // namespace lcc
