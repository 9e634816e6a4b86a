#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "lcc/error.hpp"

namespace lcc {

using NodeId = std::uint32_t;

/// Undirected weighted edge, stored canonically with i <= j. i == j is a
/// self-loop carrying the total weight of edges folded into that node.
struct Edge {
    NodeId i = 0;
    NodeId j = 0;
    double weight = 0.0;
};

/// Symmetric weighted graph in CSR form.
///
/// Degree convention: k_i = sum_{j != i} w_ij + 2 * selfloop_i, so that
/// sum_i k_i = 2m where m sums every edge (self-loops included) once. This is
/// what keeps modularity invariant under community aggregation.
class WeightedGraph {
public:
    WeightedGraph() = default;

    /// Builds a graph from an edge list. Parallel edges are summed and
    /// zero-weight edges are dropped.
    static WeightedGraph from_edges(std::size_t n_nodes, std::vector<Edge> edges) {
        for (auto& e : edges) {
            if (e.i >= n_nodes || e.j >= n_nodes) throw ParameterError("edge endpoint out of range");
            if (!(e.weight >= 0.0)) throw ParameterError("edge weights must be nonnegative");
            if (e.i > e.j) std::swap(e.i, e.j);
        }
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        std::vector<Edge> merged;
        merged.reserve(edges.size());
        for (const auto& e : edges) {
            if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j) {
                merged.back().weight += e.weight;
            } else {
                merged.push_back(e);
            }
        }
        std::erase_if(merged, [](const Edge& e) { return e.weight == 0.0; });

        WeightedGraph g;
        g.n_ = n_nodes;
        g.self_loop_.assign(n_nodes, 0.0);
        g.degree_.assign(n_nodes, 0.0);
        std::vector<std::size_t> count(n_nodes, 0);
        for (const auto& e : merged) {
            if (e.i == e.j) continue;
            ++count[e.i];
            ++count[e.j];
        }
        g.offsets_.assign(n_nodes + 1, 0);
        for (std::size_t v = 0; v < n_nodes; ++v) g.offsets_[v + 1] = g.offsets_[v] + count[v];
        g.targets_.resize(g.offsets_.back());
        g.weights_.resize(g.offsets_.back());
        std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        // merged is sorted by (i, j), so the first pass appends neighbors
        // below v in ascending order and the second those above v.
        for (const auto& e : merged) {
            if (e.i == e.j) {
                g.self_loop_[e.i] += e.weight;
                continue;
            }
            g.targets_[cursor[e.j]] = e.i;
            g.weights_[cursor[e.j]++] = e.weight;
        }
        for (const auto& e : merged) {
            if (e.i == e.j) continue;
            g.targets_[cursor[e.i]] = e.j;
            g.weights_[cursor[e.i]++] = e.weight;
        }
        for (std::size_t v = 0; v < n_nodes; ++v) {
            auto lo = g.offsets_[v], hi = g.offsets_[v + 1];
            double k = 2.0 * g.self_loop_[v];
            for (auto p = lo; p < hi; ++p) k += g.weights_[p];
            g.degree_[v] = k;
        }
        double m = 0.0;
        for (const auto& e : merged) m += e.weight;
        g.total_weight_ = m;
        g.edges_ = std::move(merged);
        return g;
    }

    std::size_t n_nodes() const noexcept { return n_; }
    /// Number of stored edges, self-loops included.
    std::size_t n_edges() const noexcept { return edges_.size(); }

    std::span<const NodeId> neighbors(std::size_t v) const {
        return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::span<const double> neighbor_weights(std::size_t v) const {
        return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    double self_loop(std::size_t v) const { return self_loop_[v]; }
    double degree(std::size_t v) const { return degree_[v]; }
    std::span<const double> degrees() const noexcept { return degree_; }
    /// m: sum of all edge weights, each undirected edge counted once.
    double total_weight() const noexcept { return total_weight_; }
    /// Canonical edge list sorted by (i, j).
    std::span<const Edge> edges() const noexcept { return edges_; }

    /// Weight of edge {a, b}, 0 when absent.
    double weight(std::size_t a, std::size_t b) const {
        if (a == b) return self_loop_[a];
        auto nb = neighbors(a);
        auto it = std::lower_bound(nb.begin(), nb.end(), static_cast<NodeId>(b));
        if (it == nb.end() || *it != b) return 0.0;
        return weights_[offsets_[a] + static_cast<std::size_t>(it - nb.begin())];
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> targets_;
    std::vector<double> weights_;
    std::vector<double> self_loop_;
    std::vector<double> degree_;
    std::vector<Edge> edges_;
    double total_weight_ = 0.0;
};

}  // namespace lcc
