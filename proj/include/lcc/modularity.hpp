#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "lcc/error.hpp"
#include "lcc/graph.hpp"
#include "lcc/partition.hpp"

namespace lcc {

/// Newman modularity
///
///   Q = 1/(2m) * sum_{i,j} (A_ij - k_i k_j / (2m)) * [c_i == c_j]
///
/// over ordered pairs. A self-loop of weight w contributes 2w to its diagonal
/// entry (see WeightedGraph). Q = 0 when the graph has no weight. `community`
/// may hold any ids, not just contiguous ones.
inline double modularity(const WeightedGraph& g, std::span<const ClusterId> community) {
    if (community.size() != g.n_nodes()) {
        throw ParameterError("partition covers " + std::to_string(community.size()) + " nodes, graph has " +
                             std::to_string(g.n_nodes()));
    }
    const double m = g.total_weight();
    if (m == 0.0) return 0.0;
    const std::size_t n_ids = community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
    std::vector<double> internal(n_ids, 0.0), total(n_ids, 0.0);
    for (const auto& e : g.edges()) {
        if (community[e.i] == community[e.j]) internal[community[e.i]] += 2.0 * e.weight;
    }
    for (std::size_t v = 0; v < g.n_nodes(); ++v) total[community[v]] += g.degree(v);
    double q = 0.0;
    for (std::size_t c = 0; c < n_ids; ++c) q += internal[c] - total[c] * total[c] / (2.0 * m);
    return q / (2.0 * m);
}

inline double modularity(const WeightedGraph& g, const Partition& p) { return modularity(g, std::span(p.cluster_of)); }

/// Collapses every community into one node. Edges between communities are
/// summed; edges inside a community become that node's self-loop, so the
/// self-loop weight is the total internal weight.
inline WeightedGraph aggregate(const WeightedGraph& g, const Partition& p) {
    std::vector<Edge> edges;
    edges.reserve(g.n_edges());
    for (const auto& e : g.edges()) {
        edges.push_back({p.cluster_of[e.i], p.cluster_of[e.j], e.weight});
    }
    return WeightedGraph::from_edges(p.n_clusters, std::move(edges));
}

}  // namespace lcc
