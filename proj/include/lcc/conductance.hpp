#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "lcc/error.hpp"
#include "lcc/graph.hpp"
#include "lcc/partition.hpp"

namespace lcc {

/// phi(C) = cut(C, V \ C) / min(vol(C), vol(V \ C)), and 1 when the
/// denominator is 0. Volumes are weighted degrees.
inline double conductance_set(const WeightedGraph& g, std::span<const NodeId> nodes) {
    if (nodes.empty()) throw ParameterError("conductance of an empty node set is undefined");
    std::vector<bool> inside(g.n_nodes(), false);
    for (auto v : nodes) {
        if (v >= g.n_nodes()) throw ParameterError("node id out of range");
        inside[v] = true;
    }
    double cut = 0.0, volume = 0.0, rest = 0.0;
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        if (!inside[v]) {
            rest += g.degree(v);
            continue;
        }
        auto nb = g.neighbors(v);
        auto nw = g.neighbor_weights(v);
        double outside = 0.0;
        for (std::size_t p = 0; p < nb.size(); ++p) {
            if (!inside[nb[p]]) outside += nw[p];
        }
        volume += g.degree(v);
        cut += outside;
    }
    const double denom = std::min(volume, rest);
    if (!(denom > 0.0)) return 1.0;
    return std::clamp(cut / denom, 0.0, 1.0);
}

struct ClusteringConductance {
    /// Volume-weighted mean of phi over clusters, in [0, 1].
    double phi = 1.0;
    /// Same sum divided by |V| instead of the total volume.
    double per_node = 0.0;
    std::vector<double> per_cluster;
};

/// Per-cluster conductance. Each node's cut share is summed over its
/// neighbor list in the same order as its degree, so a cluster without
/// internal edges gets cut == vol bit for bit and phi exactly 1.
inline ClusteringConductance conductance_details(const WeightedGraph& g, std::span<const ClusterId> cluster_of,
                                                 std::size_t n_clusters) {
    if (cluster_of.size() != g.n_nodes()) throw ParameterError("partition size does not match graph");
    std::vector<double> volume(n_clusters, 0.0), cut(n_clusters, 0.0);
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        const auto c = cluster_of[v];
        if (c >= n_clusters) throw ParameterError("cluster id out of range");
        auto nb = g.neighbors(v);
        auto nw = g.neighbor_weights(v);
        double outside = 0.0;
        for (std::size_t p = 0; p < nb.size(); ++p) {
            if (cluster_of[nb[p]] != c) outside += nw[p];
        }
        volume[c] += g.degree(v);
        cut[c] += outside;
    }
    // summed in the same node order as volume[], so a one-cluster partition
    // gets a complement volume of exactly 0
    double total = 0.0;
    for (std::size_t v = 0; v < g.n_nodes(); ++v) total += g.degree(v);
    ClusteringConductance out;
    out.per_cluster.resize(n_clusters);
    double weighted = 0.0, volume_sum = 0.0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        const double denom = std::min(volume[c], total - volume[c]);
        const double phi = denom > 0.0 ? std::clamp(cut[c] / denom, 0.0, 1.0) : 1.0;
        out.per_cluster[c] = phi;
        weighted += volume[c] * phi;
        volume_sum += volume[c];
    }
    out.phi = volume_sum > 0.0 ? std::clamp(weighted / volume_sum, 0.0, 1.0) : 1.0;
    out.per_node = g.n_nodes() > 0 ? weighted / static_cast<double>(g.n_nodes()) : 0.0;
    return out;
}

/// Phi = sum_c vol(c) phi(c) / sum_c vol(c); 1 for an edgeless graph.
inline double conductance_clustering(const WeightedGraph& g, const Partition& p) {
    return conductance_details(g, p.cluster_of, p.n_clusters).phi;
}

}  // namespace lcc
