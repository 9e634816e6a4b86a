#pragma once

// Louvain community detection with optional Leiden refinement.
//
// Each pass: (1) local moves, nodes visited in a seeded random order and
// moved to the neighboring community with the largest positive modularity
// gain until a sweep moves nothing; (2) in leiden mode, refinement of every
// community into well-connected subcommunities; (3) aggregation of the
// (refined) communities into the nodes of the next level graph. Passes stop
// once local moving leaves every node of the level graph on its own.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "lcc/error.hpp"
#include "lcc/graph.hpp"
#include "lcc/modularity.hpp"
#include "lcc/partition.hpp"
#include "lcc/random.hpp"

namespace lcc {

enum class CommunityMode { louvain, leiden };

struct CommunityConfig {
    CommunityMode mode = CommunityMode::leiden;
    std::uint64_t seed = 0;
    double gain_tolerance = 1e-12;
    std::size_t max_passes = 100;
    /// Leiden merge randomness: a refinement merge with gain dH (in edge
    /// weight units) is drawn with probability proportional to exp(dH / theta).
    double refinement_theta = 0.01;
};

/// One accepted local move on a level graph. `before` is the community vector
/// of that level graph just before the move.
struct MoveEvent {
    const WeightedGraph& graph;
    std::span<const ClusterId> before;
    NodeId node;
    ClusterId from;
    ClusterId to;
    double gain;
    std::size_t pass;
};

using MoveObserver = std::function<void(const MoveEvent&)>;

struct LouvainResult {
    Partition partition;
    double modularity = 0.0;
    std::size_t passes = 0;
    std::size_t moves = 0;
};

namespace detail {

/// Scratch accumulator of per-community weights touched by one node.
class CommunityWeights {
public:
    explicit CommunityWeights(std::size_t n) : weight_(n, 0.0), seen_(n, false) {}

    void add(ClusterId c, double w) {
        if (!seen_[c]) {
            seen_[c] = true;
            touched_.push_back(c);
        }
        weight_[c] += w;
    }
    double get(ClusterId c) const { return weight_[c]; }
    std::vector<ClusterId>& touched() { return touched_; }

    void clear() {
        for (auto c : touched_) {
            weight_[c] = 0.0;
            seen_[c] = false;
        }
        touched_.clear();
    }

private:
    std::vector<double> weight_;
    std::vector<bool> seen_;
    std::vector<ClusterId> touched_;
};

/// Gain of moving v (degree kv) out of `from` into `to`:
///   dQ = (k_v,to - k_v,from') / m - kv * (tot_to - tot_from') / (2 m^2)
/// where from' is `from` without v.
inline double move_gain(double w_to, double w_from, double tot_to, double tot_from_without, double kv, double m) {
    return (w_to - w_from) / m - kv * (tot_to - tot_from_without) / (2.0 * m * m);
}

/// Local moving phase. Returns the number of accepted moves.
inline std::size_t local_moves(const WeightedGraph& g, std::vector<ClusterId>& comm, Rng& rng, double tolerance,
                               std::size_t pass, const MoveObserver* observer) {
    const std::size_t n = g.n_nodes();
    const double m = g.total_weight();
    if (m == 0.0) return 0;
    std::vector<double> tot(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) tot[comm[v]] += g.degree(v);

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0u);
    CommunityWeights weights(n);
    std::size_t moves = 0;
    bool moved = true;
    while (moved) {
        moved = false;
        std::shuffle(order.begin(), order.end(), rng);
        for (NodeId v : order) {
            const ClusterId from = comm[v];
            const double kv = g.degree(v);
            auto nb = g.neighbors(v);
            auto nw = g.neighbor_weights(v);
            weights.clear();
            for (std::size_t p = 0; p < nb.size(); ++p) weights.add(comm[nb[p]], nw[p]);
            const double w_from = weights.get(from);
            const double tot_from_without = tot[from] - kv;

            ClusterId best = from;
            double best_gain = 0.0;
            for (ClusterId c : weights.touched()) {
                if (c == from) continue;
                const double gain = move_gain(weights.get(c), w_from, tot[c], tot_from_without, kv, m);
                if (gain > tolerance && (gain > best_gain || (gain == best_gain && c < best))) {
                    best = c;
                    best_gain = gain;
                }
            }
            if (best == from) continue;
            if (observer && *observer) (*observer)(MoveEvent{g, comm, v, from, best, best_gain, pass});
            tot[from] -= kv;
            tot[best] += kv;
            comm[v] = best;
            moved = true;
            ++moves;
        }
    }
    return moves;
}

inline Partition refine(const WeightedGraph& g, const Partition& parent, Rng& rng, double theta) {
    const std::size_t n = g.n_nodes();
    const double m = g.total_weight();
    if (m == 0.0) return Partition::singletons(n);

    std::vector<ClusterId> refined(n);
    std::iota(refined.begin(), refined.end(), 0u);
    std::vector<std::size_t> size(n, 1);
    std::vector<double> volume(g.degrees().begin(), g.degrees().end());
    // external[C] = weight between refined cluster C and the rest of its parent
    std::vector<double> external(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        auto nb = g.neighbors(v);
        auto nw = g.neighbor_weights(v);
        for (std::size_t p = 0; p < nb.size(); ++p) {
            if (parent.cluster_of[nb[p]] == parent.cluster_of[v]) external[v] += nw[p];
        }
    }

    const double two_m = 2.0 * m;
    CommunityWeights weights(n);
    std::vector<ClusterId> cands;
    std::vector<double> gains, probs;
    for (auto& members : parent.members()) {
        double parent_volume = 0.0;
        for (auto v : members) parent_volume += g.degree(v);
        const auto well_connected = [&](ClusterId c) {
            return external[c] >= volume[c] * (parent_volume - volume[c]) / two_m;
        };

        std::shuffle(members.begin(), members.end(), rng);
        for (auto v : members) {
            const ClusterId own = refined[v];
            if (size[own] != 1 || !well_connected(own)) continue;

            weights.clear();
            auto nb = g.neighbors(v);
            auto nw = g.neighbor_weights(v);
            for (std::size_t p = 0; p < nb.size(); ++p) {
                if (parent.cluster_of[nb[p]] == parent.cluster_of[v]) weights.add(refined[nb[p]], nw[p]);
            }
            const double kv = g.degree(v);
            cands.assign(1, own);
            gains.assign(1, 0.0);
            auto& touched = weights.touched();
            std::sort(touched.begin(), touched.end());
            for (ClusterId c : touched) {
                if (c == own || weights.get(c) <= 0.0 || !well_connected(c)) continue;
                const double gain = weights.get(c) - kv * volume[c] / two_m;
                if (gain >= 0.0) {
                    cands.push_back(c);
                    gains.push_back(gain);
                }
            }
            if (cands.size() == 1) continue;

            const double top = *std::max_element(gains.begin(), gains.end());
            probs.resize(gains.size());
            for (std::size_t a = 0; a < gains.size(); ++a) probs[a] = std::exp((gains[a] - top) / theta);
            std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
            const ClusterId target = cands[pick(rng)];
            if (target == own) continue;

            const double w_vc = weights.get(target);
            refined[v] = target;
            size[own] = 0;
            ++size[target];
            volume[target] += volume[own];
            external[target] += external[own] - 2.0 * w_vc;
        }
    }
    return Partition::from_labels(refined);
}

}  // namespace detail

/// Splits every community of `partition` into subcommunities that are
/// connected in the induced subgraph (Leiden refinement). The result is a
/// subpartition of the input.
inline Partition leiden_refine(const WeightedGraph& g, const Partition& partition, std::uint64_t seed,
                               double theta = 0.01) {
    if (partition.size() != g.n_nodes()) throw ParameterError("partition size does not match graph");
    if (!(theta > 0.0)) throw ParameterError("refinement theta must be positive");
    auto rng = keyed_rng(seed, {0x7265'6669'6e65ULL});
    return detail::refine(g, partition, rng, theta);
}

inline LouvainResult louvain_detailed(const WeightedGraph& graph, const CommunityConfig& config,
                                      const MoveObserver* observer = nullptr) {
    if (!(config.gain_tolerance > 0.0)) throw ParameterError("gain_tolerance must be positive");
    if (config.max_passes == 0) throw ParameterError("max_passes must be positive");
    if (!(config.refinement_theta > 0.0)) throw ParameterError("refinement_theta must be positive");

    LouvainResult result;
    WeightedGraph level = graph;
    std::vector<ClusterId> node_of(graph.n_nodes());
    std::iota(node_of.begin(), node_of.end(), 0u);
    std::vector<ClusterId> comm(node_of);

    while (result.passes < config.max_passes) {
        const std::size_t pass = result.passes++;
        auto move_rng = keyed_rng(config.seed, {pass, 0});
        result.moves += detail::local_moves(level, comm, move_rng, config.gain_tolerance, pass, observer);

        const Partition communities = Partition::from_labels(comm);
        if (communities.n_clusters == level.n_nodes()) break;

        Partition collapse = communities;
        std::vector<ClusterId> next(communities.n_clusters);
        std::iota(next.begin(), next.end(), 0u);
        if (config.mode == CommunityMode::leiden) {
            auto refine_rng = keyed_rng(config.seed, {pass, 1});
            Partition refined = detail::refine(level, communities, refine_rng, config.refinement_theta);
            // an all-singleton refinement would not shrink the graph
            if (refined.n_clusters < level.n_nodes()) {
                next.assign(refined.n_clusters, 0);
                for (std::size_t v = 0; v < level.n_nodes(); ++v) {
                    next[refined.cluster_of[v]] = communities.cluster_of[v];
                }
                collapse = std::move(refined);
            }
        }
        level = aggregate(level, collapse);
        for (auto& id : node_of) id = collapse.cluster_of[id];
        comm = std::move(next);
    }

    std::vector<ClusterId> labels(graph.n_nodes());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = comm[node_of[i]];
    result.partition = Partition::from_labels(labels);
    result.modularity = modularity(graph, result.partition);
    return result;
}

inline Partition louvain(const WeightedGraph& graph, const CommunityConfig& config) {
    return louvain_detailed(graph, config).partition;
}

}  // namespace lcc
