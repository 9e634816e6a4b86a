#pragma once

// k-NN pressure clustering (peer pressure on the k-NN graph).
//
// Every node starts alone. A sweep moves all nodes simultaneously to the
// community carrying the largest total edge weight among their neighbors,
// i.e. row-wise argmax of A * B where B is the one-hot membership matrix.
// Sweeps continue while the clustering conductance strictly decreases.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lcc/conductance.hpp"
#include "lcc/error.hpp"
#include "lcc/graph.hpp"
#include "lcc/parallel.hpp"
#include "lcc/partition.hpp"
#include "lcc/random.hpp"

namespace lcc {

struct PressureState {
    /// Column of the single nonzero in each row of the membership matrix.
    std::vector<ClusterId> membership;
    /// Conductance of every accepted clustering, starting with singletons.
    std::vector<double> conductance_history;
    std::size_t sweeps = 0;
};

struct PressureResult {
    Partition partition;
    PressureState state;
};

namespace detail {

/// Picks the arg-max community from a vote vector, ties broken uniformly at
/// random by a stream keyed on (seed, sweep, node).
inline ClusterId pick_vote(std::span<const ClusterId> ids, std::span<const double> votes, ClusterId current,
                           std::uint64_t seed, std::size_t sweep, std::size_t node) {
    if (ids.empty()) return current;
    double best = votes[0];
    for (double v : votes) best = std::max(best, v);
    std::vector<ClusterId> tied;
    for (std::size_t a = 0; a < ids.size(); ++a) {
        if (votes[a] == best) tied.push_back(ids[a]);
    }
    if (tied.size() == 1) return tied.front();
    std::sort(tied.begin(), tied.end());
    auto rng = keyed_rng(seed, {sweep, node});
    std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
    return tied[pick(rng)];
}

/// Sparse vote: row i of A*B accumulated over the nonzeros of row i of A.
inline std::vector<ClusterId> sparse_sweep(const WeightedGraph& g, std::span<const ClusterId> membership,
                                           std::uint64_t seed, std::size_t sweep, std::size_t threads) {
    const std::size_t n = g.n_nodes();
    std::vector<ClusterId> next(n);
    parallel_for(n, threads, [&](std::size_t i) {
        auto nb = g.neighbors(i);
        auto nw = g.neighbor_weights(i);
        std::vector<ClusterId> ids;
        std::vector<double> votes;
        for (std::size_t p = 0; p < nb.size(); ++p) {
            const ClusterId c = membership[nb[p]];
            auto it = std::find(ids.begin(), ids.end(), c);
            if (it == ids.end()) {
                ids.push_back(c);
                votes.push_back(nw[p]);
            } else {
                votes[static_cast<std::size_t>(it - ids.begin())] += nw[p];
            }
        }
        next[i] = pick_vote(ids, votes, membership[i], seed, sweep, i);
    });
    return next;
}

/// Conductance of a membership vector, evaluated on its first-appearance
/// relabeling so that renaming communities cannot change the value.
inline double membership_conductance(const WeightedGraph& g, std::span<const ClusterId> membership) {
    const auto p = Partition::from_labels(membership);
    return conductance_details(g, p.cluster_of, p.n_clusters).phi;
}

using SweepFn = std::vector<ClusterId> (*)(const WeightedGraph&, std::span<const ClusterId>, std::uint64_t,
                                           std::size_t, std::size_t);

inline PressureResult run_pressure(const WeightedGraph& g, std::uint64_t seed, std::size_t max_iters,
                                   std::size_t threads, SweepFn sweep_fn) {
    if (max_iters == 0) throw ParameterError("max_iters must be positive");
    const std::size_t n = g.n_nodes();
    PressureState state;
    state.membership.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.membership[i] = static_cast<ClusterId>(i);
    state.conductance_history.push_back(membership_conductance(g, state.membership));

    for (std::size_t sweep = 1; sweep <= max_iters; ++sweep) {
        state.sweeps = sweep;
        auto next = sweep_fn(g, state.membership, seed, sweep, threads);
        const double phi = membership_conductance(g, next);
        if (!(phi < state.conductance_history.back())) break;
        state.membership = std::move(next);
        state.conductance_history.push_back(phi);
    }
    PressureResult result{Partition::from_labels(state.membership), std::move(state)};
    return result;
}

}  // namespace detail

inline PressureResult knn_pressure(const WeightedGraph& g, std::uint64_t seed, std::size_t max_iters = 100,
                                   std::size_t threads = 1) {
    return detail::run_pressure(g, seed, max_iters, threads, &detail::sparse_sweep);
}

}  // namespace lcc
