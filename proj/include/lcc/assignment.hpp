#pragma once

// Matching detected clusters to true labels.
//
// An assignment alpha maps every cluster to one true label (several clusters
// may share a label, a label may receive none). It is optimal when
//
//   sum_t |{i : y_i = t} ∩ {i : alpha(cluster_i) = t}|
//
// is maximal. That sum equals sum_c counts[alpha(c)][c], so the optimum
// separates per cluster: alpha(c) = argmax_t counts[t][c].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcc/dataset.hpp"
#include "lcc/error.hpp"
#include "lcc/partition.hpp"

namespace lcc {

/// counts[t][c] = number of samples with label label_ids[t] in cluster c.
struct OverlapMatrix {
    std::vector<LabelId> label_ids;  // ascending
    std::size_t n_clusters = 0;
    std::vector<std::vector<std::uint64_t>> counts;

    std::size_t n_labels() const noexcept { return label_ids.size(); }

    /// Row index of a label id, or npos if absent.
    std::size_t label_index(LabelId id) const {
        auto it = std::lower_bound(label_ids.begin(), label_ids.end(), id);
        return (it != label_ids.end() && *it == id) ? static_cast<std::size_t>(it - label_ids.begin()) : npos;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct Assignment {
    /// alpha[c] = true label id matched to cluster c.
    std::vector<LabelId> alpha;
    std::uint64_t objective = 0;
};

inline OverlapMatrix overlap_matrix(std::span<const LabelId> y, const Partition& partition) {
    if (y.size() != partition.size()) {
        throw ParameterError("label vector has " + std::to_string(y.size()) + " entries, partition has " +
                             std::to_string(partition.size()));
    }
    OverlapMatrix m;
    m.label_ids = distinct_labels(y);
    m.n_clusters = partition.n_clusters;
    m.counts.assign(m.label_ids.size(), std::vector<std::uint64_t>(m.n_clusters, 0));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (partition.cluster_of[i] >= m.n_clusters) throw ParameterError("cluster id out of range");
        ++m.counts[m.label_index(y[i])][partition.cluster_of[i]];
    }
    return m;
}

/// sum_c counts[alpha(c)][c].
inline std::uint64_t assignment_objective(const OverlapMatrix& overlap, std::span<const LabelId> alpha) {
    if (alpha.size() != overlap.n_clusters) throw ParameterError("alpha must map every cluster");
    std::uint64_t total = 0;
    for (std::size_t c = 0; c < alpha.size(); ++c) {
        const auto t = overlap.label_index(alpha[c]);
        if (t == OverlapMatrix::npos) {
            throw ParameterError("alpha maps cluster " + std::to_string(c) + " to unknown label " +
                                 std::to_string(alpha[c]));
        }
        total += overlap.counts[t][c];
    }
    return total;
}

/// Per-cluster argmax, ties to the smallest label id.
inline Assignment optimal_assignment(const OverlapMatrix& overlap) {
    if (overlap.label_ids.empty() && overlap.n_clusters > 0) throw ParameterError("overlap matrix has no labels");
    Assignment a;
    a.alpha.resize(overlap.n_clusters);
    for (std::size_t c = 0; c < overlap.n_clusters; ++c) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < overlap.n_labels(); ++t) {
            if (overlap.counts[t][c] > overlap.counts[best][c]) best = t;
        }
        a.alpha[c] = overlap.label_ids[best];
        a.objective += overlap.counts[best][c];
    }
    return a;
}

/// Enumerates all |labels|^|clusters| assignments and keeps the
/// lexicographically smallest optimum. Refuses search spaces above 1e6.
inline Assignment exhaustive_assignment_oracle(const OverlapMatrix& overlap) {
    const std::size_t n_labels = overlap.n_labels();
    const std::size_t n_clusters = overlap.n_clusters;
    if (n_labels == 0) throw ParameterError("overlap matrix has no labels");
    double space = std::pow(static_cast<double>(n_labels), static_cast<double>(n_clusters));
    if (space > 1e6) throw ParameterError("assignment search space too large for exhaustive enumeration");

    std::vector<std::size_t> digits(n_clusters, 0);  // digits[0] most significant
    Assignment best;
    bool have = false;
    while (true) {
        std::uint64_t value = 0;
        for (std::size_t c = 0; c < n_clusters; ++c) value += overlap.counts[digits[c]][c];
        if (!have || value > best.objective) {
            have = true;
            best.objective = value;
            best.alpha.resize(n_clusters);
            for (std::size_t c = 0; c < n_clusters; ++c) best.alpha[c] = overlap.label_ids[digits[c]];
        }
        std::size_t pos = n_clusters;
        while (pos > 0 && ++digits[pos - 1] == n_labels) digits[--pos] = 0;
        if (pos == 0) break;
    }
    return best;
}

}  // namespace lcc
