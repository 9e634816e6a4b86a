#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcc/error.hpp"

namespace lcc {

using ClusterId = std::uint32_t;

/// Cluster id per node. Ids are contiguous in [0, n_clusters) and every
/// cluster is nonempty.
struct Partition {
    std::vector<ClusterId> cluster_of;
    std::size_t n_clusters = 0;

    std::size_t size() const noexcept { return cluster_of.size(); }

    /// Relabels arbitrary ids to contiguous ones in order of first appearance.
    template <class Id>
    static Partition from_labels(std::span<const Id> labels) {
        Partition p;
        p.cluster_of.resize(labels.size());
        std::unordered_map<std::uint64_t, ClusterId> rank;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            auto [it, fresh] = rank.try_emplace(static_cast<std::uint64_t>(labels[i]),
                                                static_cast<ClusterId>(p.n_clusters));
            if (fresh) ++p.n_clusters;
            p.cluster_of[i] = it->second;
        }
        return p;
    }

    template <class Id>
    static Partition from_labels(const std::vector<Id>& labels) {
        return from_labels(std::span<const Id>(labels));
    }

    static Partition singletons(std::size_t n) {
        Partition p;
        p.cluster_of.resize(n);
        for (std::size_t i = 0; i < n; ++i) p.cluster_of[i] = static_cast<ClusterId>(i);
        p.n_clusters = n;
        return p;
    }

    /// Member lists, each ascending.
    std::vector<std::vector<std::uint32_t>> members() const {
        std::vector<std::vector<std::uint32_t>> out(n_clusters);
        for (std::size_t i = 0; i < cluster_of.size(); ++i) out[cluster_of[i]].push_back(static_cast<std::uint32_t>(i));
        return out;
    }

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> out(n_clusters, 0);
        for (auto c : cluster_of) ++out[c];
        return out;
    }

    friend bool operator==(const Partition&, const Partition&) = default;
};

inline void validate(const Partition& p) {
    std::vector<bool> used(p.n_clusters, false);
    for (auto c : p.cluster_of) {
        if (c >= p.n_clusters) throw ValidationError("cluster id " + std::to_string(c) + " out of range");
        used[c] = true;
    }
    for (std::size_t c = 0; c < used.size(); ++c) {
        if (!used[c]) throw ValidationError("cluster " + std::to_string(c) + " is empty");
    }
}

/// Text dump: one `node_id cluster_id` line per node.
inline void write_partition_text(const Partition& p, std::ostream& out) {
    for (std::size_t i = 0; i < p.cluster_of.size(); ++i) out << i << ' ' << p.cluster_of[i] << '\n';
}

/// Reads a `node_id cluster_id` dump. Node ids must run 0..N-1 in order;
/// cluster ids are renumbered by first appearance.
inline Partition read_partition_text(std::istream& in) {
    std::vector<std::uint64_t> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        std::uint64_t node = 0, cluster = 0;
        if (!(fields >> node >> cluster)) {
            throw FormatError("partition line " + std::to_string(line_no) + ": expected 'node_id cluster_id'");
        }
        if (node != ids.size()) {
            throw FormatError("partition line " + std::to_string(line_no) + ": expected node id " +
                              std::to_string(ids.size()));
        }
        ids.push_back(cluster);
    }
    return Partition::from_labels(ids);
}

}  // namespace lcc
