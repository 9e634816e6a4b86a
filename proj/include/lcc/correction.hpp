#pragma once

// Correction targets and the clustering loss.
//
// A sample is correctly clustered (CC) when its cluster is matched to its own
// label, misclustered (MC) otherwise. An MC sample is correctible when its
// class holds at least k CC samples; its target is the centroid of the k
// nearest of them. The loss is
//
//   L = 1 / (sqrt(d) * n_corr) * sum_{i correctible} |z_i - target_i|
//
// with targets held constant.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lcc/assignment.hpp"
#include "lcc/dataset.hpp"
#include "lcc/error.hpp"
#include "lcc/kdtree.hpp"
#include "lcc/matrix.hpp"
#include "lcc/parallel.hpp"
#include "lcc/partition.hpp"
#include "lcc/random.hpp"

namespace lcc {

enum class CorrectionMode { exact, approximate, exact_orthogonal };

inline const char* to_string(CorrectionMode mode) {
    switch (mode) {
        case CorrectionMode::exact: return "exact";
        case CorrectionMode::approximate: return "approximate";
        case CorrectionMode::exact_orthogonal: return "exact+orthogonal";
    }
    return "unknown";
}

struct CorrectionPlan {
    std::vector<bool> is_cc;
    std::vector<bool> is_correctible;
    /// N x d; only rows of correctible samples are meaningful (others are 0).
    Matrix target;
    std::size_t n_corr = 0;
    std::size_t k = 0;
    CorrectionMode mode = CorrectionMode::exact;

    std::size_t size() const noexcept { return is_cc.size(); }
    std::size_t dim() const noexcept { return target.cols(); }
};

struct LossReport {
    double loss = 0.0;
    std::size_t n_corr = 0;
    CorrectionMode mode = CorrectionMode::exact;
    /// (sample index, |z_i - target_i|) for every correctible sample, ascending.
    std::vector<std::pair<std::size_t, double>> per_sample_terms;
};

/// is_cc[i] <=> alpha(cluster_i) == y_i.
inline std::vector<bool> classify_samples(std::span<const LabelId> y, const Partition& partition,
                                          const Assignment& assignment) {
    if (y.size() != partition.size()) throw ParameterError("labels and partition differ in length");
    if (assignment.alpha.size() != partition.n_clusters) {
        throw ParameterError("assignment covers " + std::to_string(assignment.alpha.size()) + " clusters, partition has " +
                             std::to_string(partition.n_clusters));
    }
    std::vector<bool> cc(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) cc[i] = assignment.alpha[partition.cluster_of[i]] == y[i];
    return cc;
}

namespace detail {

inline void check_inputs(const Matrix& z, std::span<const LabelId> y, const std::vector<bool>& is_cc) {
    if (y.size() != z.rows() || is_cc.size() != z.rows()) {
        throw ParameterError("Z, labels and CC flags must have the same length");
    }
}

/// Exact nearest-neighbor index over a subset of rows; kd-tree in low
/// dimension, brute force otherwise. Both return identical lists.
class SubsetIndex {
public:
    SubsetIndex(const Matrix& z, std::vector<std::uint32_t> members) : z_(&z), members_(std::move(members)) {
        if (z.cols() <= 16 && members_.size() > 64) tree_.emplace(z, members_);
    }
    std::size_t size() const noexcept { return members_.size(); }
    std::vector<Neighbor> query(std::span<const double> q, std::size_t k) const {
        return tree_ ? tree_->query(q, k) : brute_force_knn(*z_, members_, q, k);
    }

private:
    const Matrix* z_;
    std::vector<std::uint32_t> members_;
    std::optional<KdTree> tree_;
};

inline void centroid(const Matrix& z, std::span<const Neighbor> nbrs, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& nb : nbrs) {
        auto row = z.row(nb.index);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
    }
    const double inv = static_cast<double>(nbrs.size());
    for (auto& v : out) v /= inv;
}

}  // namespace detail

/// Exact targets: the k nearest CC samples of the same class, searched per
/// class (distance ties to the smaller index).
inline CorrectionPlan correction_targets(const Matrix& z, std::span<const LabelId> y, const std::vector<bool>& is_cc,
                                         std::size_t k, std::size_t threads = 1) {
    if (k == 0) throw ParameterError("k must be positive");
    detail::check_inputs(z, y, is_cc);
    const std::size_t n = z.rows(), d = z.cols();

    std::map<LabelId, std::vector<std::uint32_t>> cc_by_label;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_cc[i]) cc_by_label[y[i]].push_back(static_cast<std::uint32_t>(i));
    }
    std::map<LabelId, detail::SubsetIndex> index;
    for (auto& [label, members] : cc_by_label) {
        if (members.size() >= k) index.emplace(label, detail::SubsetIndex(z, members));
    }

    CorrectionPlan plan;
    plan.is_cc = is_cc;
    plan.is_correctible.assign(n, false);
    plan.target = Matrix(n, d);
    plan.k = k;
    plan.mode = CorrectionMode::exact;
    std::vector<char> correctible(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        if (is_cc[i]) return;
        auto it = index.find(y[i]);
        if (it == index.end()) return;
        const auto nbrs = it->second.query(z.row(i), k);
        detail::centroid(z, nbrs, plan.target.row(i));
        correctible[i] = 1;
    });
    for (std::size_t i = 0; i < n; ++i) {
        plan.is_correctible[i] = correctible[i] != 0;
        plan.n_corr += correctible[i];
    }
    return plan;
}

/// Variant of correction_targets searching each (label, cluster) pair
/// separately: for every cluster C matched to y_i with at least k CC samples
/// take the centroid of the k nearest CC samples in C, then keep the centroid
/// nearest to z_i (ties to the smaller cluster id).
inline CorrectionPlan correction_targets_per_cluster(const Matrix& z, std::span<const LabelId> y,
                                                     const Partition& partition, const Assignment& assignment,
                                                     const std::vector<bool>& is_cc, std::size_t k,
                                                     std::size_t threads = 1) {
    if (k == 0) throw ParameterError("k must be positive");
    detail::check_inputs(z, y, is_cc);
    if (partition.size() != z.rows() || assignment.alpha.size() != partition.n_clusters) {
        throw ParameterError("partition or assignment inconsistent with Z");
    }
    const std::size_t n = z.rows(), d = z.cols();
    std::vector<std::vector<std::uint32_t>> cc_in_cluster(partition.n_clusters);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_cc[i]) cc_in_cluster[partition.cluster_of[i]].push_back(static_cast<std::uint32_t>(i));
    }
    std::map<LabelId, std::vector<std::pair<ClusterId, detail::SubsetIndex>>> by_label;
    for (std::size_t c = 0; c < partition.n_clusters; ++c) {
        if (cc_in_cluster[c].size() >= k) {
            by_label[assignment.alpha[c]].emplace_back(static_cast<ClusterId>(c),
                                                       detail::SubsetIndex(z, std::move(cc_in_cluster[c])));
        }
    }

    CorrectionPlan plan;
    plan.is_cc = is_cc;
    plan.is_correctible.assign(n, false);
    plan.target = Matrix(n, d);
    plan.k = k;
    std::vector<char> correctible(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        if (is_cc[i]) return;
        auto it = by_label.find(y[i]);
        if (it == by_label.end()) return;
        std::vector<double> candidate(d);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [cluster, idx] : it->second) {  // ascending cluster id
            const auto nbrs = idx.query(z.row(i), k);
            detail::centroid(z, nbrs, candidate);
            const double dist = squared_distance(z.row(i), candidate);
            if (dist < best) {
                best = dist;
                std::copy(candidate.begin(), candidate.end(), plan.target.row(i).begin());
            }
        }
        correctible[i] = 1;
    });
    for (std::size_t i = 0; i < n; ++i) {
        plan.is_correctible[i] = correctible[i] != 0;
        plan.n_corr += correctible[i];
    }
    return plan;
}

/// Approximate targets: one seeded random CC representative per cluster; an
/// MC sample is correctible when some cluster is matched to its label, and
/// its target is the nearest representative among those clusters.
inline CorrectionPlan approximate_targets(const Matrix& z, std::span<const LabelId> y, const Partition& partition,
                                          const Assignment& assignment, const std::vector<bool>& is_cc,
                                          std::uint64_t seed) {
    detail::check_inputs(z, y, is_cc);
    if (partition.size() != z.rows() || assignment.alpha.size() != partition.n_clusters) {
        throw ParameterError("partition or assignment inconsistent with Z");
    }
    const std::size_t n = z.rows(), d = z.cols();
    std::vector<std::vector<std::uint32_t>> cc_in_cluster(partition.n_clusters);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_cc[i]) cc_in_cluster[partition.cluster_of[i]].push_back(static_cast<std::uint32_t>(i));
    }
    Rng rng(seed);
    // label -> (cluster, representative), ascending cluster id
    std::map<LabelId, std::vector<std::pair<ClusterId, std::uint32_t>>> reps;
    for (std::size_t c = 0; c < partition.n_clusters; ++c) {
        const auto& members = cc_in_cluster[c];
        if (members.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        reps[assignment.alpha[c]].emplace_back(static_cast<ClusterId>(c), members[pick(rng)]);
    }

    CorrectionPlan plan;
    plan.is_cc = is_cc;
    plan.is_correctible.assign(n, false);
    plan.target = Matrix(n, d);
    plan.k = 1;
    plan.mode = CorrectionMode::approximate;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_cc[i]) continue;
        auto it = reps.find(y[i]);
        if (it == reps.end()) continue;
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t chosen = 0;
        for (const auto& [cluster, rep] : it->second) {
            const double dist = squared_distance(z.row(i), z.row(rep));
            if (dist < best) {
                best = dist;
                chosen = rep;
            }
        }
        std::copy(z.row(chosen).begin(), z.row(chosen).end(), plan.target.row(i).begin());
        plan.is_correctible[i] = true;
        ++plan.n_corr;
    }
    return plan;
}

/// Replaces each correction vector v = z_i - target_i by its component
/// orthogonal to the local tangent space of z_i's current cluster. The
/// tangent basis is the leading principal directions of the k_prime nearest
/// co-members, enough of them to explain variance_fraction of the variance.
/// Samples with fewer than k_prime co-members keep their target.
inline CorrectionPlan orthogonalize_targets(const Matrix& z, const Partition& partition, CorrectionPlan plan,
                                            std::size_t k_prime, double variance_fraction = 0.95,
                                            std::size_t threads = 1) {
    if (k_prime < 2) throw ParameterError("k_prime must be at least 2");
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw ParameterError("variance_fraction must lie in (0, 1]");
    }
    if (plan.mode != CorrectionMode::exact) throw ParameterError("orthogonal correction needs an exact-mode plan");
    if (partition.size() != z.rows() || plan.size() != z.rows()) throw ParameterError("plan, partition and Z differ in size");

    const std::size_t n = z.rows(), d = z.cols();
    const auto members = partition.members();
    parallel_for(n, threads, [&](std::size_t i) {
        if (!plan.is_correctible[i]) return;
        const auto& pool = members[partition.cluster_of[i]];
        if (pool.size() - 1 < k_prime) return;
        const auto nbrs = brute_force_knn(z, pool, z.row(i), k_prime, static_cast<std::uint32_t>(i));

        Eigen::MatrixXd local(static_cast<Eigen::Index>(k_prime), static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < k_prime; ++r) {
            auto row = z.row(nbrs[r].index);
            for (std::size_t j = 0; j < d; ++j) local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j];
        }
        local.rowwise() -= local.colwise().mean();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(local, Eigen::ComputeThinV);
        const Eigen::VectorXd variance = svd.singularValues().array().square();
        const double total = variance.sum();
        if (!(total > 0.0)) return;  // coincident neighbors: no tangent directions

        Eigen::Index rank = 0;
        double acc = 0.0;
        while (rank < variance.size() && acc < variance_fraction * total) acc += variance(rank++);

        Eigen::VectorXd v(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) v(static_cast<Eigen::Index>(j)) = z(i, j) - plan.target(i, j);
        const auto basis = svd.matrixV().leftCols(rank);
        const Eigen::VectorXd v_perp = v - basis * (basis.transpose() * v);
        for (std::size_t j = 0; j < d; ++j) plan.target(i, j) = z(i, j) - v_perp(static_cast<Eigen::Index>(j));
    });
    plan.mode = CorrectionMode::exact_orthogonal;
    return plan;
}

/// Rounds every target to single precision, the precision of the plan file.
inline void round_targets_to_f32(CorrectionPlan& plan) {
    for (auto& v : plan.target.data()) v = static_cast<double>(static_cast<float>(v));
}

inline LossReport clustering_loss(const Matrix& z, const CorrectionPlan& plan) {
    if (plan.size() != z.rows() || plan.dim() != z.cols()) throw ParameterError("plan shape does not match Z");
    LossReport report;
    report.mode = plan.mode;
    report.n_corr = plan.n_corr;
    double sum = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        if (!plan.is_correctible[i]) continue;
        const double term = std::sqrt(squared_distance(z.row(i), plan.target.row(i)));
        report.per_sample_terms.emplace_back(i, term);
        sum += term;
    }
    if (plan.n_corr > 0) report.loss = sum / (std::sqrt(static_cast<double>(z.cols())) * static_cast<double>(plan.n_corr));
    return report;
}

/// d L / d z_i = (z_i - target_i) / (sqrt(d) * n_corr * |z_i - target_i|),
/// zero where the norm is below 1e-12 and for non-correctible rows.
inline Matrix clustering_loss_grad(const Matrix& z, const CorrectionPlan& plan) {
    if (plan.size() != z.rows() || plan.dim() != z.cols()) throw ParameterError("plan shape does not match Z");
    Matrix grad(z.rows(), z.cols());
    if (plan.n_corr == 0) return grad;
    const double scale = std::sqrt(static_cast<double>(z.cols())) * static_cast<double>(plan.n_corr);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        if (!plan.is_correctible[i]) continue;
        const double norm = std::sqrt(squared_distance(z.row(i), plan.target.row(i)));
        if (!(norm > 1e-12)) continue;
        for (std::size_t j = 0; j < z.cols(); ++j) grad(i, j) = (z(i, j) - plan.target(i, j)) / (scale * norm);
    }
    return grad;
}

}  // namespace lcc
