#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "lcc/matrix.hpp"

namespace lcc {

/// Candidate neighbor; ordered by distance, then by index.
struct Neighbor {
    double dist2 = 0.0;
    std::uint32_t index = 0;

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index;
    }
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact k-nearest-neighbor search by brute force over `candidates`.
/// Result is sorted by (distance, index).
inline std::vector<Neighbor> brute_force_knn(const Matrix& points, std::span<const std::uint32_t> candidates,
                                             std::span<const double> query, std::size_t k,
                                             std::optional<std::uint32_t> exclude = std::nullopt) {
    std::vector<Neighbor> all;
    all.reserve(candidates.size());
    for (auto c : candidates) {
        if (exclude && c == *exclude) continue;
        all.push_back({squared_distance(query, points.row(c)), c});
    }
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    all.resize(k);
    return all;
}

/// Exact kd-tree over a subset of the rows of a matrix.
///
/// Returns the same neighbor lists as brute_force_knn, including the
/// (distance, index) tie order: a subtree is skipped only when its bounding
/// plane is strictly farther than the current k-th candidate.
class KdTree {
public:
    KdTree(const Matrix& points, std::vector<std::uint32_t> subset, std::size_t leaf_size = 16)
        : points_(&points), index_(std::move(subset)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
        if (!index_.empty()) build(0, index_.size());
    }

    explicit KdTree(const Matrix& points, std::size_t leaf_size = 16)
        : KdTree(points, iota_indices(points.rows()), leaf_size) {}

    std::size_t size() const noexcept { return index_.size(); }

    std::vector<Neighbor> query(std::span<const double> q, std::size_t k,
                                std::optional<std::uint32_t> exclude = std::nullopt) const {
        std::priority_queue<Neighbor> heap;  // max-heap: worst candidate on top
        if (k > 0 && !nodes_.empty()) search(0, q, k, exclude, heap);
        std::vector<Neighbor> out(heap.size());
        for (auto it = out.rbegin(); it != out.rend(); ++it) {
            *it = heap.top();
            heap.pop();
        }
        return out;
    }

private:
    struct Node {
        std::size_t lo = 0, hi = 0;
        std::size_t dim = 0;
        double split = 0.0;
        std::int64_t left = -1, right = -1;
    };

    static std::vector<std::uint32_t> iota_indices(std::size_t n) {
        std::vector<std::uint32_t> v(n);
        std::iota(v.begin(), v.end(), 0u);
        return v;
    }

    std::size_t build(std::size_t lo, std::size_t hi) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({lo, hi});
        if (hi - lo <= leaf_size_) return id;

        const std::size_t d = points_->cols();
        std::size_t best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            double mn = (*points_)(index_[lo], j), mx = mn;
            for (std::size_t p = lo + 1; p < hi; ++p) {
                const double v = (*points_)(index_[p], j);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx - mn > best_spread) {
                best_spread = mx - mn;
                best_dim = j;
            }
        }
        if (best_spread <= 0.0) return id;  // all points coincide

        const std::size_t mid = lo + (hi - lo) / 2;
        auto first = index_.begin() + static_cast<std::ptrdiff_t>(lo);
        std::nth_element(first, index_.begin() + static_cast<std::ptrdiff_t>(mid),
                         index_.begin() + static_cast<std::ptrdiff_t>(hi),
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double va = (*points_)(a, best_dim), vb = (*points_)(b, best_dim);
                             return va != vb ? va < vb : a < b;
                         });
        nodes_[id].dim = best_dim;
        nodes_[id].split = (*points_)(index_[mid], best_dim);
        const auto left = build(lo, mid);
        const auto right = build(mid, hi);
        nodes_[id].left = static_cast<std::int64_t>(left);
        nodes_[id].right = static_cast<std::int64_t>(right);
        return id;
    }

    void search(std::size_t id, std::span<const double> q, std::size_t k, std::optional<std::uint32_t> exclude,
                std::priority_queue<Neighbor>& heap) const {
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (std::size_t p = node.lo; p < node.hi; ++p) {
                const auto idx = index_[p];
                if (exclude && idx == *exclude) continue;
                const Neighbor cand{squared_distance(q, points_->row(idx)), idx};
                if (heap.size() < k) {
                    heap.push(cand);
                } else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        // left holds coordinates <= split, right holds coordinates >= split
        const double diff = q[node.dim] - node.split;
        const auto near = static_cast<std::size_t>(diff < 0.0 ? node.left : node.right);
        const auto far = static_cast<std::size_t>(diff < 0.0 ? node.right : node.left);
        search(near, q, k, exclude, heap);
        const double bound = diff * diff;
        if (heap.size() < k || !(bound > heap.top().dist2)) search(far, q, k, exclude, heap);
    }

    const Matrix* points_;
    std::vector<std::uint32_t> index_;
    std::size_t leaf_size_;
    std::vector<Node> nodes_;
};

}  // namespace lcc
