#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lcc/dataset.hpp"
#include "lcc/error.hpp"
#include "lcc/matrix.hpp"

namespace lcc {

/// Accuracy and cross-entropy on the CC subset, the MC subset and the whole
/// set. An empty subset leaves its fields unset.
struct SubsetMetrics {
    std::optional<double> acc_cc, acc_mc, acc_all;
    std::optional<double> ce_cc, ce_mc, ce_all;
    std::size_t n_cc = 0, n_mc = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// `probs` is N x L; column j holds the probability of label id j, so every
/// label must be below L. Argmax ties go to the smaller label.
inline SubsetMetrics subset_metrics(const Matrix& probs, std::span<const LabelId> y, const std::vector<bool>& is_cc) {
    const std::size_t n = probs.rows();
    if (y.size() != n || is_cc.size() != n) throw ParameterError("probabilities, labels and CC flags differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] >= probs.cols()) {
            throw ValidationError("label " + std::to_string(y[i]) + " has no column in a " +
                                  std::to_string(probs.cols()) + "-column probability matrix");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (double p : probs.row(i)) {
            if (!std::isfinite(p) || p < 0.0) throw ValidationError("row " + std::to_string(i) + " has an invalid probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("row " + std::to_string(i) + " does not sum to 1");
    }

    double hits[2] = {0, 0}, ce[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        auto row = probs.row(i);
        const auto argmax = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        const std::size_t truth = y[i];
        const int s = is_cc[i] ? 0 : 1;
        ++count[s];
        if (argmax == truth) hits[s] += 1.0;
        ce[s] += -std::log(std::max(row[truth], kProbabilityFloor));
    }
    SubsetMetrics m;
    m.n_cc = count[0];
    m.n_mc = count[1];
    if (count[0] > 0) {
        m.acc_cc = hits[0] / static_cast<double>(count[0]);
        m.ce_cc = ce[0] / static_cast<double>(count[0]);
    }
    if (count[1] > 0) {
        m.acc_mc = hits[1] / static_cast<double>(count[1]);
        m.ce_mc = ce[1] / static_cast<double>(count[1]);
    }
    if (n > 0) {
        m.acc_all = (hits[0] + hits[1]) / static_cast<double>(n);
        m.ce_all = (ce[0] + ce[1]) / static_cast<double>(n);
    }
    return m;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.size() != b.size()) throw ParameterError("labelings differ in length");
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
    std::map<std::uint32_t, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    const auto pairs = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sum_rows = 0, sum_cols = 0;
    for (auto& [_, v] : joint) index += pairs(v);
    for (auto& [_, v] : rows) sum_rows += pairs(v);
    for (auto& [_, v] : cols) sum_cols += pairs(v);
    const double expected = sum_rows * sum_cols / pairs(n);
    const double max_index = (sum_rows + sum_cols) / 2;
    if (max_index == expected) return 1.0;  // both labelings trivial
    return (index - expected) / (max_index - expected);
}

}  // namespace lcc
