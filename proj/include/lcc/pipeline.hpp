#pragma once

// One correction round over a stored latent dataset:
//   load -> k-NN graph -> clustering -> overlap/assignment -> CC/MC split
//   -> targets (exact or approximate, optional orthogonal pass) -> loss
// writing the correction plan, an optional gradient file and a JSON report.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include "lcc/assignment.hpp"
#include "lcc/conductance.hpp"
#include "lcc/correction.hpp"
#include "lcc/dataset.hpp"
#include "lcc/error.hpp"
#include "lcc/knn_graph.hpp"
#include "lcc/louvain.hpp"
#include "lcc/modularity.hpp"
#include "lcc/plan_io.hpp"
#include "lcc/pressure.hpp"
#include "lcc/report.hpp"

namespace lcc {

enum class ClusterMode { louvain, leiden, pressure };
enum class LossMode { exact, approximate };

inline const char* to_string(ClusterMode m) {
    switch (m) {
        case ClusterMode::louvain: return "louvain";
        case ClusterMode::leiden: return "leiden";
        case ClusterMode::pressure: return "pressure";
    }
    return "unknown";
}

inline const char* to_string(LossMode m) { return m == LossMode::exact ? "exact" : "approximate"; }

struct PipelineConfig {
    std::filesystem::path input;
    FileFormat input_format = FileFormat::binary;
    std::size_t k = 5;
    /// Unset selects beta = 1 / median squared pairwise distance.
    std::optional<double> beta = 1.0;
    ClusterMode cluster_mode = ClusterMode::leiden;
    LossMode loss_mode = LossMode::exact;
    /// Search exact targets per (label, cluster) instead of per label.
    bool per_cluster_targets = false;
    bool orthogonal = false;
    std::size_t k_prime = 50;
    double variance_fraction = 0.95;
    std::uint64_t seed = 0;
    bool emit_gradient = false;
    std::filesystem::path plan_output;
    std::filesystem::path report_output;
    std::filesystem::path gradient_output;
    /// Adds stage timings to the report file, which then differs run to run.
    bool report_timings = false;
    /// Loss weight of the external trainer; carried into the report only.
    double w = 1e-4;
    std::size_t max_pressure_iters = 100;
    std::size_t threads = 1;
};

struct StageTimings {
    double knn = 0, cluster = 0, assign = 0, targets = 0, loss = 0;
};

struct PipelineReport {
    std::size_t n_samples = 0;
    std::size_t dim = 0;
    std::size_t n_clusters = 0;
    double modularity = 0.0;
    double conductance = 1.0;
    double conductance_per_node = 0.0;
    std::uint64_t assignment_objective = 0;
    std::size_t n_cc = 0;
    std::size_t n_mc = 0;
    std::size_t n_corr = 0;
    double loss = 0.0;
    double beta = 1.0;
    std::size_t passes = 0;
    StageTimings timings_ms;
};

struct PipelineResult {
    PipelineReport report;
    KnnGraph graph;
    Partition partition;
    Assignment assignment;
    CorrectionPlan plan;
    LossReport loss;
    std::optional<Matrix> gradient;
};

inline void validate(const PipelineConfig& c) {
    if (c.k == 0) throw ParameterError("k must be a positive integer");
    if (c.beta && !(*c.beta > 0.0 && std::isfinite(*c.beta))) throw ParameterError("beta must be positive");
    if (c.k_prime < 2) throw ParameterError("k_prime must be at least 2");
    if (!(c.variance_fraction > 0.0 && c.variance_fraction <= 1.0)) {
        throw ParameterError("variance_fraction must lie in (0, 1]");
    }
    if (c.orthogonal && c.loss_mode != LossMode::exact) {
        throw ParameterError("orthogonal correction requires the exact loss mode");
    }
    if (c.max_pressure_iters == 0) throw ParameterError("max_pressure_iters must be positive");
    if (c.threads == 0) throw ParameterError("threads must be positive");
}

namespace detail {

/// Runs fn, prefixing any library error with the stage name.
template <class Fn>
auto run_stage(const char* name, double& elapsed_ms, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    const auto stop = [&] {
        elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    const auto tag = [&](const Error& e) { return std::string(name) + ": " + e.what(); };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            stop();
        } else {
            auto out = fn();
            stop();
            return out;
        }
    } catch (const ParameterError& e) {
        throw ParameterError(tag(e));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e));
    } catch (const FormatError& e) {
        throw FormatError(tag(e));
    } catch (const IoError& e) {
        throw IoError(tag(e));
    }
}

}  // namespace detail

/// In-memory pipeline over an already loaded dataset. Targets are rounded to
/// single precision before the loss, so the loss matches the plan file.
inline PipelineResult run_pipeline(const LatentDataset& ds, const PipelineConfig& config) {
    validate(config);
    validate(ds);
    PipelineResult r;
    auto& rep = r.report;
    rep.n_samples = ds.size();
    rep.dim = ds.dim();

    r.graph = detail::run_stage("knn", rep.timings_ms.knn, [&] {
        if (config.k >= ds.size()) {
            throw ParameterError("k must be smaller than the number of samples (k = " + std::to_string(config.k) +
                                 ", N = " + std::to_string(ds.size()) + ")");
        }
        rep.beta = config.beta ? *config.beta : median_beta(ds.z, config.seed);
        return build_knn_graph(ds.z, config.k, rep.beta, KnnOptions{KnnMethod::automatic, config.threads});
    });

    r.partition = detail::run_stage("cluster", rep.timings_ms.cluster, [&] {
        if (config.cluster_mode == ClusterMode::pressure) {
            auto res = knn_pressure(r.graph, config.seed, config.max_pressure_iters, config.threads);
            rep.passes = res.state.sweeps;
            return std::move(res.partition);
        }
        CommunityConfig cc;
        cc.mode = config.cluster_mode == ClusterMode::louvain ? CommunityMode::louvain : CommunityMode::leiden;
        cc.seed = config.seed;
        auto res = louvain_detailed(r.graph, cc);
        rep.passes = res.passes;
        return std::move(res.partition);
    });
    rep.n_clusters = r.partition.n_clusters;
    rep.modularity = modularity(r.graph, r.partition);
    const auto cond = conductance_details(r.graph, r.partition.cluster_of, r.partition.n_clusters);
    rep.conductance = cond.phi;
    rep.conductance_per_node = cond.per_node;

    std::vector<bool> is_cc;
    detail::run_stage("assign", rep.timings_ms.assign, [&] {
        const auto overlap = overlap_matrix(ds.y, r.partition);
        r.assignment = optimal_assignment(overlap);
        is_cc = classify_samples(ds.y, r.partition, r.assignment);
    });
    rep.assignment_objective = r.assignment.objective;
    rep.n_cc = static_cast<std::size_t>(std::count(is_cc.begin(), is_cc.end(), true));
    rep.n_mc = rep.n_samples - rep.n_cc;

    r.plan = detail::run_stage("targets", rep.timings_ms.targets, [&] {
        CorrectionPlan plan;
        if (config.loss_mode == LossMode::approximate) {
            plan = approximate_targets(ds.z, ds.y, r.partition, r.assignment, is_cc, config.seed);
        } else if (config.per_cluster_targets) {
            plan = correction_targets_per_cluster(ds.z, ds.y, r.partition, r.assignment, is_cc, config.k,
                                                  config.threads);
        } else {
            plan = correction_targets(ds.z, ds.y, is_cc, config.k, config.threads);
        }
        if (config.orthogonal) {
            plan = orthogonalize_targets(ds.z, r.partition, std::move(plan), config.k_prime, config.variance_fraction,
                                         config.threads);
        }
        round_targets_to_f32(plan);
        return plan;
    });
    rep.n_corr = r.plan.n_corr;

    r.loss = detail::run_stage("loss", rep.timings_ms.loss, [&] {
        auto loss = clustering_loss(ds.z, r.plan);
        if (config.emit_gradient) r.gradient = clustering_loss_grad(ds.z, r.plan);
        return loss;
    });
    rep.loss = r.loss.loss;
    return r;
}

inline Json report_json(const PipelineReport& r, const PipelineConfig& config, bool include_timings = true) {
    Json j{{"n_samples", r.n_samples},
           {"dim", r.dim},
           {"n_clusters", r.n_clusters},
           {"modularity", r.modularity},
           {"conductance", r.conductance},
           {"conductance_per_node", r.conductance_per_node},
           {"assignment_objective", r.assignment_objective},
           {"n_cc", r.n_cc},
           {"n_mc", r.n_mc},
           {"n_corr", r.n_corr},
           {"loss", r.loss},
           {"k", config.k},
           {"beta", r.beta},
           {"cluster_mode", to_string(config.cluster_mode)},
           {"loss_mode", to_string(config.loss_mode)},
           {"orthogonal", config.orthogonal},
           {"seed", config.seed},
           {"w", config.w},
           {"passes", r.passes}};
    if (include_timings) {
        j["timings_ms"] = Json{{"knn", r.timings_ms.knn},
                               {"cluster", r.timings_ms.cluster},
                               {"assign", r.timings_ms.assign},
                               {"targets", r.timings_ms.targets},
                               {"loss", r.timings_ms.loss}};
    }
    return j;
}

/// File-driven pipeline: reads config.input and writes the configured outputs.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
    validate(config);
    double load_ms = 0;
    const auto ds = detail::run_stage("load", load_ms, [&] { return load_dataset(config.input, config.input_format); });
    auto result = run_pipeline(ds, config);

    if (!config.plan_output.empty()) save_plan(result.plan, config.plan_output);
    if (config.emit_gradient && !config.gradient_output.empty()) {
        LatentDataset grad{*result.gradient, std::vector<LabelId>(ds.size(), 0), std::nullopt};
        save_dataset(grad, config.gradient_output, FileFormat::binary);
    }
    if (!config.report_output.empty()) {
        std::ofstream out(config.report_output, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + config.report_output.string() + "' for writing");
        out << report_json(result.report, config, config.report_timings).dump(2) << '\n';
        if (!out) throw IoError("write failed for '" + config.report_output.string() + "'");
    }
    return result;
}

}  // namespace lcc
