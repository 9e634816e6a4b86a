// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lcc/lcc.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace lcc;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

struct Criterion {
    std::string name;
    double time_limit_s;  // 0: no limit
    std::function<Verdict()> check;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------------------

Verdict assignment_oracle() {
    Verdict v;
    std::mt19937_64 rng(1001);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 1 + rng() % 30, labels = 1 + rng() % 4, clusters = 1 + rng() % 5;
        std::vector<LabelId> y(n);
        std::vector<ClusterId> c(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<LabelId>(rng() % labels);
            c[i] = static_cast<ClusterId>(rng() % clusters);
        }
        const auto m = overlap_matrix(y, Partition::from_labels(c));
        const auto fast = optimal_assignment(m), slow = exhaustive_assignment_oracle(m);
        if (fast.objective != slow.objective) v.fail("objective differs on instance " + std::to_string(inst));
    }
    if (v.pass) v.detail = "200/200 instances equal";
    return v;
}

Verdict modularity_oracle() {
    Verdict v;
    std::mt19937_64 rng(1002);
    int checked = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 2 + rng() % 7;
        const auto g = oracle::random_graph(n, 0.5, rng);
        const double best = oracle::best_modularity(g).q;
        for (auto mode : {CommunityMode::louvain, CommunityMode::leiden}) {
            const auto r = louvain_detailed(g, {mode, static_cast<std::uint64_t>(inst)});
            if (oracle::modularity_by_pairs(g, r.partition.cluster_of) > best) {
                v.fail("Q above the optimum on graph " + std::to_string(inst));
            }
            ++checked;
        }
    }
    const auto g = oracle::two_cliques_with_bridge();
    const auto best = oracle::best_modularity(g);
    const std::vector<ClusterId> cliques{0, 0, 0, 0, 1, 1, 1, 1};
    for (auto mode : {CommunityMode::louvain, CommunityMode::leiden}) {
        const auto r = louvain_detailed(g, {mode, 0});
        if (r.partition.cluster_of != cliques) v.fail("cliques+bridge not split into the two cliques");
        if (std::abs(oracle::modularity_by_pairs(g, r.partition.cluster_of) - best.q) > 1e-12) {
            v.fail("cliques+bridge Q " + fmt("%.17g", r.modularity) + " != optimum " + fmt("%.17g", best.q));
        }
    }
    if (v.pass) v.detail = std::to_string(checked) + " runs <= optimum; cliques+bridge Q = " + fmt("%.6f", best.q);
    return v;
}

Verdict delta_q_consistency() {
    Verdict v;
    std::mt19937_64 rng(1003);
    std::size_t moves = 0;
    double worst = 0.0;
    for (int run = 0; run < 100; ++run) {
        const std::size_t n = 5 + rng() % 46;
        const auto g = oracle::random_graph(n, 0.05 + 0.3 * (rng() % 100) / 100.0, rng);
        MoveObserver obs = [&](const MoveEvent& e) {
            std::vector<ClusterId> before(e.before.begin(), e.before.end()), after = before;
            after[e.node] = e.to;
            const double direct =
                oracle::modularity_by_pairs(e.graph, after) - oracle::modularity_by_pairs(e.graph, before);
            worst = std::max(worst, std::abs(direct - e.gain));
            ++moves;
        };
        louvain_detailed(g, {run % 2 ? CommunityMode::leiden : CommunityMode::louvain, static_cast<std::uint64_t>(run)},
                         &obs);
    }
    if (worst > 1e-9) v.fail("max |gain - recomputed| = " + fmt("%.3g", worst));
    if (moves == 0) v.fail("no moves observed");
    if (v.pass) v.detail = std::to_string(moves) + " moves, max error " + fmt("%.3g", worst);
    return v;
}

Verdict gradient_check() {
    Verdict v;
    std::mt19937_64 rng(1004);
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
        const std::size_t n = 4 + rng() % 47, d = 1 + rng() % 8;
        const auto ds = oracle::random_dataset(n, d, 1 + rng() % 3, rng);
        std::vector<ClusterId> c(n);
        for (auto& x : c) x = static_cast<ClusterId>(rng() % 4);
        const auto p = Partition::from_labels(c);
        const auto a = optimal_assignment(overlap_matrix(ds.y, p));
        const auto plan = correction_targets(ds.z, ds.y, classify_samples(ds.y, p, a), 1 + rng() % 2);
        bool smooth = plan.n_corr > 0;
        for (std::size_t i = 0; i < n && smooth; ++i)
            if (plan.is_correctible[i]) smooth = std::sqrt(squared_distance(ds.z.row(i), plan.target.row(i))) > 1e-3;
        if (!smooth) continue;
        const auto grad = clustering_loss_grad(ds.z, plan);
        const auto fd = oracle::finite_difference_gradient(ds.z, 1e-5,
                                                           [&](const Matrix& z) { return clustering_loss(z, plan).loss; });
        double diff = 0, ref = 0;
        for (std::size_t k = 0; k < grad.data().size(); ++k) {
            diff += std::pow(grad.data()[k] - fd.data()[k], 2);
            ref += std::pow(fd.data()[k], 2);
        }
        worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12));
        ++checked;
    }
    if (worst > 1e-6) v.fail("max relative error " + fmt("%.3g", worst));
    if (v.pass) v.detail = "100 instances, max relative error " + fmt("%.3g", worst);
    return v;
}

BlobSpec recovery_spec() {
    BlobSpec spec;
    spec.n_labels = 10;
    spec.clusters_per_label = 1;
    spec.samples_per_cluster = 200;
    spec.dim = 32;
    spec.cluster_sigma = 0.1;
    spec.center_box_half_width = 20.0;
    spec.min_center_distance = 10 * spec.cluster_sigma;
    spec.seed = 0;
    return spec;
}

Verdict pipeline_recovery() {
    Verdict v;
    const auto ds = generate_blobs(recovery_spec());
    const auto& truth = *ds.ground_truth_clusters;
    PipelineConfig c;
    c.k = 10;
    c.cluster_mode = ClusterMode::leiden;
    const auto leiden = run_pipeline(ds, c);
    const double ari_leiden = adjusted_rand_index(leiden.partition.cluster_of, truth);
    if (ari_leiden < 0.99) v.fail("Leiden ARI " + fmt("%.4f", ari_leiden));

    // generating label of each detected cluster = label of its majority true cluster
    std::vector<std::map<std::uint32_t, std::size_t>> votes(leiden.partition.n_clusters);
    for (std::size_t i = 0; i < ds.size(); ++i) ++votes[leiden.partition.cluster_of[i]][truth[i]];
    for (std::size_t k = 0; k < votes.size(); ++k) {
        auto best = std::max_element(votes[k].begin(), votes[k].end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
        const auto label = static_cast<LabelId>(best->first / recovery_spec().clusters_per_label);
        if (leiden.assignment.alpha[k] != label) v.fail("cluster " + std::to_string(k) + " not mapped to its label");
    }
    if (leiden.report.loss != 0.0) v.fail("loss " + fmt("%.3g", leiden.report.loss) + " != 0");

    c.cluster_mode = ClusterMode::pressure;
    const auto pressure = run_pipeline(ds, c);
    const double ari_pressure = adjusted_rand_index(pressure.partition.cluster_of, truth);
    if (ari_pressure < 0.95) v.fail("pressure ARI " + fmt("%.4f", ari_pressure));
    if (v.pass) {
        v.detail = "Leiden ARI " + fmt("%.4f", ari_leiden) + ", loss 0, pressure ARI " + fmt("%.4f", ari_pressure);
    }
    return v;
}

Verdict multi_cluster_tolerance() {
    Verdict v;
    BlobSpec spec;
    spec.n_labels = 5;
    spec.clusters_per_label = 2;
    spec.samples_per_cluster = 100;
    spec.dim = 32;
    spec.cluster_sigma = 0.1;
    spec.center_box_half_width = 20.0;
    spec.min_center_distance = 1.0;
    spec.seed = 0;
    const auto ds = generate_blobs(spec);
    PipelineConfig c;
    c.k = 10;
    const auto r = run_pipeline(ds, c);
    if (r.report.n_clusters < 8 || r.report.n_clusters > 12) {
        v.fail(std::to_string(r.report.n_clusters) + " clusters detected");
    }
    if (r.report.assignment_objective != ds.size()) v.fail("objective " + std::to_string(r.report.assignment_objective));
    if (r.report.n_mc != 0) v.fail(std::to_string(r.report.n_mc) + " MC samples");
    if (v.pass) v.detail = std::to_string(r.report.n_clusters) + " clusters, objective = N = 1000, n_mc = 0";
    return v;
}

Verdict conductance_suite() {
    Verdict v;
    std::mt19937_64 rng(1005);
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t n = 2 + rng() % 30;
        const auto g = oracle::random_graph(n, 0.05 + 0.6 * (rng() % 100) / 100.0, rng);
        std::vector<ClusterId> labels(n);
        for (auto& c : labels) c = static_cast<ClusterId>(rng() % (1 + rng() % 6));
        const auto p = Partition::from_labels(labels);
        const auto d = conductance_details(g, p.cluster_of, p.n_clusters);
        if (!(d.phi >= 0.0 && d.phi <= 1.0)) v.fail("Phi out of range on instance " + std::to_string(inst));
        for (double phi : d.per_cluster)
            if (!(phi >= 0.0 && phi <= 1.0)) v.fail("phi out of range on instance " + std::to_string(inst));
        std::vector<NodeId> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<NodeId>(i);
        if (conductance_set(g, all) != 1.0) v.fail("phi(V) != 1");
    }
    if (conductance_clustering(WeightedGraph::from_edges(6, {}), Partition::singletons(6)) != 1.0) {
        v.fail("edgeless Phi != 1");
    }

    std::size_t runs = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 2 + rng() % 99;
        const auto g = oracle::random_graph(n, 3.0 / static_cast<double>(n), rng, inst % 2 == 0);
        const auto seed = static_cast<std::uint64_t>(inst);
        const auto sparse = knn_pressure(g, seed);
        const auto& h = sparse.state.conductance_history;
        for (std::size_t s = 1; s < h.size(); ++s)
            if (!(h[s] < h[s - 1])) v.fail("history not strictly decreasing on graph " + std::to_string(inst));
        const auto dense = detail::run_pressure(g, seed, 100, 1, &oracle::dense_sweep);
        if (sparse.state.membership != dense.state.membership || sparse.state.sweeps != dense.state.sweeps) {
            v.fail("sparse and dense pressure differ on graph " + std::to_string(inst));
        }
        std::vector<ClusterId> membership(n);
        for (auto& c : membership) c = static_cast<ClusterId>(rng() % (1 + n / 3));
        if (detail::sparse_sweep(g, membership, seed, 1, 1) != oracle::dense_sweep(g, membership, seed, 1, 1)) {
            v.fail("sparse and dense sweep differ on graph " + std::to_string(inst));
        }
        ++runs;
    }
    if (v.pass) v.detail = "500 graph/partition pairs in [0,1]; " + std::to_string(runs) + " pressure runs sparse == dense";
    return v;
}

Verdict invariant_suite() {
    Verdict v;
    std::mt19937_64 rng(1006);
    scratch::TempDir dir;
    std::normal_distribution<double> shift(0.0, 10.0);
    const int instances = 500;
    for (int inst = 0; inst < instances; ++inst) {
        const std::size_t n = 12 + rng() % 60, d = 2 + rng() % 5;
        auto ds = oracle::random_dataset(n, d, 1 + rng() % 4, rng);
        for (auto& x : ds.z.data()) x = static_cast<double>(static_cast<float>(x));
        std::vector<ClusterId> c(n);
        const std::size_t n_clusters = 1 + rng() % 6;
        for (auto& x : c) x = static_cast<ClusterId>(rng() % n_clusters);
        const auto p = Partition::from_labels(c);
        const auto a = optimal_assignment(overlap_matrix(ds.y, p));
        const auto is_cc = classify_samples(ds.y, p, a);
        const std::string at = " (instance " + std::to_string(inst) + ")";

        std::vector<bool> has_cc(p.n_clusters, false);
        for (std::size_t i = 0; i < n; ++i)
            if (is_cc[i]) has_cc[p.cluster_of[i]] = true;
        for (bool b : has_cc)
            if (!b) v.fail("nonempty cluster without a CC sample" + at);

        const std::size_t k = 1 + rng() % 3;
        const auto plan = correction_targets(ds.z, ds.y, is_cc, k);
        std::map<LabelId, std::size_t> cc_count;
        for (std::size_t i = 0; i < n; ++i) cc_count[ds.y[i]] += is_cc[i];
        for (std::size_t i = 0; i < n; ++i) {
            if (plan.is_correctible[i] && is_cc[i]) v.fail("correctible CC sample" + at);
            if (plan.is_correctible[i] != (!is_cc[i] && cc_count[ds.y[i]] >= k)) v.fail("correctibility recount" + at);
        }

        Matrix moved = ds.z;
        std::vector<double> s(d);
        for (auto& x : s) x = shift(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) moved(i, j) += s[j];
        const double l0 = clustering_loss(ds.z, plan).loss;
        const double l1 = clustering_loss(moved, correction_targets(moved, ds.y, is_cc, k)).loss;
        if (std::abs(l0 - l1) > 1e-9 * std::max(1.0, l0)) v.fail("translation changed the loss" + at);

        const auto ortho = orthogonalize_targets(ds.z, p, plan, 2 + rng() % 6, 0.5 + 0.5 * (rng() % 100) / 100.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!plan.is_correctible[i]) continue;
            if (squared_distance(ds.z.row(i), ortho.target.row(i)) >
                squared_distance(ds.z.row(i), plan.target.row(i)) * (1 + 1e-12) + 1e-24) {
                v.fail("|v_perp| > |v|" + at);
            }
        }

        PipelineConfig cfg;
        cfg.k = std::min<std::size_t>(k + 2, n - 1);
        cfg.seed = static_cast<std::uint64_t>(inst);
        cfg.cluster_mode = static_cast<ClusterMode>(inst % 3);
        cfg.loss_mode = inst % 4 == 0 ? LossMode::approximate : LossMode::exact;
        const auto r = run_pipeline(ds, cfg);
        save_plan(r.plan, dir / "p.lccp");
        const double from_file = clustering_loss(ds.z, load_plan(dir / "p.lccp")).loss;
        if (std::abs(from_file - r.report.loss) > 1e-9) v.fail("plan/report loss mismatch" + at);
    }
    if (v.pass) v.detail = std::to_string(instances) + " instances, all six invariants hold";
    return v;
}

Verdict determinism_and_io() {
    Verdict v;
    scratch::TempDir dir;
    BlobSpec spec = recovery_spec();
    spec.n_labels = 5;
    spec.samples_per_cluster = 80;
    spec.dim = 8;
    spec.mislabel_fraction = 0.05;
    spec.seed = 7;
    const auto ds = generate_blobs(spec);
    save_dataset(ds, dir / "d.lccd");
    const auto back = load_dataset(dir / "d.lccd");
    if (!(back.z == ds.z) || back.y != ds.y) v.fail(".lccd round trip not bit-exact");

    for (auto mode : {ClusterMode::louvain, ClusterMode::leiden, ClusterMode::pressure}) {
        for (auto loss : {LossMode::exact, LossMode::approximate}) {
            std::string reference;
            for (std::size_t threads : {1u, 2u, 4u}) {
                PipelineConfig c;
                c.input = dir / "d.lccd";
                c.k = 8;
                c.seed = 11;
                c.cluster_mode = mode;
                c.loss_mode = loss;
                c.threads = threads;
                c.emit_gradient = true;
                c.plan_output = dir / "p.lccp";
                c.report_output = dir / "r.json";
                c.gradient_output = dir / "g.lccd";
                const auto r = run_pipeline(c);
                const std::string bytes = scratch::read_bytes(c.plan_output) + scratch::read_bytes(c.report_output) +
                                          scratch::read_bytes(c.gradient_output);
                if (reference.empty()) {
                    reference = bytes;
                } else if (bytes != reference) {
                    v.fail(std::string("outputs differ with ") + std::to_string(threads) + " threads (" +
                           to_string(mode) + ")");
                }
                const auto plan = load_plan(c.plan_output);
                if (!(plan.target == r.plan.target) || plan.is_cc != r.plan.is_cc ||
                    plan.is_correctible != r.plan.is_correctible) {
                    v.fail(".lccp round trip not bit-exact");
                }
            }
        }
    }
    if (v.pass) v.detail = "3 cluster modes x 2 loss modes x {1,2,4} threads identical; .lccd/.lccp bit-exact";
    return v;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"assignment oracle", 5.0, assignment_oracle},
        {"modularity oracle", 30.0, modularity_oracle},
        {"delta-Q consistency", 0.0, delta_q_consistency},
        {"gradient check", 10.0, gradient_check},
        {"pipeline recovery", 60.0, pipeline_recovery},
        {"multi-cluster-per-class tolerance", 0.0, multi_cluster_tolerance},
        {"conductance", 0.0, conductance_suite},
        {"invariant suite", 0.0, invariant_suite},
        {"determinism and I/O", 0.0, determinism_and_io},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            v.fail("took " + fmt("%.2f", secs) + " s, limit " + fmt("%.0f", c.time_limit_s) + " s");
        }
        failures += !v.pass;
        std::printf("%s  %-34s %7.2f s  %s\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), secs, v.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
