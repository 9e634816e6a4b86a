// lcc: command-line front end for latent cluster correction.
//
//   lcc generate  --output d.lccd [blob options]
//   lcc knn       --input d.lccd --k 5 [--beta 1|median]
//   lcc cluster   --input d.lccd --k 5 --mode leiden --output part.txt [--report diag.json]
//   lcc assign    --input d.lccd --partition part.txt [--output assign.json]
//   lcc targets   --input d.lccd --partition part.txt --k 5 --output plan.lccp
//   lcc loss      --input d.lccd --plan plan.lccp [--gradient g.lccd] [--output loss.json]
//   lcc metrics   --input d.lccd --plan plan.lccp --probs probs.csv [--output m.json]
//   lcc pipeline  --input d.lccd --k 5 --mode leiden --out plan.lccp --report r.json
//
// Exit status: 0 success, 1 invalid arguments or data, 2 I/O failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lcc/lcc.hpp"

namespace {

using namespace lcc;

struct Common {
    std::uint64_t seed = 0;
    std::string format = "binary";
    std::string output;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--format", c.format, "Dataset file format")->check(CLI::IsMember({"binary", "csv"}));
    cmd->add_option("-o,--output,--out", c.output, "Output file (stdout when omitted, if text)");
}

FileFormat parse_format(const std::string& s) { return s == "csv" ? FileFormat::csv : FileFormat::binary; }

std::optional<double> parse_beta(const std::string& s) {
    if (s == "median") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError("beta must be a positive number or 'median', got '" + s + "'");
    }
}

ClusterMode parse_cluster_mode(const std::string& s) {
    if (s == "louvain") return ClusterMode::louvain;
    if (s == "pressure") return ClusterMode::pressure;
    return ClusterMode::leiden;
}

/// Writes text to `path`, or stdout when empty.
template <class Fn>
void emit_text(const std::string& path, Fn&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write(out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

void emit_json(const std::string& path, const Json& j) {
    emit_text(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

Partition read_partition(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    auto p = read_partition_text(in);
    if (p.size() != n) {
        throw ValidationError("partition has " + std::to_string(p.size()) + " nodes, dataset has " + std::to_string(n));
    }
    return p;
}

/// Probabilities CSV: one row per sample, column j = label id j. A leading
/// non-numeric header line is skipped.
Matrix read_probabilities(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto cells = detail::split(trimmed, ',');
        if (rows == 0 && values.empty()) {
            double probe = 0;
            const auto first = detail::trim(cells[0]);
            auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), probe);
            if (ec != std::errc() || ptr != first.data() + first.size()) continue;  // header
            cols = cells.size();
        }
        if (cells.size() != cols) throw FormatError("probabilities line " + std::to_string(line_no) + ": wrong column count");
        for (auto c : cells) values.push_back(detail::parse_double(c, line_no));
        ++rows;
    }
    if (rows == 0) throw FormatError("probabilities file is empty");
    return Matrix(rows, cols, std::move(values));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent cluster correction: clusters, assignments, correction targets and loss"};
    app.require_subcommand(1);

    // generate
    Common gen_c;
    BlobSpec blob;
    auto* gen = app.add_subcommand("generate", "Write a synthetic Gaussian-blob dataset");
    add_common(gen, gen_c);
    gen->add_option("--labels", blob.n_labels, "Number of labels")->check(CLI::PositiveNumber);
    gen->add_option("--clusters-per-label", blob.clusters_per_label, "Clusters per label")->check(CLI::PositiveNumber);
    gen->add_option("--samples-per-cluster", blob.samples_per_cluster, "Samples per cluster")->check(CLI::PositiveNumber);
    gen->add_option("--dim", blob.dim, "Latent dimension")->check(CLI::PositiveNumber);
    gen->add_option("--half-width", blob.center_box_half_width, "Centers are uniform in [-w, w]^d");
    gen->add_option("--sigma", blob.cluster_sigma, "Per-coordinate standard deviation");
    gen->add_option("--mislabel", blob.mislabel_fraction, "Fraction of samples given a wrong label");
    gen->add_option("--min-center-distance", blob.min_center_distance, "Redraw centers closer than this");

    // knn
    Common knn_c;
    std::string knn_input, knn_beta = "1";
    std::size_t knn_k = 5;
    auto* knn = app.add_subcommand("knn", "Build the k-NN graph and dump its edges as `i j w`");
    add_common(knn, knn_c);
    knn->add_option("-i,--input", knn_input, "Dataset file")->required();
    knn->add_option("--k", knn_k, "Neighbors per sample");
    knn->add_option("--beta", knn_beta, "RBF scale, or 'median'");

    // cluster
    Common cl_c;
    std::string cl_input, cl_beta = "1", cl_mode = "leiden", cl_report;
    std::size_t cl_k = 5, cl_max_passes = 100, cl_max_iters = 100;
    auto* cl = app.add_subcommand("cluster", "Cluster the k-NN graph; dump `node_id cluster_id` lines");
    add_common(cl, cl_c);
    cl->add_option("-i,--input", cl_input, "Dataset file")->required();
    cl->add_option("--k", cl_k, "Neighbors per sample");
    cl->add_option("--beta", cl_beta, "RBF scale, or 'median'");
    cl->add_option("--mode", cl_mode, "Clustering method")->check(CLI::IsMember({"louvain", "leiden", "pressure"}));
    cl->add_option("--max-passes", cl_max_passes, "Louvain pass limit");
    cl->add_option("--max-iters", cl_max_iters, "Pressure sweep limit");
    cl->add_option("--report", cl_report, "Diagnostics JSON {Q, Phi, n_clusters, passes}");

    // assign
    Common as_c;
    std::string as_input, as_partition;
    auto* as = app.add_subcommand("assign", "Match clusters to labels; write the assignment JSON");
    add_common(as, as_c);
    as->add_option("-i,--input", as_input, "Dataset file")->required();
    as->add_option("--partition", as_partition, "Partition dump")->required();

    // targets
    Common tg_c;
    std::string tg_input, tg_partition, tg_loss_mode = "exact";
    std::size_t tg_k = 5, tg_k_prime = 50;
    double tg_variance = 0.95;
    bool tg_orthogonal = false, tg_per_cluster = false;
    auto* tg = app.add_subcommand("targets", "Compute correction targets; write a .lccp plan");
    add_common(tg, tg_c);
    tg->add_option("-i,--input", tg_input, "Dataset file")->required();
    tg->add_option("--partition", tg_partition, "Partition dump")->required();
    tg->add_option("--k", tg_k, "CC neighbors per target");
    tg->add_option("--loss-mode", tg_loss_mode, "exact or approximate")->check(CLI::IsMember({"exact", "approximate"}));
    tg->add_flag("--per-cluster", tg_per_cluster, "Search targets per (label, cluster)");
    tg->add_flag("--orthogonal", tg_orthogonal, "Project corrections off the local tangent space");
    tg->add_option("--k-prime", tg_k_prime, "Neighbors for the tangent estimate");
    tg->add_option("--variance-fraction", tg_variance, "Explained variance kept as tangent space");

    // loss
    Common ls_c;
    std::string ls_input, ls_plan, ls_gradient;
    auto* ls = app.add_subcommand("loss", "Evaluate the clustering loss of a plan");
    add_common(ls, ls_c);
    ls->add_option("-i,--input", ls_input, "Dataset file")->required();
    ls->add_option("--plan", ls_plan, "Correction plan (.lccp)")->required();
    ls->add_option("--gradient", ls_gradient, "Write the loss gradient (.lccd layout)");

    // metrics
    Common mt_c;
    std::string mt_input, mt_plan, mt_probs;
    auto* mt = app.add_subcommand("metrics", "Accuracy and cross-entropy on CC / MC subsets");
    add_common(mt, mt_c);
    mt->add_option("-i,--input", mt_input, "Dataset file (labels)")->required();
    mt->add_option("--plan", mt_plan, "Correction plan (CC flags)")->required();
    mt->add_option("--probs", mt_probs, "Predicted probabilities CSV")->required();

    // pipeline
    Common pl_c;
    PipelineConfig pl;
    std::string pl_input, pl_beta = "1", pl_mode = "leiden", pl_loss_mode = "exact", pl_report, pl_gradient;
    auto* pipe = app.add_subcommand("pipeline", "Full round: graph, clusters, assignment, targets, loss");
    add_common(pipe, pl_c);
    pipe->add_option("-i,--input", pl_input, "Dataset file")->required();
    pipe->add_option("--k", pl.k, "Neighbors for the graph and the targets");
    pipe->add_option("--beta", pl_beta, "RBF scale, or 'median'");
    pipe->add_option("--mode", pl_mode, "Clustering method")->check(CLI::IsMember({"louvain", "leiden", "pressure"}));
    pipe->add_option("--loss-mode", pl_loss_mode, "exact or approximate")->check(CLI::IsMember({"exact", "approximate"}));
    pipe->add_flag("--per-cluster", pl.per_cluster_targets, "Search targets per (label, cluster)");
    pipe->add_flag("--orthogonal", pl.orthogonal, "Project corrections off the local tangent space");
    pipe->add_option("--k-prime", pl.k_prime, "Neighbors for the tangent estimate");
    pipe->add_option("--variance-fraction", pl.variance_fraction, "Explained variance kept as tangent space");
    pipe->add_option("--report", pl_report, "Report JSON");
    pipe->add_option("--gradient", pl_gradient, "Write the loss gradient (.lccd layout)");
    pipe->add_option("--w", pl.w, "Loss weight recorded in the report");
    pipe->add_option("--threads", pl.threads, "Worker threads");
    pipe->add_flag("--timings", pl.report_timings, "Include stage timings in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*gen) {
            blob.seed = gen_c.seed;
            if (gen_c.output.empty()) throw ParameterError("--output is required");
            save_dataset(generate_blobs(blob), gen_c.output, parse_format(gen_c.format));
        } else if (*knn) {
            const auto ds = load_dataset(knn_input, parse_format(knn_c.format));
            const auto beta = parse_beta(knn_beta);
            const auto g = build_knn_graph(ds.z, knn_k, beta ? *beta : median_beta(ds.z, knn_c.seed));
            emit_text(knn_c.output, [&](std::ostream& out) { write_graph_text(g, out); });
        } else if (*cl) {
            const auto ds = load_dataset(cl_input, parse_format(cl_c.format));
            const auto beta = parse_beta(cl_beta);
            const auto g = build_knn_graph(ds.z, cl_k, beta ? *beta : median_beta(ds.z, cl_c.seed));
            Partition part;
            std::size_t passes = 0;
            if (cl_mode == "pressure") {
                auto res = knn_pressure(g, cl_c.seed, cl_max_iters);
                part = std::move(res.partition);
                passes = res.state.sweeps;
            } else {
                CommunityConfig cfg;
                cfg.mode = cl_mode == "louvain" ? CommunityMode::louvain : CommunityMode::leiden;
                cfg.seed = cl_c.seed;
                cfg.max_passes = cl_max_passes;
                auto res = louvain_detailed(g, cfg);
                part = std::move(res.partition);
                passes = res.passes;
            }
            emit_text(cl_c.output, [&](std::ostream& out) { write_partition_text(part, out); });
            if (!cl_report.empty()) {
                const auto cond = conductance_details(g, part.cluster_of, part.n_clusters);
                emit_json(cl_report, Json{{"Q", modularity(g, part)},
                                          {"Phi", cond.phi},
                                          {"Phi_per_node", cond.per_node},
                                          {"n_clusters", part.n_clusters},
                                          {"passes", passes}});
            }
        } else if (*as) {
            const auto ds = load_dataset(as_input, parse_format(as_c.format));
            const auto part = read_partition(as_partition, ds.size());
            const auto a = optimal_assignment(overlap_matrix(ds.y, part));
            const auto cc = classify_samples(ds.y, part, a);
            const auto n_cc = static_cast<std::size_t>(std::count(cc.begin(), cc.end(), true));
            emit_json(as_c.output, assignment_json(a, n_cc, ds.size() - n_cc));
        } else if (*tg) {
            if (tg_c.output.empty()) throw ParameterError("--output is required");
            const auto ds = load_dataset(tg_input, parse_format(tg_c.format));
            const auto part = read_partition(tg_partition, ds.size());
            const auto a = optimal_assignment(overlap_matrix(ds.y, part));
            const auto cc = classify_samples(ds.y, part, a);
            CorrectionPlan plan;
            if (tg_loss_mode == "approximate") {
                if (tg_orthogonal) throw ParameterError("orthogonal correction requires the exact loss mode");
                plan = approximate_targets(ds.z, ds.y, part, a, cc, tg_c.seed);
            } else {
                plan = tg_per_cluster ? correction_targets_per_cluster(ds.z, ds.y, part, a, cc, tg_k)
                                      : correction_targets(ds.z, ds.y, cc, tg_k);
                if (tg_orthogonal) plan = orthogonalize_targets(ds.z, part, std::move(plan), tg_k_prime, tg_variance);
            }
            round_targets_to_f32(plan);
            save_plan(plan, tg_c.output);
        } else if (*ls) {
            const auto ds = load_dataset(ls_input, parse_format(ls_c.format));
            const auto plan = load_plan(ls_plan);
            if (plan.size() != ds.size() || plan.dim() != ds.dim()) throw ValidationError("plan shape does not match dataset");
            const auto report = clustering_loss(ds.z, plan);
            if (!ls_gradient.empty()) {
                LatentDataset grad{clustering_loss_grad(ds.z, plan), std::vector<LabelId>(ds.size(), 0), std::nullopt};
                save_dataset(grad, ls_gradient);
            }
            emit_json(ls_c.output, loss_json(report));
        } else if (*mt) {
            const auto ds = load_dataset(mt_input, parse_format(mt_c.format));
            const auto plan = load_plan(mt_plan);
            if (plan.size() != ds.size()) throw ValidationError("plan size does not match dataset");
            const auto probs = read_probabilities(mt_probs);
            emit_json(mt_c.output, subset_metrics_json(subset_metrics(probs, ds.y, plan.is_cc)));
        } else if (*pipe) {
            pl.input = pl_input;
            pl.input_format = parse_format(pl_c.format);
            pl.beta = parse_beta(pl_beta);
            pl.cluster_mode = parse_cluster_mode(pl_mode);
            pl.loss_mode = pl_loss_mode == "approximate" ? LossMode::approximate : LossMode::exact;
            pl.seed = pl_c.seed;
            pl.plan_output = pl_c.output;
            pl.report_output = pl_report;
            pl.emit_gradient = !pl_gradient.empty();
            pl.gradient_output = pl_gradient;
            const auto result = run_pipeline(pl);
            if (pl_report.empty()) std::cout << report_json(result.report, pl, pl.report_timings).dump(2) << '\n';
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
