#include "glc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "glc/errors.hpp"
#include "glc/rng.hpp"

namespace glc {

// --- metrics ---------------------------------------------------------------

Metrics precision_recall_f1(const Graph& estimate, const Graph& truth) {
    if (estimate.num_nodes() != truth.num_nodes())
        throw param_error("estimate and truth disagree on num_nodes");
    std::set<std::pair<int32_t, int32_t>> true_edges;
    for (const Edge& e : truth.edges()) true_edges.insert({e.src, e.dst});
    int64_t hit = 0;
    for (const Edge& e : estimate.edges()) hit += true_edges.count({e.src, e.dst});
    const int64_t n_est = estimate.num_edges();
    const int64_t n_true = truth.num_edges();

    Metrics m{};
    if (n_est == 0) {
        m.precision = n_true == 0 ? 1.0 : 0.0;
    } else {
        m.precision = static_cast<double>(hit) / static_cast<double>(n_est);
    }
    m.recall = n_true == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(n_true);
    const double pr = m.precision + m.recall;
    m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
    return m;
}

std::vector<double> per_node_l2_errors(const Graph& estimate, const Graph& truth) {
    if (estimate.num_nodes() != truth.num_nodes())
        throw param_error("estimate and truth disagree on num_nodes");
    const int32_t m = truth.num_nodes();
    std::vector<double> errors(static_cast<size_t>(m), 0.0);
    for (int32_t j = 0; j < m; ++j) {
        std::map<int32_t, double> diff;
        for (const Edge& e : truth.in_edges(j)) diff[e.src] += e.theta;
        for (const Edge& e : estimate.in_edges(j)) diff[e.src] -= e.theta;
        double acc = 0.0;
        for (const auto& [src, d] : diff) acc += d * d;
        errors[j] = std::sqrt(acc);
    }
    return errors;
}

double l2_error(const Graph& estimate, const Graph& truth) {
    double acc = 0.0;
    for (double e : per_node_l2_errors(estimate, truth)) acc += e * e;
    return std::sqrt(acc);
}

// --- precision/recall sweep ------------------------------------------------

std::vector<PrPoint> pr_curve(const std::vector<CascadeTrace>& traces, int32_t num_nodes,
                              const CascadeModel& model, const Graph& truth,
                              const std::vector<double>& lambda_grid, double eta,
                              const SolverConfig& solver, int32_t jobs) {
    if (lambda_grid.empty()) throw param_error("lambda grid must be nonempty");
    std::vector<double> grid = lambda_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    std::vector<PrPoint> points;
    for (double lambda : grid) {
        InferOptions opts;
        opts.estimator = Estimator::sparse_mle;
        opts.lambda = LambdaRule::fixed(lambda);
        opts.eta = eta;
        opts.solver = solver;
        opts.jobs = jobs;
        const GraphEstimate ge = infer_graph(traces, num_nodes, model, opts);
        const Metrics m = precision_recall_f1(ge.graph, truth);
        points.push_back({lambda, m.precision, m.recall});
    }
    return points;
}

// --- results CSV ------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_results_csv(const std::vector<MetricRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << "graph,estimator,n_cascades,n_measurements_total,seed,precision,recall,f1,"
           "l2_error,wall_time_ms\n";
    for (const MetricRow& r : rows) {
        out << r.graph << ',' << r.estimator << ',' << r.n_cascades << ','
            << r.n_measurements_total << ',' << r.seed << ',' << fmt17(r.precision) << ','
            << fmt17(r.recall) << ',' << fmt17(r.f1) << ',' << fmt17(r.l2_error) << ','
            << fmt17(r.wall_time_ms) << '\n';
    }
    out.flush();
    if (!out) throw data_error("write to '" + path + "' failed");
}

// --- topology from spec ----------------------------------------------------

int32_t derive_k(const std::string& kind, int32_t nodes, int64_t edges_target) {
    if (nodes < 2 || edges_target < 2) throw param_error("cannot derive k: degenerate target");
    const double und = static_cast<double>(edges_target) / 2.0;
    if (kind == "ws") {
        // Ring degree closest to the target mean: directed edges ~ nodes * k.
        int32_t k = static_cast<int32_t>(
            std::llround(static_cast<double>(edges_target) / nodes / 2.0) * 2);
        return std::max(k, 2);
    }
    if (kind == "ba" || kind == "holme-kim") {
        // (nodes - k) * k undirected edges: smaller quadratic root.
        const double disc = static_cast<double>(nodes) * nodes - 4.0 * und;
        if (disc < 0.0) throw param_error("edge target too dense for attachment generator");
        const int32_t k = static_cast<int32_t>(std::llround((nodes - std::sqrt(disc)) / 2.0));
        return std::max(k, 1);
    }
    throw param_error("cannot derive k for generator kind '" + kind + "'");
}

GraphTopology build_topology(const GraphSpec& spec, uint64_t seed) {
    if (spec.kind == "kronecker") {
        int32_t power = spec.power;
        if (power == 0) {
            // infer from node count (must be a power of two)
            if (spec.nodes <= 1 || (spec.nodes & (spec.nodes - 1)) != 0)
                throw param_error("kronecker node count must be a power of two");
            power = 0;
            for (int32_t v = spec.nodes; v > 1; v >>= 1) ++power;
        }
        if (spec.edges_target < 2) throw param_error("kronecker needs edges_target");
        return make_kronecker(spec.initiator, power, spec.edges_target / 2, seed);
    }
    const int32_t k = spec.k > 0 ? spec.k : derive_k(spec.kind, spec.nodes, spec.edges_target);
    if (spec.kind == "ba") return make_barabasi_albert(spec.nodes, k, seed);
    if (spec.kind == "ws") return make_watts_strogatz(spec.nodes, k, spec.beta, seed);
    if (spec.kind == "holme-kim") return make_holme_kim(spec.nodes, k, spec.p_triad, seed);
    throw param_error("unknown generator kind '" + spec.kind +
                      "' (expected ba, ws, holme-kim or kronecker)");
}

// --- experiment runner -------------------------------------------------

namespace {

std::string trim_zeros(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int32_t jobs) {
    if (config.n_list.empty()) throw param_error("config: n_list must be nonempty");
    if (config.p_init_list.empty()) throw param_error("config: p_init must be nonempty");
    if (config.estimators.empty()) throw param_error("config: estimators must be nonempty");
    if (config.seeds < 1) throw param_error("config: seeds must be >= 1");
    if (config.lambda_rule != "theorem" && config.lambda_rule != "fixed" &&
        config.lambda_rule != "sweep")
        throw param_error("config: lambda_rule must be theorem, fixed or sweep");
    if (config.lambda_rule == "sweep" && config.lambda_sweep.empty())
        throw param_error("config: lambda_rule=sweep needs a lambda list");
    config.solver.validate();
    std::filesystem::create_directories(config.output_dir);

    const uint64_t master = config.master_seed;
    const GraphTopology topology = build_topology(config.graph, derive_seed(master, {0}));
    const bool multi_pinit = config.p_init_list.size() > 1;

    std::vector<MetricRow> rows;
    for (size_t pi = 0; pi < config.p_init_list.size(); ++pi) {
        const double p_init = config.p_init_list[pi];
        std::string graph_label = config.graph.name;
        if (multi_pinit) graph_label += "@pinit=" + trim_zeros(p_init);
        for (size_t ni = 0; ni < config.n_list.size(); ++ni) {
            const int64_t n = config.n_list[ni];
            for (int32_t s = 0; s < config.seeds; ++s) {
                // Fresh weights and cascades per data point.
                const uint64_t cell[3] = {static_cast<uint64_t>(pi), static_cast<uint64_t>(ni),
                                          static_cast<uint64_t>(s)};
                Graph truth = assign_weights(topology, config.model.kind, config.weight_low,
                                             config.weight_high,
                                             derive_seed(master, {1, cell[0], cell[1], cell[2]}));
                if (config.weak_prob > 0.0)
                    truth = add_weak_edges(truth, config.weak_prob, config.weak_low,
                                           config.weak_high,
                                           derive_seed(master, {2, cell[0], cell[1], cell[2]}));
                const auto traces =
                    batch_simulate(truth, config.model, static_cast<int32_t>(n), p_init,
                                   derive_seed(master, {3, cell[0], cell[1], cell[2]}));
                const double alpha_eff =
                    config.alpha > 0.0 ? config.alpha : estimate_alpha(truth, config.model);

                for (Estimator est : config.estimators) {
                    std::vector<double> lambdas{0.0};
                    if (config.lambda_rule == "sweep" &&
                        (est == Estimator::sparse_mle || est == Estimator::lasso))
                        lambdas = config.lambda_sweep;
                    for (double lambda : lambdas) {
                        MetricRow row;
                        row.graph = graph_label;
                        row.estimator = estimator_name(est);
                        if (config.lambda_rule == "sweep" &&
                            (est == Estimator::sparse_mle || est == Estimator::lasso))
                            row.estimator += "@lambda=" + trim_zeros(lambda);
                        row.n_cascades = n;
                        row.seed = static_cast<uint64_t>(s);
                        try {
                            InferOptions opts;
                            opts.estimator = est;
                            if (config.lambda_rule == "theorem")
                                opts.lambda = LambdaRule::theorem(alpha_eff, config.delta);
                            else if (config.lambda_rule == "fixed")
                                opts.lambda = LambdaRule::fixed(config.lambda_fixed);
                            else
                                opts.lambda = LambdaRule::fixed(lambda);
                            opts.eta = config.eta;
                            opts.solver = config.solver;
                            opts.max_parents = config.max_parents;
                            opts.jobs = jobs;

                            const auto tic = std::chrono::steady_clock::now();
                            const GraphEstimate ge =
                                infer_graph(traces, truth.num_nodes(), config.model, opts);
                            const auto toc = std::chrono::steady_clock::now();
                            const double ms =
                                std::chrono::duration<double, std::milli>(toc - tic).count();

                            int64_t total_meas = 0;
                            for (const NodeSolve& nsv : ge.nodes)
                                if (!nsv.skipped) total_meas += nsv.result.n;

                            const Metrics metrics = precision_recall_f1(ge.graph, truth);
                            row.n_measurements_total = total_meas;
                            row.precision = metrics.precision;
                            row.recall = metrics.recall;
                            row.f1 = metrics.f1;
                            row.l2_error = l2_error(ge.graph, truth);
                            row.wall_time_ms = config.timing ? ms : 0.0;
                        } catch (const std::exception& e) {
                            // Failed cells stay in the CSV as NaN metrics so
                            // the bundle records them; the sweep continues.
                            const double nan = std::numeric_limits<double>::quiet_NaN();
                            row.n_measurements_total = 0;
                            row.precision = row.recall = row.f1 = nan;
                            row.l2_error = nan;
                            row.wall_time_ms = 0.0;
                            std::fprintf(stderr, "cell failed (%s, n=%lld, seed=%d): %s\n",
                                         row.estimator.c_str(), static_cast<long long>(n), s,
                                         e.what());
                        }
                        rows.push_back(std::move(row));
                    }
                }
            }
        }
    }

    ExperimentResult result;
    result.rows = rows;
    const std::string results_path =
        (std::filesystem::path(config.output_dir) / "results.csv").string();
    write_results_csv(rows, results_path);
    result.files.push_back(results_path);

    auto append = [&result](std::vector<std::string> files) {
        for (auto& f : files) result.files.push_back(std::move(f));
    };
    if (config.n_list.size() > 1) {
        append(emit_plot(rows, PlotKind::f1_vs_n, config.output_dir));
        append(emit_plot(rows, PlotKind::l2_vs_n, config.output_dir));
        if (config.timing) append(emit_plot(rows, PlotKind::time_vs_n, config.output_dir));
    }
    if (config.lambda_rule == "sweep") append(emit_plot(rows, PlotKind::pr_curve, config.output_dir));
    if (multi_pinit) append(emit_plot(rows, PlotKind::f1_vs_pinit, config.output_dir));
    return result;
}

}  // namespace glc
