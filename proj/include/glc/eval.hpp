#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glc/cascade.hpp"
#include "glc/graph.hpp"
#include "glc/recovery.hpp"

namespace glc {

// Benchmark harness: metrics against the ground-truth graph, lambda sweeps
// for precision/recall tradeoff curves, and the full factorial experiment
// runner (estimator x n x seed) with CSV/SVG artifacts.

struct Metrics {
    double precision;
    double recall;
    double f1;
};

// Edge-set precision/recall/F1. Empty estimate: precision is 1 if the truth
// is also empty, else 0. Zero denominators yield 0 (and F1 is 0 whenever
// precision + recall is 0).
Metrics precision_recall_f1(const Graph& estimate, const Graph& truth);

// Frobenius norm of the entrywise weight difference.
double l2_error(const Graph& estimate, const Graph& truth);
// Per-target-node column l2 errors, length num_nodes.
std::vector<double> per_node_l2_errors(const Graph& estimate, const Graph& truth);

struct PrPoint {
    double lambda;
    double precision;
    double recall;
};

// Full graph inference per lambda on a shared trace set; rows sorted by
// descending lambda.
std::vector<PrPoint> pr_curve(const std::vector<CascadeTrace>& traces, int32_t num_nodes,
                              const CascadeModel& model, const Graph& truth,
                              const std::vector<double>& lambda_grid, double eta,
                              const SolverConfig& solver, int32_t jobs);

// One results row. `graph` carries an "@pinit=<v>" suffix when the config
// sweeps p_init; `estimator` carries "@lambda=<v>" when it sweeps lambda
// (the fixed CSV schema has no columns for either).
struct MetricRow {
    std::string graph;
    std::string estimator;
    int64_t n_cascades;
    int64_t n_measurements_total;
    uint64_t seed;
    double precision;
    double recall;
    double f1;
    double l2_error;
    double wall_time_ms;
};

// Header: graph,estimator,n_cascades,n_measurements_total,seed,precision,
// recall,f1,l2_error,wall_time_ms
void write_results_csv(const std::vector<MetricRow>& rows, const std::string& path);

struct GraphSpec {
    std::string name;
    std::string kind;  // ba | ws | holme-kim | kronecker
    int32_t nodes = 0;
    int32_t k = 0;
    double beta = 0.1;
    double p_triad = 0.25;
    std::array<double, 4> initiator{0.9, 0.5, 0.5, 0.3};
    int32_t power = 0;
    int64_t edges_target = 0;  // directed; used when k == 0 (and by kronecker)
};

GraphTopology build_topology(const GraphSpec& spec, uint64_t seed);
// k derived from a directed edge-count target (ws: nearest even degree;
// ba/holme-kim: quadratic attachment solve).
int32_t derive_k(const std::string& kind, int32_t nodes, int64_t edges_target);

struct ExperimentConfig {
    GraphSpec graph;
    CascadeModel model;
    double weight_low = 0.2;
    double weight_high = 0.7;
    double weak_prob = 0.0;  // >0 adds weak background edges to the truth
    double weak_low = 0.0;
    double weak_high = 0.1;
    std::vector<int64_t> n_list;
    std::vector<double> p_init_list{0.05};
    std::vector<Estimator> estimators{Estimator::sparse_mle};
    double eta = 0.1;
    std::string lambda_rule = "theorem";  // theorem | fixed | sweep
    double lambda_fixed = 0.1;
    std::vector<double> lambda_sweep;
    double alpha = 0.0;  // 0 -> estimate from the generated weights
    double delta = 0.0;
    int32_t seeds = 1;
    uint64_t master_seed = 1;
    int32_t max_parents = 16;
    bool timing = false;
    SolverConfig solver;
    std::string output_dir = ".";
};

struct ExperimentResult {
    std::vector<MetricRow> rows;
    std::vector<std::string> files;  // everything written, results.csv first
};

// Runs the factorial sweep and writes results.csv plus plot artifacts into
// config.output_dir. Deterministic in config.master_seed (wall times are
// reported as 0 unless config.timing). jobs parallelizes per-node solves.
ExperimentResult run_experiment(const ExperimentConfig& config, int32_t jobs);

enum class PlotKind { f1_vs_n, l2_vs_n, time_vs_n, pr_curve, f1_vs_pinit };

// Deterministic SVG + CSV pair per (graph, estimator) series present in rows;
// returns written paths. Curves show the median across seeds with an
// interquartile band.
std::vector<std::string> emit_plot(const std::vector<MetricRow>& rows, PlotKind kind,
                                   const std::string& output_dir);

}  // namespace glc
