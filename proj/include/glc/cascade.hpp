#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "glc/graph.hpp"

namespace glc {

// A cascade process: at every step, node j flips to active with probability
// f(<theta_j, X^t>) where X^t is the currently-active indicator vector and f
// is the model's inverse link. Parameters beyond the kind:
//   epsilon   — cice rate scale (f(z) = 1 - exp(-epsilon*z))
//   threshold — logistic offset (f(z) = 1 / (1 + exp(-z + threshold)))
//   horizon   — voter step count T (other models use it only as an extra cap)
struct CascadeModel {
    ModelKind kind = ModelKind::ic;
    double epsilon = 1.0;
    double threshold = 0.0;
    int32_t horizon = 10;

    static CascadeModel ic() { return {ModelKind::ic, 1.0, 0.0, 10}; }
    static CascadeModel voter(int32_t horizon = 10) { return {ModelKind::voter, 1.0, 0.0, horizon}; }
    static CascadeModel cice(double epsilon) { return {ModelKind::cice, epsilon, 0.0, 10}; }
    static CascadeModel logistic(double threshold) {
        return {ModelKind::logistic, 1.0, threshold, 10};
    }

    void validate() const;  // throws param_error
};

// --- inverse link functions -------------------------------------------------

// f(z): infection probability given weighted active mass z. For voter, z
// outside [0, 1] by more than 1e-9 throws param_error (weights must be
// normalized); within tolerance it is clamped.
double link_value(const CascadeModel& model, double z);

// First derivatives of log f and log(1-f) at z. At a boundary where
// f(z) is exactly 0 or 1 the corresponding value is +-inf — callers that
// need finite values clamp z first (see clamp_z).
struct LinkLogDerivs {
    double dlogf;
    double dlog1mf;
};
LinkLogDerivs link_log_derivs(const CascadeModel& model, double z);

// Second derivatives of log f and log(1-f) at z (both <= 0: every supported
// link has log-concave f and 1-f).
LinkLogDerivs link_log_derivs2(const CascadeModel& model, double z);

// Smallest interval [lo, hi] such that f(clamp(z, lo, hi)) stays inside
// [eps, 1-eps]. Clamping z rather than f keeps value/gradient/Hessian of the
// likelihood mutually consistent wherever no clamp is active.
struct ZRange {
    double lo;
    double hi;
};
ZRange clamp_range(const CascadeModel& model, double eps);
double clamp_z(const CascadeModel& model, double z, double eps);

// --- traces -------------------------------------------------------------

// One simulated cascade. steps[t] lists node ids (ascending) active at time
// t: for ic/logistic these are the *newly contagious* nodes (steps[0] ==
// sources, and the final entry is an empty list recording the last simulated
// transition, which produced no infections); for cice the full infected set;
// for voter the full blue set. Simulated transitions therefore run from
// every steps[t] to steps[t+1].
struct CascadeTrace {
    ModelKind kind = ModelKind::ic;
    std::vector<int32_t> sources;
    std::vector<std::vector<int32_t>> steps;
};

// Draw sources: each node independently with probability p_init, redrawing
// until nonempty.
std::vector<int32_t> draw_sources(int32_t num_nodes, double p_init, uint64_t seed);

// Simulate one cascade from the given sources. Deterministic in (graph,
// model, sources, seed): per-step candidate nodes are visited in ascending id
// order with one uniform draw each. Throws data_error if the graph's model
// tag disagrees with model.kind or voter weights are unnormalized, and
// numerical_error if a simulation exceeds the 10*num_nodes safety cap.
CascadeTrace simulate(const Graph& graph, const CascadeModel& model,
                      const std::vector<int32_t>& sources, uint64_t seed);

// n independent cascades with sources drawn at p_init; sub-seeded per index.
std::vector<CascadeTrace> batch_simulate(const Graph& graph, const CascadeModel& model, int32_t n,
                                         double p_init, uint64_t seed);

// --- measurements ---------------------------------------------------------

// Per-target-node regression view of a trace set: row r is the sparse active
// indicator x_r (ascending ids) with binary outcome y_r = [target active next
// step]. Rows are stored CSR-style for the solver kernels.
struct MeasurementSet {
    int32_t target = -1;
    int32_t num_nodes = 0;
    std::vector<int32_t> idx;       // concatenated active ids per row
    std::vector<int64_t> offsets;   // rows+1 prefix offsets into idx
    std::vector<uint8_t> outcomes;  // y per row

    int64_t rows() const { return static_cast<int64_t>(outcomes.size()); }
    int64_t nnz() const { return static_cast<int64_t>(idx.size()); }
    bool empty() const { return outcomes.empty(); }
    std::span<const int32_t> row(int64_t r) const {
        return {idx.data() + offsets[r], static_cast<size_t>(offsets[r + 1] - offsets[r])};
    }
    void add_row(std::span<const int32_t> ids, bool y);
};

// Measurements of node i in one trace:
//   ic/logistic — one row per step while i is susceptible, ending with the
//     step where i turns contagious (outcome 1) or the trace's final
//     transition (outcome 0);
//   cice        — rows while i is uninfected;
//   voter       — one row per step except the last, outcome = i blue next.
MeasurementSet extract_measurements(const CascadeTrace& trace, int32_t num_nodes, int32_t target);

// Concatenation over traces, in trace order. Throws data_error on mixed
// model kinds.
MeasurementSet pool_measurements(const std::vector<CascadeTrace>& traces, int32_t num_nodes,
                                 int32_t target);

// --- trace file I/O --------------------------------------------------------
//
// JSON lines, one cascade per line:
//   {"model":"ic","sources":[0,3],"steps":[[0,3],[2],[]]}
// ids are 0-based and ascending within each list.

void write_traces(const std::vector<CascadeTrace>& traces, const std::string& path);
void write_traces(const std::vector<CascadeTrace>& traces, std::ostream& out);
std::vector<CascadeTrace> read_traces(const std::string& path);
std::vector<CascadeTrace> read_traces(std::istream& in, const std::string& display_name);

}  // namespace glc
