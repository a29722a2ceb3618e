#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glc/cascade.hpp"
#include "glc/graph.hpp"

namespace glc {

// Per-node estimation: given measurements (x_r, y_r) for one target node,
// recover its incoming weight column theta by l1-regularized maximum
// likelihood (or one of the benchmark estimators).

enum class Estimator { sparse_mle, mle, lasso, greedy };
std::string estimator_name(Estimator est);
Estimator estimator_from_name(const std::string& name);  // throws param_error

struct SolverConfig {
    double lambda = 0.0;         // l1 weight; 0 disables regularization
    int32_t max_iterations = 5000;
    double tolerance = 1e-8;     // relative objective change AND step norm
    double shrink = 0.5;         // backtracking step shrink factor in (0,1)
    double initial_step = 1.0;
    double eps_clamp = 1e-9;     // f is kept inside [eps, 1-eps]

    void validate() const;  // throws param_error
};

struct InferenceResult {
    std::vector<double> theta;
    int32_t iterations = 0;
    double objective = 0.0;  // final composite objective (loss + lambda*l1)
    bool converged = false;
    int64_t n = 0;           // measurements used
    double lambda = 0.0;
    // Composite objective after every accepted step (first entry is the
    // starting point); nonincreasing by construction.
    std::vector<double> objective_trace;
};

// --- likelihood ----------------------------------------------------------
//
// All three evaluate the clamped negative log-likelihood
//   (1/n) sum_r -[ y_r log f(z_r) + (1-y_r) log(1-f(z_r)) ],
// where z_r = <theta, x_r> is clamped into the range where f stays in
// [eps_clamp, 1-eps_clamp]. Clamping the argument (not the value) keeps
// value, gradient and Hessian consistent wherever no clamp is active; at a
// clamped row the analytic derivative at the clamp point is used, so the
// gradient still points away from the boundary. Empty measurement sets throw
// param_error (callers skip such nodes).

double neg_log_likelihood(std::span<const double> theta, const MeasurementSet& ms,
                          const CascadeModel& model, double eps_clamp = 1e-9);

void nll_gradient(std::span<const double> theta, const MeasurementSet& ms,
                  const CascadeModel& model, std::span<double> grad, double eps_clamp = 1e-9);

// Hessian as a reweighted Gram matrix: (1/n) sum_r w_r x_r x_r^T with
// w_r = -[ y_r (log f)'' + (1-y_r) (log(1-f))'' ](z_r) >= 0.
Eigen::MatrixXd nll_hessian(std::span<const double> theta, const MeasurementSet& ms,
                            const CascadeModel& model, double eps_clamp = 1e-9);

// Squared loss (1/n) sum_r (f(z_r) - y_r)^2 and its gradient; the benchmark
// "lasso" smooth part. No clamping (no logarithms involved).
double squared_loss(std::span<const double> theta, const MeasurementSet& ms,
                    const CascadeModel& model);
void squared_loss_gradient(std::span<const double> theta, const MeasurementSet& ms,
                           const CascadeModel& model, std::span<double> grad);

// --- regularization and thresholding -----------------------------------

// lambda = 2 sqrt(log m / (alpha n^(1-delta))). Requires m >= 2, n >= 1,
// alpha in (0,1), delta in [0,1).
double select_lambda(int32_t num_nodes, int64_t n, double alpha, double delta = 0.0);

// Indices with theta[j] > eta, ascending (strict inequality).
std::vector<int32_t> threshold_support(std::span<const double> theta, double eta);

// Link-function regularity bound used by the lambda rule. ic/cice: minimum
// edge probability 1 - exp(-epsilon*theta); voter: min(min theta,
// 1 - max theta); logistic: 1 / max(sigma(t), sigma(z_max - t)) capped just
// below 1, with z_max the largest incoming weight sum. Callers must still
// check the result lies in (0,1) — degenerate graphs can push it to 0.
double estimate_alpha(const Graph& graph, const CascadeModel& model);
// Same bound from a known weight-probability range instead of a graph.
double estimate_alpha_from_bounds(ModelKind kind, double low, double high);

// --- solvers ---------------------------------------------------------------
//
// Accelerated proximal gradient (monotone, with backtracking line search and
// restart-on-increase), initialized at 0. The proximal step composes
// soft-thresholding with projection onto the model domain: theta >= 0 for
// ic/cice/logistic, theta in [0,1]^m for voter. Deterministic.

// Composite objective: neg_log_likelihood + lambda * ||theta||_1.
InferenceResult solve_sparse_mle(const MeasurementSet& ms, const CascadeModel& model,
                                 const SolverConfig& config);

// Plain MLE: identical scheme with lambda = 0 (projection still applies).
InferenceResult solve_mle(const MeasurementSet& ms, const CascadeModel& model,
                          const SolverConfig& config);

// Squared loss + lambda * ||theta||_1 under the same prox scheme.
InferenceResult solve_lasso(const MeasurementSet& ms, const CascadeModel& model,
                            const SolverConfig& config);

// Greedy parent addition: repeatedly add the candidate whose 1-d refit (all
// other weights fixed) most decreases the NLL, stopping when the best
// improvement drops below improvement_tol or max_parents is reached.
// Ties break toward the lowest node id.
InferenceResult solve_greedy(const MeasurementSet& ms, const CascadeModel& model,
                             int32_t max_parents, double improvement_tol = 1e-9,
                             const SolverConfig& config = {});

// --- whole-graph inference ---------------------------------------------

// How to pick lambda per node: a fixed value, or the theorem rule evaluated
// at that node's measurement count.
struct LambdaRule {
    enum class Kind { fixed, theorem };
    Kind kind = Kind::fixed;
    double lambda = 0.0;
    double alpha = 0.0;
    double delta = 0.0;

    static LambdaRule fixed(double lambda);
    static LambdaRule theorem(double alpha, double delta = 0.0);
    double value(int32_t num_nodes, int64_t n) const;
};

struct InferOptions {
    Estimator estimator = Estimator::sparse_mle;
    LambdaRule lambda = LambdaRule::fixed(0.0);
    double eta = 0.1;             // support threshold
    SolverConfig solver;
    int32_t max_parents = 16;     // greedy only
    double improvement_tol = 1e-9;
    int32_t jobs = 1;
};

struct NodeSolve {
    int32_t node = -1;
    bool skipped = false;  // no measurements for this node
    InferenceResult result;
};

struct GraphEstimate {
    Graph graph;  // edges {j -> i : theta_hat_i[j] > eta}, weights theta_hat
    std::vector<NodeSolve> nodes;
};

// Per-node estimation over all targets; nodes without measurements are
// recorded as skipped. Self-weights (theta_hat_i[i]) never become edges.
// Deterministic and independent of jobs.
GraphEstimate infer_graph(const std::vector<CascadeTrace>& traces, int32_t num_nodes,
                          const CascadeModel& model, const InferOptions& options);

}  // namespace glc
