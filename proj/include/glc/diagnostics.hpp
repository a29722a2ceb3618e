#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glc/cascade.hpp"
#include "glc/graph.hpp"

namespace glc {

// Empirical checks of the conditions the recovery guarantee rests on:
// restricted eigenvalues of the (reweighted) Gram matrix, link-derivative
// bounds, and concentration of the sample Hessian around its expectation.

// (1/n) sum_r x_r x_r^T over the measurement rows, dense m x m.
Eigen::MatrixXd gram_matrix(const MeasurementSet& ms);

struct ReEstimate {
    double gamma_upper;    // lambda_min of the S x S principal submatrix
    double gamma_sampled;  // min Rayleigh quotient over cone samples
    int64_t num_samples;
};

// Restricted-eigenvalue estimate over the cone
//   { v : ||v_{S^c}||_1 <= 3 ||v_S||_1 }.
// gamma_upper comes from an exact eigensolve on the support block (its
// eigenvector, zero-padded, lies in the cone, so it is also evaluated as a
// sample and gamma_sampled <= gamma_upper always holds). The remaining
// directions draw v_S coordinates uniform on [-1,1] and off-support mass
// with l1 norm u * 3||v_S||_1, u ~ U[0,1]. Requires a symmetric matrix and
// nonempty support; throws param_error/data_error otherwise.
ReEstimate re_estimate(const Eigen::MatrixXd& matrix, std::span<const int32_t> support,
                       int64_t num_samples, uint64_t seed);

struct LfConstants {
    double alpha_lf;    // 1 / max over rows of max(|dlogf|, |dlog1mf|)
    double alpha_lf2;   // same with second derivatives
    int64_t rows_used;  // rows with f(z) strictly inside (0,1)
};

// Empirical link-regularity constants at theta_star over observed rows.
// Rows whose z lands f on an exact boundary are excluded; if none remain,
// throws numerical_error.
LfConstants lf_constants(const CascadeModel& model, const MeasurementSet& ms,
                         std::span<const double> theta_star);

struct ConcentrationRow {
    int64_t n;
    int32_t trial;
    double max_dev;        // max-entry |H_trial - H_expected|
    double gamma_upper;
    double gamma_sampled;
};

struct ConcentrationSummary {
    int64_t n;
    double median_max_dev;
    double fraction_ge_half;  // trials with gamma_sampled >= gamma_expected/2
};

struct ConcentrationReport {
    double gamma_expected;  // cone estimate on the oracle Hessian
    int64_t oracle_n;       // measurements behind the oracle (10 x max grid n)
    std::vector<ConcentrationRow> rows;
    std::vector<ConcentrationSummary> summary;  // one entry per grid n
};

// Sample-Hessian concentration study for one node: the expected Hessian is
// estimated once from a 10x-oversized simulation, then `trials` independent
// sample Hessians at each n in n_grid are compared against it. All
// re_estimate calls reuse one direction seed so gamma comparisons are paired.
ConcentrationReport hessian_concentration(const Graph& graph, const CascadeModel& model,
                                          int32_t node, std::span<const int64_t> n_grid,
                                          int32_t trials, double p_init, int64_t re_samples,
                                          uint64_t seed);

// CSV with header n,trial,max_dev,gamma_upper,gamma_sampled.
void write_concentration_csv(const ConcentrationReport& report, const std::string& path);

}  // namespace glc
