#include "glc/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "glc/errors.hpp"
#include "glc/recovery.hpp"
#include "glc/rng.hpp"

namespace glc {

Eigen::MatrixXd gram_matrix(const MeasurementSet& ms) {
    if (ms.empty()) throw param_error("empty measurement set");
    const int32_t m = ms.num_nodes;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    const double inv_n = 1.0 / static_cast<double>(ms.rows());
    for (int64_t r = 0; r < ms.rows(); ++r) {
        const auto row = ms.row(r);
        for (int32_t a : row)
            for (int32_t b : row) g(a, b) += inv_n;
    }
    return g;
}

ReEstimate re_estimate(const Eigen::MatrixXd& matrix, std::span<const int32_t> support,
                       int64_t num_samples, uint64_t seed) {
    const auto m = matrix.rows();
    if (matrix.cols() != m) throw param_error("matrix must be square");
    if (support.empty()) throw param_error("support must be nonempty");
    if (num_samples < 1) throw param_error("num_samples must be >= 1");
    double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw data_error("matrix is not symmetric");
    std::vector<uint8_t> on(static_cast<size_t>(m), 0);
    for (int32_t j : support) {
        if (j < 0 || j >= m) throw param_error("support index out of range");
        if (on[j]) throw param_error("duplicate support index " + std::to_string(j));
        on[j] = 1;
    }

    const auto s = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd block(s, s);
    for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = 0; b < s; ++b) block(a, b) = matrix(support[a], support[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
    const double gamma_upper = eig.eigenvalues().minCoeff();

    Eigen::Index min_idx = 0;
    eig.eigenvalues().minCoeff(&min_idx);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < s; ++a) v(support[a]) = eig.eigenvectors()(a, min_idx);

    auto quotient = [&](const Eigen::VectorXd& u) { return u.dot(matrix * u) / u.squaredNorm(); };

    // The zero-padded support eigenvector is itself in the cone, so the
    // sampled minimum can never exceed gamma_upper.
    double gamma_sampled = quotient(v);

    Rng rng(derive_seed(seed, {0x7265}));
    std::vector<int32_t> off;
    off.reserve(static_cast<size_t>(m) - support.size());
    for (int32_t j = 0; j < m; ++j)
        if (!on[j]) off.push_back(j);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    for (int64_t it = 1; it < num_samples; ++it) {
        u.setZero();
        double s_l1 = 0.0;
        for (int32_t j : support) {
            u(j) = rng.uniform(-1.0, 1.0);
            s_l1 += std::fabs(u(j));
        }
        if (s_l1 == 0.0) continue;  // measure-zero degenerate draw
        if (!off.empty()) {
            double off_l1 = 0.0;
            for (int32_t j : off) {
                u(j) = rng.uniform(-1.0, 1.0);
                off_l1 += std::fabs(u(j));
            }
            // Rescale the off-support block to l1 mass u3 * 3 * ||v_S||_1
            // with u3 ~ U[0,1]: uniform over cone tightness.
            const double target = rng.uniform() * 3.0 * s_l1;
            const double factor = off_l1 > 0.0 ? target / off_l1 : 0.0;
            for (int32_t j : off) u(j) *= factor;
        }
        gamma_sampled = std::min(gamma_sampled, quotient(u));
    }
    // quotient(v) equals gamma_upper only up to roundoff; pin the invariant
    gamma_sampled = std::min(gamma_sampled, gamma_upper);
    return {gamma_upper, gamma_sampled, num_samples};
}

LfConstants lf_constants(const CascadeModel& model, const MeasurementSet& ms,
                         std::span<const double> theta_star) {
    model.validate();
    if (ms.empty()) throw param_error("empty measurement set");
    if (static_cast<int32_t>(theta_star.size()) != ms.num_nodes)
        throw param_error("theta dimension does not match num_nodes");
    double max1 = 0.0, max2 = 0.0;
    int64_t used = 0;
    for (int64_t r = 0; r < ms.rows(); ++r) {
        double z = 0.0;
        for (int32_t j : ms.row(r)) z += theta_star[j];
        const double f = link_value(model, z);
        if (f <= 0.0 || f >= 1.0) continue;  // boundary rows are excluded
        const LinkLogDerivs d1 = link_log_derivs(model, z);
        const LinkLogDerivs d2 = link_log_derivs2(model, z);
        max1 = std::max({max1, std::fabs(d1.dlogf), std::fabs(d1.dlog1mf)});
        max2 = std::max({max2, std::fabs(d2.dlogf), std::fabs(d2.dlog1mf)});
        ++used;
    }
    if (used == 0)
        throw numerical_error("all rows evaluate the link on a boundary; no regularity estimate");
    return {max1 > 0.0 ? 1.0 / max1 : std::numeric_limits<double>::infinity(),
            max2 > 0.0 ? 1.0 / max2 : std::numeric_limits<double>::infinity(), used};
}

namespace {

// Simulate until the target node has at least wanted measurement rows (cap:
// proportional retries), then truncate to exactly wanted.
MeasurementSet harvest_rows(const Graph& graph, const CascadeModel& model, int32_t node,
                            int64_t wanted, double p_init, uint64_t seed) {
    MeasurementSet pooled;
    pooled.target = node;
    pooled.num_nodes = graph.num_nodes();
    pooled.offsets.push_back(0);
    const int32_t batch = 256;
    int64_t batch_index = 0;
    // A node that is always a source yields nothing; bail out eventually.
    const int64_t max_batches = 4000 + wanted;  // generous, deterministic
    while (pooled.rows() < wanted) {
        if (batch_index >= max_batches)
            throw numerical_error("simulation produced too few measurements for node " +
                                  std::to_string(node));
        auto traces = batch_simulate(graph, model, batch, p_init,
                                     derive_seed(seed, {0x6861, static_cast<uint64_t>(batch_index)}));
        for (const auto& t : traces) {
            MeasurementSet one = extract_measurements(t, graph.num_nodes(), node);
            for (int64_t r = 0; r < one.rows() && pooled.rows() < wanted; ++r)
                pooled.add_row(one.row(r), one.outcomes[r] != 0);
            if (pooled.rows() >= wanted) break;
        }
        ++batch_index;
    }
    return pooled;
}

}  // namespace

ConcentrationReport hessian_concentration(const Graph& graph, const CascadeModel& model,
                                          int32_t node, std::span<const int64_t> n_grid,
                                          int32_t trials, double p_init, int64_t re_samples,
                                          uint64_t seed) {
    model.validate();
    if (node < 0 || node >= graph.num_nodes()) throw param_error("node id out of range");
    if (n_grid.empty()) throw param_error("n_grid must be nonempty");
    if (trials < 1) throw param_error("trials must be >= 1");
    for (int64_t n : n_grid)
        if (n < 1) throw param_error("n_grid entries must be >= 1");
    const std::vector<double> theta_star = graph.column(node);
    const std::vector<int32_t> support = graph.parents(node);
    if (support.empty())
        throw param_error("node " + std::to_string(node) + " has no parents to diagnose");

    const int64_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
    const int64_t oracle_n = 10 * n_max;
    // One direction seed shared by every re_estimate call: gamma comparisons
    // between sample Hessians and the oracle are paired.
    const uint64_t dir_seed = derive_seed(seed, {0x646972});

    MeasurementSet oracle_ms =
        harvest_rows(graph, model, node, oracle_n, p_init, derive_seed(seed, {0x6f72}));
    const Eigen::MatrixXd h_expected = nll_hessian(theta_star, oracle_ms, model);
    const double gamma_expected =
        re_estimate(h_expected, support, re_samples, dir_seed).gamma_sampled;

    ConcentrationReport report;
    report.gamma_expected = gamma_expected;
    report.oracle_n = oracle_n;
    for (size_t gi = 0; gi < n_grid.size(); ++gi) {
        const int64_t n = n_grid[gi];
        std::vector<double> devs;
        int32_t hits = 0;
        for (int32_t trial = 0; trial < trials; ++trial) {
            MeasurementSet ms = harvest_rows(
                graph, model, node, n, p_init,
                derive_seed(seed, {0x7472, static_cast<uint64_t>(gi), static_cast<uint64_t>(trial)}));
            const Eigen::MatrixXd h = nll_hessian(theta_star, ms, model);
            const double max_dev = (h - h_expected).cwiseAbs().maxCoeff();
            const ReEstimate re = re_estimate(h, support, re_samples, dir_seed);
            report.rows.push_back({n, trial, max_dev, re.gamma_upper, re.gamma_sampled});
            devs.push_back(max_dev);
            if (re.gamma_sampled >= gamma_expected / 2.0) ++hits;
        }
        std::sort(devs.begin(), devs.end());
        const size_t mid = devs.size() / 2;
        const double median = devs.size() % 2 == 1 ? devs[mid] : 0.5 * (devs[mid - 1] + devs[mid]);
        report.summary.push_back({n, median, static_cast<double>(hits) / trials});
    }
    return report;
}

void write_concentration_csv(const ConcentrationReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << "n,trial,max_dev,gamma_upper,gamma_sampled\n";
    char buf[160];
    for (const ConcentrationRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%d,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(r.n), r.trial, r.max_dev, r.gamma_upper,
                      r.gamma_sampled);
        out << buf;
    }
    out.flush();
    if (!out) throw data_error("write to '" + path + "' failed");
}

}  // namespace glc
