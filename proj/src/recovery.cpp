#include "glc/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glc/errors.hpp"
#include "glc/kernels.hpp"
#include "glc/parallel.hpp"

namespace glc {

std::string estimator_name(Estimator est) {
    switch (est) {
        case Estimator::sparse_mle: return "sparse-mle";
        case Estimator::mle: return "mle";
        case Estimator::lasso: return "lasso";
        case Estimator::greedy: return "greedy";
    }
    return "sparse-mle";
}

Estimator estimator_from_name(const std::string& name) {
    if (name == "sparse-mle") return Estimator::sparse_mle;
    if (name == "mle") return Estimator::mle;
    if (name == "lasso") return Estimator::lasso;
    if (name == "greedy") return Estimator::greedy;
    throw param_error("unknown estimator '" + name +
                      "' (expected sparse-mle, mle, lasso or greedy)");
}

void SolverConfig::validate() const {
    if (lambda < 0.0 || !std::isfinite(lambda)) throw param_error("lambda must be >= 0");
    if (max_iterations < 1) throw param_error("max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw param_error("tolerance must be > 0");
    if (!(shrink > 0.0) || shrink >= 1.0) throw param_error("shrink factor must lie in (0,1)");
    if (!(initial_step > 0.0)) throw param_error("initial step must be > 0");
    if (!(eps_clamp > 0.0) || eps_clamp > 1e-3)
        throw param_error("eps_clamp must lie in (0, 1e-3]");
}

// --- loss evaluation ------------------------------------------------------
//
// Both losses follow the same two-pass scheme: the kernels compute all row
// sums z_r = <theta, x_r>, a scalar per-model loop turns them into loss terms
// and per-row gradient coefficients c_r = d(term)/dz_r, and a scatter-add
// accumulates grad = (1/n) sum_r c_r x_r (the 1/n is folded into c_r).

namespace {

void check_measurements(std::span<const double> theta, const MeasurementSet& ms) {
    if (ms.empty()) throw param_error("empty measurement set");
    if (static_cast<int32_t>(theta.size()) != ms.num_nodes)
        throw param_error("theta dimension " + std::to_string(theta.size()) +
                          " does not match num_nodes " + std::to_string(ms.num_nodes));
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Clamped NLL over precomputed row sums. If coeffs is non-null it receives
// c_r (already scaled by inv_n); returns the mean loss.
double nll_terms(const CascadeModel& model, const MeasurementSet& ms, std::vector<double>& z,
                 double eps, double* coeffs) {
    const int64_t n = ms.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const ZRange r = clamp_range(model, eps);
    double loss = 0.0;
    switch (model.kind) {
        case ModelKind::ic:
        case ModelKind::cice: {
            const double e = model.kind == ModelKind::cice ? model.epsilon : 1.0;
            for (int64_t i = 0; i < n; ++i) {
                const double zt = std::min(std::max(z[i], r.lo), r.hi);
                if (ms.outcomes[i]) {
                    // -log(1 - exp(-e z))
                    loss += -std::log(-std::expm1(-e * zt));
                    if (coeffs) coeffs[i] = -inv_n * e / std::expm1(e * zt);
                } else {
                    loss += e * zt;  // -log(exp(-e z)) exactly
                    if (coeffs) coeffs[i] = inv_n * e;
                }
            }
            break;
        }
        case ModelKind::voter: {
            for (int64_t i = 0; i < n; ++i) {
                const double zt = std::min(std::max(z[i], r.lo), r.hi);
                if (ms.outcomes[i]) {
                    loss += -std::log(zt);
                    if (coeffs) coeffs[i] = -inv_n / zt;
                } else {
                    loss += -std::log1p(-zt);
                    if (coeffs) coeffs[i] = inv_n / (1.0 - zt);
                }
            }
            break;
        }
        case ModelKind::logistic: {
            const double t = model.threshold;
            for (int64_t i = 0; i < n; ++i) {
                const double zt = std::min(std::max(z[i], r.lo), r.hi);
                const double f = 1.0 / (1.0 + std::exp(-(zt - t)));
                if (ms.outcomes[i]) {
                    loss += softplus(t - zt);
                    if (coeffs) coeffs[i] = -inv_n * (1.0 - f);
                } else {
                    loss += softplus(zt - t);
                    if (coeffs) coeffs[i] = inv_n * f;
                }
            }
            break;
        }
    }
    return loss * inv_n;
}

double squared_terms(const CascadeModel& model, const MeasurementSet& ms, std::vector<double>& z,
                     double* coeffs) {
    const int64_t n = ms.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        double f, fprime;
        switch (model.kind) {
            case ModelKind::ic:
                f = -std::expm1(-z[i]);
                fprime = std::exp(-z[i]);
                break;
            case ModelKind::cice:
                f = -std::expm1(-model.epsilon * z[i]);
                fprime = model.epsilon * std::exp(-model.epsilon * z[i]);
                break;
            case ModelKind::voter:
                f = z[i];
                fprime = 1.0;
                break;
            default: {  // logistic
                f = 1.0 / (1.0 + std::exp(-(z[i] - model.threshold)));
                fprime = f * (1.0 - f);
                break;
            }
        }
        const double resid = f - static_cast<double>(ms.outcomes[i]);
        loss += resid * resid;
        if (coeffs) coeffs[i] = inv_n * 2.0 * fprime * resid;
    }
    return loss * inv_n;
}

enum class LossKind { nll, squared };

// Scratch buffers shared across solver iterations.
struct Workspace {
    std::vector<double> z;
    std::vector<double> coeffs;

    void resize(int64_t rows) {
        z.resize(static_cast<size_t>(rows));
        coeffs.resize(static_cast<size_t>(rows));
    }
};

double eval_loss(LossKind kind, const CascadeModel& model, const MeasurementSet& ms,
                 std::span<const double> theta, double eps, Workspace& w, double* grad) {
    const auto& k = kernels::ops();
    w.resize(ms.rows());
    k.row_sums(theta.data(), ms.idx.data(), ms.offsets.data(), static_cast<size_t>(ms.rows()),
               w.z.data());
    double* coeffs = grad ? w.coeffs.data() : nullptr;
    const double loss = kind == LossKind::nll ? nll_terms(model, ms, w.z, eps, coeffs)
                                              : squared_terms(model, ms, w.z, coeffs);
    if (grad) {
        std::fill(grad, grad + theta.size(), 0.0);
        kernels::scatter_add(coeffs, ms.idx.data(), ms.offsets.data(),
                             static_cast<size_t>(ms.rows()), grad);
    }
    return loss;
}

}  // namespace

double neg_log_likelihood(std::span<const double> theta, const MeasurementSet& ms,
                          const CascadeModel& model, double eps_clamp) {
    check_measurements(theta, ms);
    model.validate();
    Workspace w;
    return eval_loss(LossKind::nll, model, ms, theta, eps_clamp, w, nullptr);
}

void nll_gradient(std::span<const double> theta, const MeasurementSet& ms,
                  const CascadeModel& model, std::span<double> grad, double eps_clamp) {
    check_measurements(theta, ms);
    model.validate();
    if (grad.size() != theta.size()) throw param_error("gradient span size mismatch");
    Workspace w;
    eval_loss(LossKind::nll, model, ms, theta, eps_clamp, w, grad.data());
}

Eigen::MatrixXd nll_hessian(std::span<const double> theta, const MeasurementSet& ms,
                            const CascadeModel& model, double eps_clamp) {
    check_measurements(theta, ms);
    model.validate();
    const int32_t m = ms.num_nodes;
    Workspace w;
    w.resize(ms.rows());
    kernels::ops().row_sums(theta.data(), ms.idx.data(), ms.offsets.data(),
                            static_cast<size_t>(ms.rows()), w.z.data());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    const double inv_n = 1.0 / static_cast<double>(ms.rows());
    for (int64_t r = 0; r < ms.rows(); ++r) {
        const double zt = clamp_z(model, w.z[r], eps_clamp);
        const LinkLogDerivs d2 = link_log_derivs2(model, zt);
        const double wr = -(ms.outcomes[r] ? d2.dlogf : d2.dlog1mf) * inv_n;
        if (wr == 0.0) continue;
        const auto row = ms.row(r);
        for (int32_t a : row)
            for (int32_t b : row) h(a, b) += wr;
    }
    return h;
}

double squared_loss(std::span<const double> theta, const MeasurementSet& ms,
                    const CascadeModel& model) {
    check_measurements(theta, ms);
    model.validate();
    Workspace w;
    return eval_loss(LossKind::squared, model, ms, theta, 0.0, w, nullptr);
}

void squared_loss_gradient(std::span<const double> theta, const MeasurementSet& ms,
                           const CascadeModel& model, std::span<double> grad) {
    check_measurements(theta, ms);
    model.validate();
    if (grad.size() != theta.size()) throw param_error("gradient span size mismatch");
    Workspace w;
    eval_loss(LossKind::squared, model, ms, theta, 0.0, w, grad.data());
}

// --- lambda rule, thresholding, regularity bound ---------------------------

double select_lambda(int32_t num_nodes, int64_t n, double alpha, double delta) {
    if (num_nodes < 2) throw param_error("lambda rule needs num_nodes >= 2");
    if (n < 1) throw param_error("lambda rule needs n >= 1");
    if (!(alpha > 0.0) || alpha >= 1.0) throw param_error("alpha must lie in (0,1)");
    if (delta < 0.0 || delta >= 1.0) throw param_error("delta must lie in [0,1)");
    const double n_eff = std::pow(static_cast<double>(n), 1.0 - delta);
    return 2.0 * std::sqrt(std::log(static_cast<double>(num_nodes)) / (alpha * n_eff));
}

std::vector<int32_t> threshold_support(std::span<const double> theta, double eta) {
    if (!(eta >= 0.0)) throw param_error("support threshold must be >= 0");
    std::vector<int32_t> support;
    for (size_t j = 0; j < theta.size(); ++j)
        if (theta[j] > eta) support.push_back(static_cast<int32_t>(j));
    return support;
}

double estimate_alpha(const Graph& graph, const CascadeModel& model) {
    if (graph.num_edges() == 0) throw param_error("cannot bound link regularity: no edges");
    double min_theta = std::numeric_limits<double>::infinity();
    double max_theta = 0.0;
    for (const Edge& e : graph.edges()) {
        min_theta = std::min(min_theta, e.theta);
        max_theta = std::max(max_theta, e.theta);
    }
    switch (model.kind) {
        case ModelKind::ic: return -std::expm1(-min_theta);
        case ModelKind::cice: return -std::expm1(-model.epsilon * min_theta);
        case ModelKind::voter: return std::min(min_theta, 1.0 - max_theta);
        case ModelKind::logistic: {
            double z_max = 0.0;
            for (int32_t j = 0; j < graph.num_nodes(); ++j)
                z_max = std::max(z_max, graph.in_weight_sum(j));
            const double t = model.threshold;
            auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
            return std::min(1.0 - 1e-12, 1.0 / std::max(sigma(t), sigma(z_max - t)));
        }
    }
    return 0.0;
}

double estimate_alpha_from_bounds(ModelKind kind, double low, double high) {
    if (!(low <= high)) throw param_error("weight bounds must satisfy low <= high");
    switch (kind) {
        case ModelKind::ic:
        case ModelKind::cice:
        case ModelKind::logistic: return low;  // minimum edge probability
        case ModelKind::voter: return std::min(low, 1.0 - high);
    }
    return 0.0;
}

// --- proximal solver --------------------------------------------------------

namespace {

void prox_step(ModelKind kind, const double* v, double t, double* out, size_t m) {
    const auto& k = kernels::ops();
    if (kind == ModelKind::voter)
        k.prox_l1_box01(v, t, out, m);
    else
        k.prox_l1_nonneg(v, t, out, m);
}

// The clamped likelihood reports the analytic derivative *at the clamp point*
// for clamped rows (so the gradient keeps pointing off the boundary), which
// deliberately disagrees with the flat clamped value there. Near such rows the
// quadratic-bound test of a textbook backtracking search can fail at every
// step size, so the search also tracks the best strictly-descending candidate
// seen and falls back to it (with a momentum restart); only when no candidate
// across the whole step sweep descends is the iterate declared stalled.
InferenceResult run_fista(LossKind loss, const MeasurementSet& ms, const CascadeModel& model,
                          const SolverConfig& config) {
    config.validate();
    model.validate();
    if (ms.empty()) throw param_error("empty measurement set");
    const size_t m = static_cast<size_t>(ms.num_nodes);
    const double lambda = config.lambda;
    const auto& k = kernels::ops();
    Workspace w;

    auto smooth = [&](std::span<const double> th, double* grad) {
        return eval_loss(loss, model, ms, th, config.eps_clamp, w, grad);
    };
    auto l1 = [&](const std::vector<double>& th) { return k.l1_norm(th.data(), m); };

    std::vector<double> x(m, 0.0), x_prev(m, 0.0), y(m, 0.0);
    std::vector<double> grad(m), trial(m), cand(m), diff(m), best_cand(m);

    // The log-likelihood diverges when any row sum is 0, so start strictly
    // inside the domain: a constant on every observed coordinate, small
    // enough that all row sums stay below 1/2 (voter feasible, all links
    // far from saturation). The squared loss is smooth everywhere and keeps
    // the plain sparse start.
    if (loss == LossKind::nll) {
        int64_t max_nnz = 1;
        for (int64_t r = 0; r < ms.rows(); ++r)
            max_nnz = std::max(max_nnz, ms.offsets[r + 1] - ms.offsets[r]);
        const double c = std::min(0.1, 0.5 / static_cast<double>(max_nnz));
        for (int32_t j : ms.idx) x[static_cast<size_t>(j)] = c;
        y = x;
    }

    double step = config.initial_step;
    double t_momentum = 1.0;
    double hx = smooth(x, nullptr) + lambda * l1(x);

    InferenceResult result;
    result.lambda = lambda;
    result.n = ms.rows();

    result.objective_trace.push_back(hx);
    int32_t plateau = 0;
    for (int32_t iter = 1; iter <= config.max_iterations; ++iter) {
        result.iterations = iter;
        step = std::min(step / config.shrink, config.initial_step);  // regrow
        bool restarted = false;
        bool stalled = false;
        bool fallback = false;
        double hc = 0.0;
        while (true) {
            const double fy = smooth(y, grad.data());
            // Backtracking: find a step whose prox point satisfies the
            // quadratic upper bound at y; remember the best descending
            // candidate in case the bound never holds.
            bool line_ok = false;
            double fc = 0.0;
            double best_hc = std::numeric_limits<double>::infinity();
            const double descent_bar = hx - 1e-12 * std::max(1.0, std::fabs(hx));
            for (int32_t bt = 0; bt < 80; ++bt) {
                trial = y;
                k.axpy(-step, grad.data(), trial.data(), m);
                prox_step(model.kind, trial.data(), lambda * step, cand.data(), m);
                fc = smooth(cand, nullptr);
                const double hc_try = fc + lambda * l1(cand);
                if (hc_try < best_hc && hc_try < descent_bar) {
                    best_hc = hc_try;
                    best_cand = cand;
                }
                for (size_t j = 0; j < m; ++j) diff[j] = cand[j] - y[j];
                const double quad = fy + k.dot(grad.data(), diff.data(), m) +
                                    k.l2_norm_sq(diff.data(), m) / (2.0 * step);
                if (fc <= quad + 1e-10 * std::max(1.0, std::fabs(quad))) {
                    line_ok = true;
                    break;
                }
                step *= config.shrink;
            }
            if (line_ok) {
                hc = fc + lambda * l1(cand);
            } else if (best_hc < std::numeric_limits<double>::infinity()) {
                cand = best_cand;
                hc = best_hc;
                fallback = true;
            } else if (!restarted) {
                // the extrapolated point may be the problem; retry from x
                restarted = true;
                y = x;
                t_momentum = 1.0;
                step = config.initial_step;
                continue;
            } else {
                // no step size from x descends: numerically optimal
                stalled = true;
                break;
            }
            if (hc > hx + 1e-12 * std::max(1.0, std::fabs(hx))) {
                // An extrapolated point can overshoot; restart momentum and
                // retry with a plain proximal step from x, which descends
                // whenever descent is possible at all.
                if (!restarted) {
                    restarted = true;
                    y = x;
                    t_momentum = 1.0;
                    continue;
                }
                stalled = true;
            }
            break;
        }
        if (stalled) {
            result.converged = true;
            break;
        }
        x_prev.swap(x);
        x = cand;
        const double h_prev = hx;
        hx = std::min(hc, h_prev);  // equal up to roundoff when hc ~ h_prev
        result.objective_trace.push_back(hx);

        for (size_t j = 0; j < m; ++j) diff[j] = x[j] - x_prev[j];
        const double step_norm = std::sqrt(k.l2_norm_sq(diff.data(), m));
        const double x_norm = std::sqrt(k.l2_norm_sq(x.data(), m));
        if (!fallback &&
            std::fabs(h_prev - hx) <= config.tolerance * std::max(1.0, std::fabs(hx)) &&
            step_norm <= config.tolerance * (1.0 + x_norm)) {
            result.converged = true;
            break;
        }

        // Once the objective stops moving at double resolution, momentum only
        // makes the iterate orbit the flat region without ever shrinking the
        // displacement below tolerance; restart it, and after enough
        // consecutive flat steps accept the point (it cannot improve further
        // in this arithmetic).
        const bool machine_flat =
            std::fabs(h_prev - hx) <= 1e-14 * std::max(1.0, std::fabs(hx));
        plateau = machine_flat ? plateau + 1 : 0;
        if (plateau >= 20) {
            result.converged = true;
            break;
        }

        if (fallback || machine_flat) {
            // bound test never held, or no measurable progress: restart
            // momentum from the new point
            y = x;
            t_momentum = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double beta = (t_momentum - 1.0) / t_next;
        for (size_t j = 0; j < m; ++j) y[j] = x[j] + beta * (x[j] - x_prev[j]);
        t_momentum = t_next;
    }

    result.theta = std::move(x);
    result.objective = hx;
    return result;
}

}  // namespace

InferenceResult solve_sparse_mle(const MeasurementSet& ms, const CascadeModel& model,
                                 const SolverConfig& config) {
    return run_fista(LossKind::nll, ms, model, config);
}

InferenceResult solve_mle(const MeasurementSet& ms, const CascadeModel& model,
                          const SolverConfig& config) {
    SolverConfig plain = config;
    plain.lambda = 0.0;
    return run_fista(LossKind::nll, ms, model, plain);
}

InferenceResult solve_lasso(const MeasurementSet& ms, const CascadeModel& model,
                            const SolverConfig& config) {
    return run_fista(LossKind::squared, ms, model, config);
}

// --- greedy parent addition -----------------------------------------------

namespace {

// Rows containing each candidate column, built once per solve.
std::vector<std::vector<int64_t>> column_rows(const MeasurementSet& ms) {
    std::vector<std::vector<int64_t>> rows(static_cast<size_t>(ms.num_nodes));
    for (int64_t r = 0; r < ms.rows(); ++r)
        for (int32_t j : ms.row(r)) rows[static_cast<size_t>(j)].push_back(r);
    return rows;
}

}  // namespace

InferenceResult solve_greedy(const MeasurementSet& ms, const CascadeModel& model,
                             int32_t max_parents, double improvement_tol,
                             const SolverConfig& config) {
    model.validate();
    config.validate();
    if (ms.empty()) throw param_error("empty measurement set");
    if (max_parents < 1) throw param_error("max_parents must be >= 1");
    const int32_t m = ms.num_nodes;
    const int64_t n = ms.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double eps = config.eps_clamp;
    const auto rows_of = column_rows(ms);

    // Current row sums under the partial weight vector.
    std::vector<double> z(static_cast<size_t>(n), 0.0);
    std::vector<double> theta(static_cast<size_t>(m), 0.0);
    std::vector<uint8_t> in_support(static_cast<size_t>(m), 0);

    // Per-row NLL term and its z-derivative at the clamped argument.
    auto term = [&](double zv, bool y) {
        const double zt = clamp_z(model, zv, eps);
        const double f = link_value(model, zt);
        return y ? -std::log(std::max(f, eps)) : -std::log1p(-std::min(f, 1.0 - eps));
    };
    auto dterm = [&](double zv, bool y) {
        const double zt = clamp_z(model, zv, eps);
        const LinkLogDerivs d = link_log_derivs(model, zt);
        return y ? -d.dlogf : -d.dlog1mf;
    };

    // Restricted NLL delta and derivative for candidate j at weight w.
    auto delta_nll = [&](int32_t j, double wv) {
        double acc = 0.0;
        for (int64_t r : rows_of[j])
            acc += term(z[r] + wv, ms.outcomes[r]) - term(z[r], ms.outcomes[r]);
        return acc * inv_n;
    };
    auto deriv = [&](int32_t j, double wv) {
        double acc = 0.0;
        for (int64_t r : rows_of[j]) acc += dterm(z[r] + wv, ms.outcomes[r]);
        return acc * inv_n;
    };

    const double w_hi = model.kind == ModelKind::voter ? 1.0 : clamp_range(model, eps).hi;

    int32_t rounds = 0;
    bool stopped_by_tol = false;
    while (rounds < max_parents) {
        int32_t best_j = -1;
        double best_w = 0.0, best_gain = 0.0;
        for (int32_t j = 0; j < m; ++j) {
            if (in_support[j] || rows_of[j].empty()) continue;
            // The restricted objective is convex in w, so its derivative is
            // nondecreasing: bisect for the root on [0, w_hi].
            if (deriv(j, 0.0) >= 0.0) continue;  // weight 0 already optimal
            double lo = 0.0, hi = w_hi;
            if (deriv(j, hi) < 0.0) {
                lo = hi;  // optimum at the domain edge
            } else {
                for (int32_t it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (deriv(j, mid) < 0.0 ? lo : hi) = mid;
                }
            }
            const double wv = 0.5 * (lo + hi);
            const double gain = -delta_nll(j, wv);
            if (gain > best_gain) {  // strict: ties keep the lowest id
                best_gain = gain;
                best_j = j;
                best_w = wv;
            }
        }
        if (best_j < 0 || best_gain < improvement_tol) {
            stopped_by_tol = true;
            break;
        }
        theta[best_j] = best_w;
        in_support[best_j] = 1;
        for (int64_t r : rows_of[best_j]) z[r] += best_w;
        ++rounds;
    }

    InferenceResult result;
    result.theta = std::move(theta);
    result.iterations = rounds;
    // Both stopping rules (no candidate worth adding, parent budget reached)
    // are normal termination.
    result.converged = stopped_by_tol || rounds == max_parents;
    result.n = n;
    result.lambda = 0.0;
    result.objective = neg_log_likelihood(result.theta, ms, model, eps);
    return result;
}

// --- whole-graph inference ---------------------------------------------

LambdaRule LambdaRule::fixed(double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda)) throw param_error("lambda must be >= 0");
    LambdaRule r;
    r.kind = Kind::fixed;
    r.lambda = lambda;
    return r;
}

LambdaRule LambdaRule::theorem(double alpha, double delta) {
    LambdaRule r;
    r.kind = Kind::theorem;
    r.alpha = alpha;
    r.delta = delta;
    return r;
}

double LambdaRule::value(int32_t num_nodes, int64_t n) const {
    return kind == Kind::fixed ? lambda : select_lambda(num_nodes, n, alpha, delta);
}

GraphEstimate infer_graph(const std::vector<CascadeTrace>& traces, int32_t num_nodes,
                          const CascadeModel& model, const InferOptions& options) {
    if (num_nodes <= 0) throw param_error("num_nodes must be positive");
    model.validate();
    options.solver.validate();
    // no traces at all: every node is skipped and the estimate is empty

    std::vector<NodeSolve> nodes(static_cast<size_t>(num_nodes));
    parallel_for(num_nodes, options.jobs, [&](int64_t i) {
        const int32_t node = static_cast<int32_t>(i);
        NodeSolve& slot = nodes[static_cast<size_t>(i)];
        slot.node = node;
        MeasurementSet ms = pool_measurements(traces, num_nodes, node);
        if (ms.empty()) {
            slot.skipped = true;
            return;
        }
        SolverConfig cfg = options.solver;
        switch (options.estimator) {
            case Estimator::sparse_mle:
                cfg.lambda = options.lambda.value(num_nodes, ms.rows());
                slot.result = solve_sparse_mle(ms, model, cfg);
                break;
            case Estimator::mle:
                slot.result = solve_mle(ms, model, cfg);
                break;
            case Estimator::lasso:
                cfg.lambda = options.lambda.value(num_nodes, ms.rows());
                slot.result = solve_lasso(ms, model, cfg);
                break;
            case Estimator::greedy:
                slot.result = solve_greedy(ms, model, options.max_parents,
                                           options.improvement_tol, cfg);
                break;
        }
    });

    std::vector<Edge> edges;
    for (const NodeSolve& s : nodes) {
        if (s.skipped) continue;
        for (int32_t src : threshold_support(s.result.theta, options.eta)) {
            if (src == s.node) continue;  // self-weights never become edges
            edges.push_back({src, s.node, s.result.theta[src]});
        }
    }
    GraphEstimate estimate;
    estimate.graph = Graph::from_edges(num_nodes, model.kind, std::move(edges));
    estimate.nodes = std::move(nodes);
    return estimate;
}

}  // namespace glc
