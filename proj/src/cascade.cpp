#include "glc/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glc/errors.hpp"
#include "glc/rng.hpp"

namespace glc {

void CascadeModel::validate() const {
    if (kind == ModelKind::cice && !(epsilon > 0.0 && std::isfinite(epsilon)))
        throw param_error("cice rate scale epsilon must be finite and > 0");
    if (kind == ModelKind::logistic && !std::isfinite(threshold))
        throw param_error("logistic threshold must be finite");
    if (kind == ModelKind::voter && horizon < 1)
        throw param_error("voter horizon must be >= 1");
}

// --- link functions -----------------------------------------------------

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double voter_check(double z) {
    if (z < -1e-9 || z > 1.0 + 1e-9)
        throw param_error("voter active mass " + std::to_string(z) + " outside [0,1]");
    return std::min(std::max(z, 0.0), 1.0);
}

}  // namespace

double link_value(const CascadeModel& model, double z) {
    switch (model.kind) {
        case ModelKind::ic: return -std::expm1(-z);
        case ModelKind::voter: return voter_check(z);
        case ModelKind::cice: return -std::expm1(-model.epsilon * z);
        case ModelKind::logistic: return sigmoid(z - model.threshold);
    }
    return 0.0;
}

LinkLogDerivs link_log_derivs(const CascadeModel& model, double z) {
    switch (model.kind) {
        case ModelKind::ic:
            // f = 1-exp(-z): (log f)' = 1/(e^z - 1), (log(1-f))' = -1.
            return {1.0 / std::expm1(z), -1.0};
        case ModelKind::voter:
            return {1.0 / z, -1.0 / (1.0 - z)};
        case ModelKind::cice:
            return {model.epsilon / std::expm1(model.epsilon * z), -model.epsilon};
        case ModelKind::logistic: {
            const double f = sigmoid(z - model.threshold);
            return {1.0 - f, -f};
        }
    }
    return {0.0, 0.0};
}

LinkLogDerivs link_log_derivs2(const CascadeModel& model, double z) {
    switch (model.kind) {
        case ModelKind::ic: {
            const double em1 = std::expm1(z);
            return {-std::exp(z) / (em1 * em1), 0.0};
        }
        case ModelKind::voter:
            return {-1.0 / (z * z), -1.0 / ((1.0 - z) * (1.0 - z))};
        case ModelKind::cice: {
            const double ez = model.epsilon * z;
            const double em1 = std::expm1(ez);
            return {-model.epsilon * model.epsilon * std::exp(ez) / (em1 * em1), 0.0};
        }
        case ModelKind::logistic: {
            const double f = sigmoid(z - model.threshold);
            const double w = -f * (1.0 - f);
            return {w, w};
        }
    }
    return {0.0, 0.0};
}

ZRange clamp_range(const CascadeModel& model, double eps) {
    switch (model.kind) {
        case ModelKind::ic:
            return {-std::log1p(-eps), -std::log(eps)};
        case ModelKind::voter:
            return {eps, 1.0 - eps};
        case ModelKind::cice:
            return {-std::log1p(-eps) / model.epsilon, -std::log(eps) / model.epsilon};
        case ModelKind::logistic: {
            const double span = std::log1p(-eps) - std::log(eps);  // log((1-eps)/eps)
            return {model.threshold - span, model.threshold + span};
        }
    }
    return {0.0, 0.0};
}

double clamp_z(const CascadeModel& model, double z, double eps) {
    const ZRange r = clamp_range(model, eps);
    return std::min(std::max(z, r.lo), r.hi);
}

// --- simulation --------------------------------------------------------

std::vector<int32_t> draw_sources(int32_t num_nodes, double p_init, uint64_t seed) {
    if (num_nodes <= 0) throw param_error("num_nodes must be positive");
    if (!(p_init > 0.0) || p_init > 1.0) throw param_error("p_init must lie in (0, 1]");
    Rng rng(derive_seed(seed, {0x737263}));
    std::vector<int32_t> sources;
    do {
        sources.clear();
        for (int32_t v = 0; v < num_nodes; ++v)
            if (rng.bernoulli(p_init)) sources.push_back(v);
    } while (sources.empty());
    return sources;
}

namespace {

std::vector<int32_t> checked_sources(const Graph& graph, std::vector<int32_t> sources) {
    if (sources.empty()) throw param_error("sources must be nonempty");
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    if (sources.front() < 0 || sources.back() >= graph.num_nodes())
        throw param_error("source id out of range");
    return sources;
}

// One-step-contagion dynamics shared by ic and logistic: contagious nodes
// influence exactly one transition, then turn immune. For logistic every
// susceptible node is a candidate each step (f(0) > 0); for ic only nodes
// with active in-neighbors are.
CascadeTrace simulate_pulse(const Graph& graph, const CascadeModel& model,
                            const std::vector<int32_t>& sources, Rng& rng) {
    const int32_t m = graph.num_nodes();
    const int64_t cap = 10 * static_cast<int64_t>(m);
    enum : uint8_t { susceptible, contagious, immune };
    std::vector<uint8_t> state(static_cast<size_t>(m), susceptible);
    std::vector<double> z(static_cast<size_t>(m), 0.0);
    std::vector<int32_t> touched;

    CascadeTrace trace;
    trace.kind = model.kind;
    trace.sources = sources;
    trace.steps.push_back(sources);
    for (int32_t s : sources) state[s] = contagious;
    std::vector<int32_t> frontier = sources;

    int64_t steps_done = 0;
    while (!frontier.empty()) {
        if (++steps_done > cap)
            throw numerical_error("cascade exceeded the safety cap of 10*num_nodes steps");
        touched.clear();
        for (int32_t i : frontier) {
            for (const Edge& e : graph.out_edges(i)) {
                if (state[e.dst] != susceptible) continue;
                if (z[e.dst] == 0.0) touched.push_back(e.dst);
                z[e.dst] += e.theta;
            }
        }
        std::vector<int32_t> newly;
        if (model.kind == ModelKind::logistic) {
            // Spontaneous activation is possible, so every susceptible node
            // draws, in ascending id order.
            for (int32_t j = 0; j < m; ++j) {
                if (state[j] != susceptible) continue;
                if (rng.uniform() < link_value(model, z[j])) newly.push_back(j);
            }
        } else {
            std::sort(touched.begin(), touched.end());
            for (int32_t j : touched) {
                if (rng.uniform() < link_value(model, z[j])) newly.push_back(j);
            }
        }
        for (int32_t i : frontier) state[i] = immune;
        for (int32_t j : newly) state[j] = contagious;
        for (int32_t i : touched) z[i] = 0.0;
        trace.steps.push_back(newly);
        frontier = std::move(newly);
    }
    return trace;
}

CascadeTrace simulate_cice(const Graph& graph, const CascadeModel& model,
                           const std::vector<int32_t>& sources, Rng& rng) {
    const int32_t m = graph.num_nodes();
    const int64_t cap = 10 * static_cast<int64_t>(m);
    std::vector<uint8_t> infected(static_cast<size_t>(m), 0);
    // z[j] accumulates weights from all currently infected in-neighbors;
    // monotone, updated incrementally as nodes flip.
    std::vector<double> z(static_cast<size_t>(m), 0.0);

    std::vector<int32_t> current = sources;
    for (int32_t s : sources) infected[s] = 1;
    auto absorb = [&](const std::vector<int32_t>& nodes) {
        for (int32_t i : nodes)
            for (const Edge& e : graph.out_edges(i))
                if (!infected[e.dst]) z[e.dst] += e.theta;
    };
    absorb(sources);

    CascadeTrace trace;
    trace.kind = model.kind;
    trace.sources = sources;
    trace.steps.push_back(current);

    int64_t steps_done = 0;
    while (static_cast<int32_t>(current.size()) < m) {
        bool any_candidate = false;
        std::vector<int32_t> newly;
        for (int32_t j = 0; j < m; ++j) {
            if (infected[j] || z[j] <= 0.0) continue;
            any_candidate = true;
            if (rng.uniform() < link_value(model, z[j])) newly.push_back(j);
        }
        if (!any_candidate) break;  // stationary: nobody can ever be infected
        if (++steps_done > cap)
            throw numerical_error("cascade exceeded the safety cap of 10*num_nodes steps");
        for (int32_t j : newly) {
            infected[j] = 1;
            z[j] = 0.0;
        }
        absorb(newly);
        std::vector<int32_t> next;
        next.reserve(current.size() + newly.size());
        std::merge(current.begin(), current.end(), newly.begin(), newly.end(),
                   std::back_inserter(next));
        current = std::move(next);
        trace.steps.push_back(current);
    }
    return trace;
}

CascadeTrace simulate_voter(const Graph& graph, const CascadeModel& model,
                            const std::vector<int32_t>& sources, Rng& rng) {
    const int32_t m = graph.num_nodes();
    std::vector<uint8_t> blue(static_cast<size_t>(m), 0);
    for (int32_t s : sources) blue[s] = 1;

    CascadeTrace trace;
    trace.kind = model.kind;
    trace.sources = sources;
    trace.steps.push_back(sources);

    for (int32_t t = 0; t < model.horizon; ++t) {
        int32_t count = 0;
        for (int32_t j = 0; j < m; ++j) count += blue[j];
        if (count == 0 || count == m) break;  // consensus is absorbing
        std::vector<uint8_t> next(static_cast<size_t>(m), 0);
        std::vector<int32_t> blues;
        for (int32_t j = 0; j < m; ++j) {
            auto in = graph.in_edges(j);
            if (in.empty()) {
                next[j] = blue[j];  // no parents: the color never changes
                if (next[j]) blues.push_back(j);
                continue;
            }
            double z = 0.0;
            for (const Edge& e : in)
                if (blue[e.src]) z += e.theta;
            next[j] = rng.uniform() < link_value(model, z) ? 1 : 0;
            if (next[j]) blues.push_back(j);
        }
        blue = std::move(next);
        trace.steps.push_back(blues);
    }
    return trace;
}

}  // namespace

CascadeTrace simulate(const Graph& graph, const CascadeModel& model,
                      const std::vector<int32_t>& sources, uint64_t seed) {
    model.validate();
    if (graph.model() != model.kind)
        throw data_error("graph weights are tagged '" + model_name(graph.model()) +
                         "' but the cascade model is '" + model_name(model.kind) + "'");
    graph.validate_for_simulation();
    std::vector<int32_t> src = checked_sources(graph, sources);
    Rng rng(derive_seed(seed, {0x73696d}));
    switch (model.kind) {
        case ModelKind::ic:
        case ModelKind::logistic: return simulate_pulse(graph, model, src, rng);
        case ModelKind::cice: return simulate_cice(graph, model, src, rng);
        case ModelKind::voter: return simulate_voter(graph, model, src, rng);
    }
    throw param_error("unknown model kind");
}

std::vector<CascadeTrace> batch_simulate(const Graph& graph, const CascadeModel& model, int32_t n,
                                         double p_init, uint64_t seed) {
    if (n < 1) throw param_error("cascade count must be >= 1");
    std::vector<CascadeTrace> traces;
    traces.reserve(static_cast<size_t>(n));
    for (int32_t c = 0; c < n; ++c) {
        const uint64_t sub = derive_seed(seed, {0x626174, static_cast<uint64_t>(c)});
        auto sources = draw_sources(graph.num_nodes(), p_init, sub);
        traces.push_back(simulate(graph, model, sources, sub));
    }
    return traces;
}

// --- measurements ---------------------------------------------------------

void MeasurementSet::add_row(std::span<const int32_t> ids, bool y) {
    if (offsets.empty()) offsets.push_back(0);
    idx.insert(idx.end(), ids.begin(), ids.end());
    offsets.push_back(static_cast<int64_t>(idx.size()));
    outcomes.push_back(y ? 1 : 0);
}

namespace {

bool contains(const std::vector<int32_t>& sorted_ids, int32_t v) {
    return std::binary_search(sorted_ids.begin(), sorted_ids.end(), v);
}

void check_step_ids(const std::vector<int32_t>& ids, int32_t num_nodes) {
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= num_nodes)
            throw data_error("trace step id " + std::to_string(ids[i]) +
                             " out of range for num_nodes=" + std::to_string(num_nodes));
        if (i > 0 && ids[i] <= ids[i - 1]) throw data_error("trace step ids must be ascending");
    }
}

}  // namespace

MeasurementSet extract_measurements(const CascadeTrace& trace, int32_t num_nodes, int32_t target) {
    if (target < 0 || target >= num_nodes) throw param_error("target node out of range");
    MeasurementSet ms;
    ms.target = target;
    ms.num_nodes = num_nodes;
    ms.offsets.push_back(0);
    const auto& steps = trace.steps;
    for (const auto& s : steps) check_step_ids(s, num_nodes);
    if (steps.size() < 2) return ms;
    const size_t transitions = steps.size() - 1;

    switch (trace.kind) {
        case ModelKind::ic:
        case ModelKind::logistic:
        case ModelKind::cice: {
            // Rows while the target is not yet active; for ic/logistic the
            // active set at time t is steps[t] itself (one-step contagion),
            // and "not yet active" means in no steps[0..t].
            for (size_t t = 0; t < transitions; ++t) {
                if (contains(steps[t], target)) break;  // active (or immune) from now on
                const bool y = contains(steps[t + 1], target);
                ms.add_row(steps[t], y);
                if (y) break;
            }
            break;
        }
        case ModelKind::voter: {
            for (size_t t = 0; t < transitions; ++t)
                ms.add_row(steps[t], contains(steps[t + 1], target));
            break;
        }
    }
    return ms;
}

MeasurementSet pool_measurements(const std::vector<CascadeTrace>& traces, int32_t num_nodes,
                                 int32_t target) {
    if (target < 0 || target >= num_nodes) throw param_error("target node out of range");
    MeasurementSet pooled;
    pooled.target = target;
    pooled.num_nodes = num_nodes;
    pooled.offsets.push_back(0);
    for (size_t i = 0; i < traces.size(); ++i) {
        if (traces[i].kind != traces[0].kind)
            throw data_error("cannot pool traces of mixed models ('" +
                             model_name(traces[0].kind) + "' vs '" + model_name(traces[i].kind) +
                             "')");
        MeasurementSet one = extract_measurements(traces[i], num_nodes, target);
        for (int64_t r = 0; r < one.rows(); ++r) pooled.add_row(one.row(r), one.outcomes[r] != 0);
    }
    return pooled;
}

// --- trace file I/O --------------------------------------------------------

void write_traces(const std::vector<CascadeTrace>& traces, std::ostream& out) {
    auto write_ids = [&out](const std::vector<int32_t>& ids) {
        out << '[';
        for (size_t i = 0; i < ids.size(); ++i) {
            if (i) out << ',';
            out << ids[i];
        }
        out << ']';
    };
    for (const CascadeTrace& t : traces) {
        out << "{\"model\":\"" << model_name(t.kind) << "\",\"sources\":";
        write_ids(t.sources);
        out << ",\"steps\":[";
        for (size_t s = 0; s < t.steps.size(); ++s) {
            if (s) out << ',';
            write_ids(t.steps[s]);
        }
        out << "]}\n";
    }
}

void write_traces(const std::vector<CascadeTrace>& traces, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    write_traces(traces, out);
    out.flush();
    if (!out) throw data_error("write to '" + path + "' failed");
}

std::vector<CascadeTrace> read_traces(std::istream& in, const std::string& display_name) {
    std::vector<CascadeTrace> traces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = display_name + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw data_error(where + ": bad JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("model") || !j.contains("sources") ||
            !j.contains("steps"))
            throw data_error(where + ": expected object with model/sources/steps");
        CascadeTrace t;
        try {
            t.kind = model_from_name(j["model"].get<std::string>());
            t.sources = j["sources"].get<std::vector<int32_t>>();
            t.steps = j["steps"].get<std::vector<std::vector<int32_t>>>();
        } catch (const data_error& e) {
            throw data_error(where + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw data_error(where + ": bad field type: " + e.what());
        }
        for (const auto& s : t.steps)
            for (size_t i = 1; i < s.size(); ++i)
                if (s[i] <= s[i - 1]) throw data_error(where + ": step ids must be ascending");
        if (!t.steps.empty() && t.steps[0] != t.sources)
            throw data_error(where + ": steps[0] must equal sources");
        traces.push_back(std::move(t));
    }
    return traces;
}

std::vector<CascadeTrace> read_traces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "' for reading");
    return read_traces(in, path);
}

}  // namespace glc
