#include "glc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "glc/errors.hpp"
#include "glc/rng.hpp"

namespace glc {

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::ic: return "ic";
        case ModelKind::voter: return "voter";
        case ModelKind::cice: return "cice";
        case ModelKind::logistic: return "logistic";
    }
    return "ic";
}

ModelKind model_from_name(const std::string& name) {
    if (name == "ic") return ModelKind::ic;
    if (name == "voter") return ModelKind::voter;
    if (name == "cice") return ModelKind::cice;
    if (name == "logistic") return ModelKind::logistic;
    throw data_error("unknown model name: '" + name + "'");
}

double p_to_theta(double p) {
    if (!(p >= 0.0) || p >= 1.0) throw param_error("edge probability must lie in [0, 1)");
    return -std::log1p(-p);
}

double theta_to_p(double theta) {
    if (!(theta >= 0.0)) throw param_error("edge weight must be nonnegative");
    return -std::expm1(-theta);
}

// --- Graph ------------------------------------------------------------------

Graph Graph::from_edges(int32_t num_nodes, ModelKind model, std::vector<Edge> edges) {
    if (num_nodes <= 0) throw data_error("graph must have at least one node");
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    for (size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes)
            throw data_error("edge endpoint out of range: " + std::to_string(e.src) + "->" +
                             std::to_string(e.dst));
        if (e.src == e.dst) throw data_error("self-loop at node " + std::to_string(e.src));
        if (i > 0 && edges[i - 1].src == e.src && edges[i - 1].dst == e.dst)
            throw data_error("duplicate edge " + std::to_string(e.src) + "->" +
                             std::to_string(e.dst));
        if (!(e.theta > 0.0) || !std::isfinite(e.theta))
            throw data_error("edge weight must be finite and > 0 on " + std::to_string(e.src) +
                             "->" + std::to_string(e.dst));
    }

    Graph g;
    g.num_nodes_ = num_nodes;
    g.model_ = model;
    g.edges_ = std::move(edges);

    g.in_edges_ = g.edges_;
    std::sort(g.in_edges_.begin(), g.in_edges_.end(), [](const Edge& a, const Edge& b) {
        return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
    });

    g.out_offsets_.assign(static_cast<size_t>(num_nodes) + 1, 0);
    g.in_offsets_.assign(static_cast<size_t>(num_nodes) + 1, 0);
    for (const Edge& e : g.edges_) ++g.out_offsets_[static_cast<size_t>(e.src) + 1];
    for (const Edge& e : g.in_edges_) ++g.in_offsets_[static_cast<size_t>(e.dst) + 1];
    for (int32_t v = 0; v < num_nodes; ++v) {
        g.out_offsets_[static_cast<size_t>(v) + 1] += g.out_offsets_[v];
        g.in_offsets_[static_cast<size_t>(v) + 1] += g.in_offsets_[v];
    }
    return g;
}

std::span<const Edge> Graph::out_edges(int32_t src) const {
    if (src < 0 || src >= num_nodes_) throw param_error("node id out of range");
    return {edges_.data() + out_offsets_[src],
            static_cast<size_t>(out_offsets_[static_cast<size_t>(src) + 1] - out_offsets_[src])};
}

std::span<const Edge> Graph::in_edges(int32_t dst) const {
    if (dst < 0 || dst >= num_nodes_) throw param_error("node id out of range");
    return {in_edges_.data() + in_offsets_[dst],
            static_cast<size_t>(in_offsets_[static_cast<size_t>(dst) + 1] - in_offsets_[dst])};
}

std::vector<double> Graph::column(int32_t j) const {
    std::vector<double> col(static_cast<size_t>(num_nodes_), 0.0);
    for (const Edge& e : in_edges(j)) col[e.src] = e.theta;
    return col;
}

std::vector<int32_t> Graph::parents(int32_t j) const {
    std::vector<int32_t> out;
    for (const Edge& e : in_edges(j)) out.push_back(e.src);
    return out;
}

double Graph::in_weight_sum(int32_t j) const {
    double s = 0.0;
    for (const Edge& e : in_edges(j)) s += e.theta;
    return s;
}

void Graph::validate_for_simulation() const {
    if (model_ != ModelKind::voter) return;
    for (int32_t j = 0; j < num_nodes_; ++j) {
        auto in = in_edges(j);
        if (in.empty()) continue;
        double sum = 0.0;
        for (const Edge& e : in) {
            if (e.theta > 1.0)
                throw data_error("voter weight > 1 on edge " + std::to_string(e.src) + "->" +
                                 std::to_string(j));
            sum += e.theta;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw data_error("voter incoming weights of node " + std::to_string(j) +
                             " sum to " + std::to_string(sum) + ", expected 1");
    }
}

// --- generators -------------------------------------------------------------

namespace {

GraphTopology doubled(int32_t num_nodes, const std::set<std::pair<int32_t, int32_t>>& und) {
    GraphTopology topo;
    topo.num_nodes = num_nodes;
    topo.edges.reserve(und.size() * 2);
    for (const auto& [a, b] : und) {
        topo.edges.emplace_back(a, b);
        topo.edges.emplace_back(b, a);
    }
    std::sort(topo.edges.begin(), topo.edges.end());
    return topo;
}

std::pair<int32_t, int32_t> ordered(int32_t a, int32_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

GraphTopology make_barabasi_albert(int32_t num_nodes, int32_t k, uint64_t seed) {
    if (num_nodes <= 0 || k <= 0 || k >= num_nodes)
        throw param_error("preferential attachment needs 0 < k < num_nodes");
    Rng rng(derive_seed(seed, {0x6261}));  // generator-local stream
    std::set<std::pair<int32_t, int32_t>> und;
    // repeated_nodes holds one entry per edge endpoint, so sampling an index
    // uniformly is sampling a node proportionally to its degree.
    std::vector<int32_t> repeated;
    std::vector<int32_t> targets(static_cast<size_t>(k));
    for (int32_t t = 0; t < k; ++t) targets[t] = t;
    for (int32_t v = k; v < num_nodes; ++v) {
        for (int32_t t : targets) {
            und.insert(ordered(v, t));
            repeated.push_back(v);
            repeated.push_back(t);
        }
        // Draw k distinct targets for the next node.
        std::set<int32_t> chosen;
        while (static_cast<int32_t>(chosen.size()) < k) {
            int32_t cand = repeated[rng.uniform_int(repeated.size())];
            chosen.insert(cand);
        }
        targets.assign(chosen.begin(), chosen.end());
    }
    return doubled(num_nodes, und);
}

GraphTopology make_watts_strogatz(int32_t num_nodes, int32_t k, double beta, uint64_t seed) {
    if (num_nodes <= 0 || k <= 0 || k % 2 != 0 || k >= num_nodes)
        throw param_error("ring lattice needs even k with 0 < k < num_nodes");
    if (beta < 0.0 || beta > 1.0) throw param_error("rewiring probability must lie in [0, 1]");
    Rng rng(derive_seed(seed, {0x7773}));
    std::set<std::pair<int32_t, int32_t>> und;
    for (int32_t v = 0; v < num_nodes; ++v)
        for (int32_t d = 1; d <= k / 2; ++d) und.insert(ordered(v, (v + d) % num_nodes));
    // Rewire in deterministic lattice order: detach (v, v+d) and reattach at a
    // uniform non-neighbor endpoint with probability beta.
    for (int32_t d = 1; d <= k / 2; ++d) {
        for (int32_t v = 0; v < num_nodes; ++v) {
            auto e = ordered(v, (v + d) % num_nodes);
            if (!und.count(e)) continue;  // already rewired away
            if (!rng.bernoulli(beta)) continue;
            // Reject self-loops and existing edges; give up after num_nodes
            // tries (saturated neighborhoods on tiny graphs).
            for (int32_t attempt = 0; attempt < num_nodes; ++attempt) {
                int32_t w = static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(num_nodes)));
                if (w == v || und.count(ordered(v, w))) continue;
                und.erase(e);
                und.insert(ordered(v, w));
                break;
            }
        }
    }
    return doubled(num_nodes, und);
}

GraphTopology make_holme_kim(int32_t num_nodes, int32_t k, double p_triad, uint64_t seed) {
    if (num_nodes <= 0 || k <= 0 || k >= num_nodes)
        throw param_error("powerlaw cluster generator needs 0 < k < num_nodes");
    if (p_triad < 0.0 || p_triad > 1.0) throw param_error("triad probability must lie in [0, 1]");
    Rng rng(derive_seed(seed, {0x686b}));
    std::set<std::pair<int32_t, int32_t>> und;
    // Seed the degree-proportional pool with one entry per initial node so an
    // attaching node can always find k distinct eligible targets (the initial
    // nodes start isolated, so an empty pool would strand the rejection loop).
    std::vector<int32_t> repeated(static_cast<size_t>(k));
    for (int32_t t = 0; t < k; ++t) repeated[t] = t;
    std::vector<std::vector<int32_t>> nbrs(static_cast<size_t>(num_nodes));
    auto connect = [&](int32_t a, int32_t b) {
        und.insert(ordered(a, b));
        nbrs[a].push_back(b);
        nbrs[b].push_back(a);
        repeated.push_back(a);
        repeated.push_back(b);
    };
    for (int32_t v = k; v < num_nodes; ++v) {
        int32_t last = -1;
        int32_t added = 0;
        while (added < k) {
            bool try_triad = last >= 0 && added > 0 && rng.bernoulli(p_triad);
            int32_t cand = -1;
            if (try_triad) {
                // Close a triangle through a random neighbor of the previous
                // attachment; fall through to preferential attachment if they
                // are all already connected to v.
                const auto& pool = nbrs[last];
                for (size_t attempt = 0; attempt < pool.size(); ++attempt) {
                    int32_t c = pool[rng.uniform_int(pool.size())];
                    if (c != v && !und.count(ordered(v, c))) {
                        cand = c;
                        break;
                    }
                }
            }
            if (cand < 0) {
                cand = repeated[rng.uniform_int(repeated.size())];
                if (cand == v || und.count(ordered(v, cand))) continue;
            }
            connect(v, cand);
            last = cand;
            ++added;
        }
    }
    return doubled(num_nodes, und);
}

GraphTopology make_kronecker(const std::array<double, 4>& initiator, int32_t power,
                             int64_t target_edges, uint64_t seed) {
    if (power <= 0 || power > 30) throw param_error("initiator power must lie in [1, 30]");
    double total = 0.0;
    for (double x : initiator) {
        if (x < 0.0) throw param_error("initiator entries must be nonnegative");
        total += x;
    }
    if (total <= 0.0) throw param_error("initiator must have positive mass");
    const int64_t n = int64_t{1} << power;
    const int64_t max_und = n * (n - 1) / 2;
    if (target_edges <= 0 || target_edges > max_und)
        throw param_error("target edge count must lie in [1, n*(n-1)/2]");

    const double p00 = initiator[0] / total, p01 = initiator[1] / total,
                 p10 = initiator[2] / total;
    Rng rng(derive_seed(seed, {0x6b72}));
    std::set<std::pair<int32_t, int32_t>> und;
    while (static_cast<int64_t>(und.size()) < target_edges) {
        int64_t i = 0, j = 0;
        for (int32_t level = 0; level < power; ++level) {
            double u = rng.uniform();
            i <<= 1;
            j <<= 1;
            if (u < p00) {
            } else if (u < p00 + p01) {
                j |= 1;
            } else if (u < p00 + p01 + p10) {
                i |= 1;
            } else {
                i |= 1;
                j |= 1;
            }
        }
        if (i == j) continue;
        und.insert(ordered(static_cast<int32_t>(i), static_cast<int32_t>(j)));
    }
    return doubled(static_cast<int32_t>(n), und);
}

// --- weights ----------------------------------------------------------------

Graph assign_weights(const GraphTopology& topology, ModelKind model, double low, double high,
                     uint64_t seed) {
    if (!(low <= high)) throw param_error("weight range must satisfy low <= high");
    if (model != ModelKind::voter && (low < 0.0 || high >= 1.0))
        throw param_error("edge probabilities must lie in [0, 1)");
    if (model == ModelKind::voter && (low <= 0.0 || high > 1.0))
        throw param_error("voter raw weights must lie in (0, 1]");
    Rng rng(derive_seed(seed, {0x7767}));

    std::vector<Edge> edges;
    edges.reserve(topology.edges.size());
    std::vector<std::pair<int32_t, int32_t>> sorted = topology.edges;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1]) throw data_error("duplicate edge in topology");

    if (model == ModelKind::voter) {
        std::vector<double> in_sum(static_cast<size_t>(topology.num_nodes), 0.0);
        for (const auto& [src, dst] : sorted) {
            double w = rng.uniform(low, high);
            if (w <= 0.0) w = low > 0.0 ? low : 1e-12;
            edges.push_back({src, dst, w});
            in_sum[dst] += w;
        }
        for (Edge& e : edges) e.theta /= in_sum[e.dst];
    } else {
        for (const auto& [src, dst] : sorted) {
            double p = rng.uniform(low, high);
            if (p <= 0.0) p = std::min(1e-12, high);  // keep theta > 0
            edges.push_back({src, dst, p_to_theta(p)});
        }
    }
    return Graph::from_edges(topology.num_nodes, model, std::move(edges));
}

Graph add_weak_edges(const Graph& graph, double prob, double low, double high, uint64_t seed) {
    if (graph.model() == ModelKind::voter)
        throw param_error("weak background edges would break voter normalization");
    if (prob < 0.0 || prob > 1.0) throw param_error("weak edge probability must lie in [0, 1]");
    if (!(low <= high) || low < 0.0 || high >= 1.0)
        throw param_error("weak edge probabilities must lie in [0, 1)");
    Rng rng(derive_seed(seed, {0x776b}));

    std::set<std::pair<int32_t, int32_t>> present;
    for (const Edge& e : graph.edges()) present.insert({e.src, e.dst});

    std::vector<Edge> edges = graph.edges();
    const int32_t m = graph.num_nodes();
    for (int32_t i = 0; i < m; ++i) {
        for (int32_t j = 0; j < m; ++j) {
            if (i == j || present.count({i, j})) continue;
            if (!rng.bernoulli(prob)) continue;
            double p = rng.uniform(low, high);
            if (p <= 0.0) continue;  // measure-zero draw; absent edge
            edges.push_back({i, j, p_to_theta(p)});
        }
    }
    return Graph::from_edges(m, graph.model(), std::move(edges));
}

// --- file I/O ---------------------------------------------------------------

void write_graph(const Graph& graph, std::ostream& out) {
    out << "# glc-graph v1 model=" << model_name(graph.model()) << " m=" << graph.num_nodes()
        << "\n";
    char buf[64];
    for (const Edge& e : graph.edges()) {
        std::snprintf(buf, sizeof(buf), "%d\t%d\t%.17g\n", e.src, e.dst, e.theta);
        out << buf;
    }
}

void write_graph(const Graph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    write_graph(graph, out);
    out.flush();
    if (!out) throw data_error("write to '" + path + "' failed");
}

Graph read_graph(std::istream& in, const std::string& display_name) {
    std::string line;
    if (!std::getline(in, line))
        throw data_error(display_name + ": empty file, expected graph header");
    // Header tokens: "#", "glc-graph", "v1", "model=<kind>", "m=<int>"
    std::string model_kv, m_kv;
    {
        std::istringstream header(line);
        std::string t0, t1, t2, t3, t4;
        header >> t0 >> t1 >> t2 >> t3 >> t4;
        if (t0 != "#" || t1 != "glc-graph" || t2 != "v1" || t3.rfind("model=", 0) != 0 ||
            t4.rfind("m=", 0) != 0)
            throw data_error(display_name + ":1: malformed header '" + line + "'");
        model_kv = t3.substr(6);
        m_kv = t4.substr(2);
    }
    ModelKind model;
    int32_t m;
    try {
        model = model_from_name(model_kv);
        size_t pos = 0;
        long mv = std::stol(m_kv, &pos);
        if (pos != m_kv.size() || mv <= 0 || mv > INT32_MAX) throw std::invalid_argument("m");
        m = static_cast<int32_t>(mv);
    } catch (const data_error&) {
        throw data_error(display_name + ":1: unknown model '" + model_kv + "'");
    } catch (const std::exception&) {
        throw data_error(display_name + ":1: bad node count '" + m_kv + "'");
    }

    std::vector<Edge> edges;
    std::set<std::pair<int32_t, int32_t>> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string at = display_name + ":" + std::to_string(lineno) + ": ";
        Edge e;
        char extra;
        if (std::sscanf(line.c_str(), "%d\t%d\t%lg %c", &e.src, &e.dst, &e.theta, &extra) != 3)
            throw data_error(at + "expected 'src\\tdst\\ttheta', got '" + line + "'");
        if (e.src < 0 || e.src >= m || e.dst < 0 || e.dst >= m)
            throw data_error(at + "edge endpoint out of range for m=" + std::to_string(m) +
                             ": " + std::to_string(e.src) + "->" + std::to_string(e.dst));
        if (e.src == e.dst) throw data_error(at + "self-loop on node " + std::to_string(e.src));
        if (!(e.theta > 0.0) || !std::isfinite(e.theta))
            throw data_error(at + "weight must be positive and finite, got '" + line + "'");
        if (!seen.insert({e.src, e.dst}).second)
            throw data_error(at + "duplicate edge " + std::to_string(e.src) + "->" +
                             std::to_string(e.dst));
        edges.push_back(e);
    }
    try {
        return Graph::from_edges(m, model, std::move(edges));
    } catch (const data_error& e) {
        throw data_error(display_name + ": " + e.what());
    }
}

Graph read_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "' for reading");
    return read_graph(in, path);
}

}  // namespace glc
