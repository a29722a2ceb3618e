#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace glc {

// Which conditional infection law the edge weights parameterize. Weights are
// always stored on the theta scale: for ic/cice the per-edge probability p
// maps through theta = log(1/(1-p)), for voter theta is the (column
// normalized) adoption probability itself, for logistic theta is the raw
// coefficient.
enum class ModelKind { ic, voter, cice, logistic };

std::string model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name);  // throws data_error

// theta = log(1/(1-p)) and its inverse, the change of variable that makes the
// per-node likelihood of the independent-cascade law concave. Computed via
// log1p/expm1 so the round trip is accurate for small p. p must lie in
// [0, 1); p >= 1 throws param_error.
double p_to_theta(double p);
double theta_to_p(double theta);

struct Edge {
    int32_t src;
    int32_t dst;
    double theta;
};

// Unweighted directed edge set. Generators emit undirected topologies doubled
// into both directions; edges are sorted by (src, dst) and unique, with no
// self-loops.
struct GraphTopology {
    int32_t num_nodes = 0;
    std::vector<std::pair<int32_t, int32_t>> edges;
};

// Weighted directed graph, immutable after construction. Structural
// invariants (ids in range, no self-loops, no duplicates, theta > 0) always
// hold; the voter normalization invariant (incoming weights of every
// non-isolated node sum to 1) is a property of *simulatable* voter graphs and
// is checked by validate_for_simulation(), not at construction — inferred
// weight matrices are also Graphs and legitimately violate it.
class Graph {
  public:
    Graph() = default;
    // Sorts, validates structure; throws data_error on violation.
    static Graph from_edges(int32_t num_nodes, ModelKind model, std::vector<Edge> edges);

    int32_t num_nodes() const { return num_nodes_; }
    ModelKind model() const { return model_; }
    int64_t num_edges() const { return static_cast<int64_t>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    // Outgoing edges of src / incoming edges of dst, each sorted by the other
    // endpoint. Views into CSR/CSC storage built at construction.
    std::span<const Edge> out_edges(int32_t src) const;
    std::span<const Edge> in_edges(int32_t dst) const;

    // Incoming weight column of node j as a dense length-num_nodes vector.
    std::vector<double> column(int32_t j) const;
    // Source ids of nonzero entries in column j, ascending.
    std::vector<int32_t> parents(int32_t j) const;

    double in_weight_sum(int32_t j) const;
    // Frobenius-style check used before simulating: voter graphs need
    // column sums == 1 (within 1e-12) and weights in (0, 1].
    void validate_for_simulation() const;  // throws data_error

  private:
    int32_t num_nodes_ = 0;
    ModelKind model_ = ModelKind::ic;
    std::vector<Edge> edges_;      // sorted by (src, dst)
    std::vector<Edge> in_edges_;   // sorted by (dst, src)
    std::vector<int64_t> out_offsets_;
    std::vector<int64_t> in_offsets_;
};

// --- topology generators ------------------------------------------------
//
// All generators build an undirected simple graph and then double every edge
// into both directions. Deterministic in (parameters, seed).

// Preferential attachment: k initial isolated nodes, every later node
// attaches to k distinct existing nodes with probability proportional to
// their current degree (first attachments uniform while degrees are zero).
GraphTopology make_barabasi_albert(int32_t num_nodes, int32_t k, uint64_t seed);

// Ring lattice with k nearest neighbors (k even), each edge rewired with
// probability beta avoiding self-loops and duplicates.
GraphTopology make_watts_strogatz(int32_t num_nodes, int32_t k, double beta, uint64_t seed);

// Preferential attachment where each of the k attachments after the first
// closes a triangle with probability p_triad (powerlaw cluster construction).
GraphTopology make_holme_kim(int32_t num_nodes, int32_t k, double p_triad, uint64_t seed);

// Stochastic Kronecker topology on 2^power nodes: repeatedly drop edges by
// descending the 2x2 initiator matrix power times, until target_edges
// distinct undirected non-loop edges have been placed.
GraphTopology make_kronecker(const std::array<double, 4>& initiator, int32_t power,
                             int64_t target_edges, uint64_t seed);

// --- weights --------------------------------------------------------------

// Draw a weight for every directed edge. For ic/cice/logistic an edge
// probability p ~ U[low, high] is drawn and stored as theta = log(1/(1-p)).
// For voter, raw positive draws are normalized so each node's incoming
// weights sum to exactly 1. Edges are visited in canonical (src, dst) order,
// so the result is deterministic in (topology, seed).
Graph assign_weights(const GraphTopology& topology, ModelKind model, double low, double high,
                     uint64_t seed);

// Approximate-sparsity variant: adds each absent ordered pair (i, j), i != j,
// with probability prob, weighted like assign_weights from U[low, high] on
// the probability scale (ic/cice/logistic only). Draws of exactly zero are
// skipped, keeping thetas strictly positive.
Graph add_weak_edges(const Graph& graph, double prob, double low, double high, uint64_t seed);

// --- file I/O ---------------------------------------------------------------
//
// Tab-separated format. First line:
//   # glc-graph v1 model=<ic|voter|cice|logistic> m=<num_nodes>
// then one "src<TAB>dst<TAB>theta" line per edge in (src, dst) order, thetas
// printed with 17 significant digits so write -> read -> write is
// byte-identical.

void write_graph(const Graph& graph, const std::string& path);
void write_graph(const Graph& graph, std::ostream& out);
Graph read_graph(const std::string& path);   // throws data_error with line numbers
Graph read_graph(std::istream& in, const std::string& display_name);

}  // namespace glc
