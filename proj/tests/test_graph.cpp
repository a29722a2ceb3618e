#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "glc/errors.hpp"
#include "glc/eval.hpp"
#include "glc/graph.hpp"

using namespace glc;

TEST_CASE("probability/theta change of variable") {
    CHECK(p_to_theta(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(p_to_theta(0.0) == 0.0);
    CHECK(theta_to_p(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
    // accurate round trip at small p (log1p/expm1 path)
    for (double p : {1e-12, 1e-8, 1e-3, 0.3, 0.9, 0.999999}) {
        CHECK(theta_to_p(p_to_theta(p)) == doctest::Approx(p).epsilon(1e-14));
    }
    CHECK_THROWS_AS(p_to_theta(1.0), param_error);
    CHECK_THROWS_AS(p_to_theta(-0.1), param_error);
}

TEST_CASE("model names round trip") {
    for (ModelKind k : {ModelKind::ic, ModelKind::voter, ModelKind::cice, ModelKind::logistic})
        CHECK(model_from_name(model_name(k)) == k);
    CHECK_THROWS_AS(model_from_name("sis"), data_error);
}

TEST_CASE("graph construction validates structure") {
    auto mk = [](std::vector<Edge> e) { return Graph::from_edges(3, ModelKind::ic, std::move(e)); };
    CHECK_NOTHROW(mk({{0, 1, 0.5}, {1, 2, 0.25}}));
    CHECK_THROWS_AS(mk({{0, 0, 0.5}}), data_error);              // self loop
    CHECK_THROWS_AS(mk({{0, 3, 0.5}}), data_error);              // id out of range
    CHECK_THROWS_AS(mk({{-1, 1, 0.5}}), data_error);             // negative id
    CHECK_THROWS_AS(mk({{0, 1, 0.0}}), data_error);              // nonpositive weight
    CHECK_THROWS_AS(mk({{0, 1, 0.5}, {0, 1, 0.2}}), data_error); // duplicate
}

TEST_CASE("adjacency views agree with the edge list") {
    const Graph g = Graph::from_edges(
        4, ModelKind::ic, {{2, 0, 0.3}, {0, 1, 0.5}, {0, 2, 0.7}, {1, 2, 0.2}, {3, 2, 0.9}});
    CHECK(g.num_edges() == 5);

    CHECK(g.out_edges(0).size() == 2);
    CHECK(g.out_edges(0)[0].dst == 1);
    CHECK(g.out_edges(0)[1].dst == 2);
    CHECK(g.out_edges(3).size() == 1);

    CHECK(g.in_edges(2).size() == 3);
    CHECK(g.in_edges(2)[0].src == 0);
    CHECK(g.in_edges(2)[1].src == 1);
    CHECK(g.in_edges(2)[2].src == 3);

    const auto col = g.column(2);
    CHECK(col[0] == 0.7);
    CHECK(col[1] == 0.2);
    CHECK(col[3] == 0.9);
    CHECK(col[2] == 0.0);
    CHECK(g.parents(2) == std::vector<int32_t>{0, 1, 3});
    CHECK(g.in_weight_sum(2) == doctest::Approx(1.8).epsilon(1e-15));
    CHECK(g.in_weight_sum(3) == 0.0);
}

namespace {

void check_topology_invariants(const GraphTopology& t) {
    std::set<std::pair<int32_t, int32_t>> seen;
    for (auto [a, b] : t.edges) {
        CHECK(a != b);
        CHECK(a >= 0);
        CHECK(b < t.num_nodes);
        CHECK(seen.insert({a, b}).second);  // no duplicate directed edges
    }
    for (auto [a, b] : t.edges) CHECK(seen.count({b, a}) == 1);  // doubled
}

}  // namespace

TEST_CASE("preferential attachment edge count is exact") {
    for (int32_t k : {3, 27, 30}) {
        const GraphTopology t = make_barabasi_albert(300, k, 11);
        CHECK(t.num_nodes == 300);
        CHECK(static_cast<int64_t>(t.edges.size()) == 2LL * (300 - k) * k);
        check_topology_invariants(t);
    }
}

TEST_CASE("ring lattice rewiring preserves the edge count") {
    const GraphTopology t = make_watts_strogatz(100, 8, 0.1, 5);
    CHECK(t.num_nodes == 100);
    CHECK(t.edges.size() == 2u * 100 * 8 / 2);
    check_topology_invariants(t);
    // beta=0 keeps the exact ring
    const GraphTopology ring = make_watts_strogatz(10, 2, 0.0, 5);
    std::set<std::pair<int32_t, int32_t>> e(ring.edges.begin(), ring.edges.end());
    for (int32_t i = 0; i < 10; ++i) CHECK(e.count({i, (i + 1) % 10}) == 1);
}

TEST_CASE("triad-closing attachment matches the attachment count") {
    const GraphTopology t = make_holme_kim(50, 4, 0.25, 7);
    CHECK(t.num_nodes == 50);
    CHECK(static_cast<int64_t>(t.edges.size()) == 2LL * (50 - 4) * 4);
    check_topology_invariants(t);
}

TEST_CASE("kronecker generator hits the undirected target exactly") {
    const GraphTopology t = make_kronecker({0.9, 0.5, 0.5, 0.3}, 6, 250, 13);
    CHECK(t.num_nodes == 64);
    CHECK(t.edges.size() == 500u);
    check_topology_invariants(t);
}

TEST_CASE("generators are deterministic in the seed") {
    const GraphTopology a = make_watts_strogatz(60, 6, 0.2, 42);
    const GraphTopology b = make_watts_strogatz(60, 6, 0.2, 42);
    const GraphTopology c = make_watts_strogatz(60, 6, 0.2, 43);
    CHECK(a.edges == b.edges);
    CHECK(a.edges != c.edges);
}

TEST_CASE("derive_k matches edge targets within 15 percent") {
    const std::pair<int32_t, int64_t> scales[] = {{100, 800}, {300, 4500}, {200, 9772}, {300, 16200}};
    for (const char* kind : {"ba", "ws", "holme-kim"}) {
        for (auto [nodes, target] : scales) {
            const int32_t k = derive_k(kind, nodes, target);
            GraphSpec spec;
            spec.kind = kind;
            spec.nodes = nodes;
            spec.k = k;
            const GraphTopology t = build_topology(spec, 3);
            const double got = static_cast<double>(t.edges.size());
            CHECK(std::fabs(got - static_cast<double>(target)) / static_cast<double>(target) <
                  0.15);
        }
    }
}

TEST_CASE("weight assignment respects the probability range and model scale") {
    const GraphTopology t = make_watts_strogatz(40, 4, 0.1, 3);

    const Graph ic = assign_weights(t, ModelKind::ic, 0.2, 0.7, 9);
    CHECK(ic.num_edges() == static_cast<int64_t>(t.edges.size()));
    for (const Edge& e : ic.edges()) {
        const double p = theta_to_p(e.theta);
        CHECK(p >= 0.2);
        CHECK(p <= 0.7);
    }

    const Graph voter = assign_weights(t, ModelKind::voter, 0.2, 0.7, 9);
    voter.validate_for_simulation();  // incoming columns sum to 1
    for (int32_t j = 0; j < voter.num_nodes(); ++j) {
        if (voter.in_edges(j).empty()) continue;
        CHECK(voter.in_weight_sum(j) == doctest::Approx(1.0).epsilon(1e-12));
    }

    // deterministic in seed, fresh across seeds
    const Graph ic2 = assign_weights(t, ModelKind::ic, 0.2, 0.7, 9);
    CHECK(ic.edges()[0].theta == ic2.edges()[0].theta);
    const Graph ic3 = assign_weights(t, ModelKind::ic, 0.2, 0.7, 10);
    CHECK(ic.edges()[0].theta != ic3.edges()[0].theta);
}

TEST_CASE("weak-edge augmentation only adds absent pairs") {
    const GraphTopology t = make_watts_strogatz(30, 4, 0.1, 3);
    const Graph base = assign_weights(t, ModelKind::ic, 0.3, 0.6, 1);
    const Graph aug = add_weak_edges(base, 1.0 / 3.0, 0.0, 0.1, 2);

    std::set<std::pair<int32_t, int32_t>> base_edges;
    for (const Edge& e : base.edges()) base_edges.insert({e.src, e.dst});

    int64_t added = 0;
    for (const Edge& e : aug.edges()) {
        if (base_edges.count({e.src, e.dst})) continue;
        ++added;
        const double p = theta_to_p(e.theta);
        CHECK(p > 0.0);
        CHECK(p <= 0.1);
    }
    CHECK(aug.num_edges() == base.num_edges() + added);
    // roughly a third of the absent pairs picked up
    const int64_t absent = 30LL * 29 - base.num_edges();
    CHECK(added > absent / 5);
    CHECK(added < absent / 2);
}

TEST_CASE("graph file round trip is byte identical") {
    const GraphTopology t = make_holme_kim(25, 3, 0.25, 21);
    const Graph g = assign_weights(t, ModelKind::cice, 0.1, 0.9, 4);

    std::ostringstream first;
    write_graph(g, first);
    std::istringstream in(first.str());
    const Graph back = read_graph(in, "mem");
    std::ostringstream second;
    write_graph(back, second);
    CHECK(first.str() == second.str());
    CHECK(back.num_nodes() == g.num_nodes());
    CHECK(back.model() == g.model());
    CHECK(back.num_edges() == g.num_edges());
}

TEST_CASE("graph reader names the offending line") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_graph(in, "bad.tsv");
    };
    CHECK_THROWS_AS(parse("not a header\n"), data_error);
    CHECK_THROWS_WITH_AS(parse("# glc-graph v1 model=ic m=3\n0\t1\t0.5\n0\toops\t0.2\n"),
                         doctest::Contains("bad.tsv:3"), data_error);
    CHECK_THROWS_WITH_AS(parse("# glc-graph v1 model=ic m=3\n0\t9\t0.5\n"),
                         doctest::Contains("bad.tsv:2"), data_error);
    CHECK_THROWS_AS(parse("# glc-graph v2 model=ic m=3\n"), data_error);
}
