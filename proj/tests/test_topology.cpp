#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "srim/topology.hpp"

using namespace srim;

namespace {

struct Bounds {
  const char* name;
  double lower, upper;
};

constexpr Bounds kTable[] = {
    {"complete", 0.234, 0.234}, {"cycle", 0.500, 0.500}, {"star", 0.000, 0.750},
    {"bipartite23", 0.500, 0.667}, {"house", 0.111, 0.500}, {"wheel", 0.306, 0.344},
};

}  // namespace

TEST_CASE("catalog bridging ranges match the published bounds") {
  for (const auto& b : kTable) {
    CAPTURE(b.name);
    const auto t = build_named(b.name, 5);
    const auto r = tctr(analyze(t));
    CHECK(std::abs(r.lower - b.lower) < 1e-3);
    CHECK(std::abs(r.upper - b.upper) < 1e-3);
  }
}

TEST_CASE("hand-derived constraint values") {
  // Star hub: four ties of share 1/4, no indirect paths.
  const auto star = analyze(build_named("star", 5));
  CHECK(star.burt_constraint[0] == doctest::Approx(0.25));
  CHECK(star.burt_constraint[1] == doctest::Approx(1.0));
  // Complete K5: each dyad (1/4 + 3/16)^2 = 49/256, four of them.
  const auto k5 = analyze(build_named("complete", 5));
  for (double c : k5.burt_constraint) CHECK(c == doctest::Approx(4 * 49.0 / 256.0));
  // House apex 4: ties to 1 and 2 at share 1/2 each, indirect 1/2 * 1/3.
  const auto house = analyze(build_named("house", 5));
  CHECK(house.burt_constraint[4] == doctest::Approx(2 * (0.5 + 1.0 / 6.0) * (0.5 + 1.0 / 6.0)));
}

TEST_CASE("betweenness, constraint and portfolios match brute force on random graphs") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto [n, edges] = oracle::random_connected_graph(rng, 8);
    const Topology t(n, edges);
    const auto a = oracle::adjacency(n, edges);
    const auto p = analyze(t);
    const auto bb = oracle::betweenness(a);
    const auto cc = oracle::constraint(a);
    for (int i = 0; i < n; ++i) {
      CHECK(p.betweenness[i] == doctest::Approx(bb[i]).epsilon(1e-12));
      CHECK(p.burt_constraint[i] == doctest::Approx(cc[i]).epsilon(1e-12));
      CHECK(p.bridging[i] == doctest::Approx(1.0 - cc[i]).epsilon(1e-12));
    }
    const auto d = oracle::distances(a);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(p.distance[i][j] == d[i][j]);
    CHECK(p.max_betweenness_set == oracle::max_betweenness(bb));
    const auto ports = portfolios(t, p);
    CHECK(ports.clique == oracle::clique_sets(a));
    CHECK(ports.hbn == oracle::hbn_sets(a));
    for (int i = 0; i < n; ++i) CHECK(ports.nearest[i] == t.neighbors(i));
  }
}

TEST_CASE("house portfolios") {
  const auto t = build_named("house", 5);
  const auto p = analyze(t);
  CHECK(p.max_betweenness_set == VertexSet{1, 2});
  CHECK(p.betweenness[1] == doctest::Approx(1.5));
  const auto ports = portfolios(t, p);
  CHECK(ports.clique[1] == VertexSet{2, 4});
  CHECK(ports.clique[2] == VertexSet{1, 4});
  CHECK(ports.clique[4] == VertexSet{1, 2});
  CHECK(ports.clique[0].empty());
  CHECK(ports.hbn[0] == VertexSet{1, 2, 3});
  CHECK(ports.hbn[3] == VertexSet{0, 1, 2});
  CHECK(ports.hbn[4] == VertexSet{1, 2});
  CHECK(ports.hbn[1] == VertexSet{2});
}

TEST_CASE("star hub is the unique maximum and gets no critical-connection set") {
  const auto t = build_named("star5");
  const auto p = analyze(t);
  CHECK(p.max_betweenness_set == VertexSet{0});
  const auto hbn = hbn_neighbors(t, p);
  CHECK(hbn[0].empty());
  for (int i = 1; i < 5; ++i) CHECK(hbn[i] == VertexSet{0});
}

TEST_CASE("vertex-transitive graphs tie every vertex at the maximum") {
  for (const char* name : {"complete", "cycle"}) {
    const auto p = analyze(build_named(name, 5));
    CHECK(p.max_betweenness_set == VertexSet{0, 1, 2, 3, 4});
  }
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(Topology(1, {}), TopologyError);
  CHECK_THROWS_AS(Topology(3, {{0, 0}, {0, 1}, {1, 2}}), TopologyError);
  CHECK_THROWS_AS(Topology(3, {{0, 3}}), TopologyError);
  try {
    Topology(4, {{0, 1}, {2, 3}});
    FAIL("expected a disconnected-graph error");
  } catch (const TopologyError& e) {
    CHECK(std::string(e.what()).find("{0,1} {2,3}") != std::string::npos);
  }
  CHECK_THROWS_AS(build_named("petersen", 5), TopologyError);
  CHECK_THROWS_AS(build_named("star", 6), TopologyError);
}

TEST_CASE("edge-list parsing") {
  const auto t = load_edge_list("# a path\nn 3\n0 1\n1 2 # tail comment\n2 1\n\n", "path");
  CHECK(t.size() == 3);
  CHECK(t.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(load_edge_list(t.to_edge_list()) == t);
  CHECK_THROWS_AS(load_edge_list("0 1\n"), TopologyError);
  CHECK_THROWS_AS(load_edge_list("n 3\n0 x\n"), TopologyError);
  try {
    load_edge_list("n 3\n0 1\n1 2 3\n");
    FAIL("expected a parse error");
  } catch (const TopologyError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("named specs") {
  CHECK(build_named("bipartite235") == build_named("bipartite23", 5));
  CHECK(build_named("wheel5").edges().size() == 8);
  CHECK(build_named("house5").edges().size() == 6);
  CHECK(build_named("complete5").edges().size() == 10);
}

TEST_CASE("tie shares sum to one per vertex") {
  const auto t = build_named("wheel", 5);
  for (const auto& row : tie_shares(t)) {
    double s = 0.0;
    for (double x : row) s += x;
    CHECK(s == doctest::Approx(1.0));
  }
}
