#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lwrnet/grid.hpp"
#include "lwrnet/network.hpp"
#include "lwrnet/network_io.hpp"

using namespace lwrnet;

namespace {

NetworkSpec chain_spec() {
  // u -> v -> w, two roads
  NetworkSpec spec;
  spec.vertices = {1, 2, 3};
  spec.edges = {{1, 1, 2, 1.0}, {2, 2, 3, 2.0}};
  return spec;
}

}  // namespace

TEST_CASE("single road network gets no distribution rows") {
  NetworkSpec spec;
  spec.vertices = {1, 2};
  spec.edges = {{1, 1, 2, 1.0}};
  MetricNetwork net = MetricNetwork::build(spec);
  CHECK(net.vertex_count() == 2);
  CHECK(net.edge_count() == 1);
  for (const auto& v : net.vertices()) CHECK(v.alpha.empty());
  CHECK_FALSE(net.closed_flow_network());
}

TEST_CASE("pass-through vertex defaults to the trivial row") {
  MetricNetwork net = MetricNetwork::build(chain_spec());
  const VertexTopology& mid = net.vertex_by_index(net.vertex_index(2));
  REQUIRE(mid.n_in() == 1);
  REQUIRE(mid.n_out() == 1);
  CHECK(mid.alpha_at(0, 0) == 1.0);
}

TEST_CASE("validation failures carry distinct codes") {
  NetworkSpec bad = chain_spec();
  bad.edges[1].length = -1.0;
  CHECK_THROWS_WITH_AS(MetricNetwork::build(bad), doctest::Contains("non-positive length"),
                       ValidationError);

  bad = chain_spec();
  bad.edges[1].head = 9;
  try {
    MetricNetwork::build(bad);
    FAIL("expected a dangling endpoint error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::DanglingEndpoint);
  }

  bad = chain_spec();
  bad.vertices.push_back(4);  // not touched by any edge
  try {
    MetricNetwork::build(bad);
    FAIL("expected a disconnected error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::Disconnected);
  }

  bad = chain_spec();
  bad.edges.push_back({2, 1, 3, 1.0});
  try {
    MetricNetwork::build(bad);
    FAIL("expected a duplicate edge error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::DuplicateEdgeId);
  }
}

TEST_CASE("distribution rows must sum to one") {
  NetworkSpec spec;
  spec.vertices = {1, 2, 3, 4};
  spec.edges = {{1, 1, 2, 1.0}, {2, 2, 3, 1.0}, {3, 2, 4, 1.0}};
  spec.distribution = {{2, {1}, {2, 3}, {0.6, 0.5}}};
  try {
    MetricNetwork::build(spec);
    FAIL("expected a row sum error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::RowSumMismatch);
  }

  spec.distribution = {{2, {1}, {2, 3}, {1.2, -0.2}}};
  try {
    MetricNetwork::build(spec);
    FAIL("expected a negative coefficient error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::NegativeCoefficient);
  }
}

TEST_CASE("declared matrix order is canonicalized to ascending edge ids") {
  NetworkSpec spec;
  spec.vertices = {1, 2, 3, 4};
  spec.edges = {{1, 1, 2, 1.0}, {2, 2, 3, 1.0}, {3, 2, 4, 1.0}};
  // outgoing declared as (3, 2): the 0.7 belongs to edge 3
  spec.distribution = {{2, {1}, {3, 2}, {0.7, 0.3}}};
  MetricNetwork net = MetricNetwork::build(spec);
  const VertexTopology& v = net.vertex_by_index(net.vertex_index(2));
  CHECK(net.edge_by_index(v.out_edges[0]).id == 2);
  CHECK(v.alpha_at(0, 0) == 0.3);
  CHECK(v.alpha_at(0, 1) == 0.7);
}

TEST_CASE("manhattan counts match the closed formulas") {
  for (int ell = 2; ell <= 10; ++ell) {
    MetricNetwork net = MetricNetwork::manhattan(ell);
    CHECK(net.vertex_count() == ell * ell);
    CHECK(net.edge_count() == 4 * ell * (ell - 1));
    CHECK(net.closed_flow_network());
  }
  CHECK_THROWS_AS(MetricNetwork::manhattan(1), ValidationError);
}

TEST_CASE("manhattan rows are equidistributed and degrees follow position") {
  MetricNetwork net = MetricNetwork::manhattan(5);
  int interior = 0, border = 0, corner = 0;
  for (const auto& v : net.vertices()) {
    CHECK(v.n_in() == v.n_out());
    if (v.n_in() == 4) ++interior;
    if (v.n_in() == 3) ++border;
    if (v.n_in() == 2) ++corner;
    for (int r = 0; r < v.n_in(); ++r) {
      double sum = 0.0;
      for (int s = 0; s < v.n_out(); ++s) {
        CHECK(v.alpha_at(r, s) == 1.0 / v.n_out());
        sum += v.alpha_at(r, s);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(interior == 9);
  CHECK(border == 12);
  CHECK(corner == 4);
}

TEST_CASE("manhattan layout picks the figure's central labels") {
  ManhattanLayout m5(5);
  CHECK(m5.central_vertex() == 13);
  CHECK(m5.central_rightward_edge() == 11);
  // the central rightward road leaves the central junction
  MetricNetwork net = MetricNetwork::manhattan(5);
  const EdgeDef& e = net.edge_by_index(net.edge_index(11));
  CHECK(e.tail == 13);
  CHECK(e.head == 14);

  ManhattanLayout m3(3);
  CHECK(m3.central_vertex() == 5);
  CHECK(m3.central_rightward_edge() == 4);
  CHECK_THROWS_AS(ManhattanLayout(4).central_vertex(), ValidationError);
  CHECK(ManhattanLayout(4).central_rightward_edge() >= 1);
}

TEST_CASE("incoming and outgoing edges sort rightward, leftward, upward, downward") {
  MetricNetwork net = MetricNetwork::manhattan(5);
  ManhattanLayout m(5);
  const VertexTopology& center = net.vertex_by_index(net.vertex_index(13));
  REQUIRE(center.n_in() == 4);
  // center = (row 2, col 2); incoming rightward from (2,1), leftward from
  // (2,2) segment, upward from (1,2), downward from (2,2) vertical segment
  CHECK(net.edge_by_index(center.in_edges[0]).id == m.rightward_id(2, 1));
  CHECK(net.edge_by_index(center.in_edges[1]).id == m.leftward_id(2, 2));
  CHECK(net.edge_by_index(center.in_edges[2]).id == m.upward_id(1, 2));
  CHECK(net.edge_by_index(center.in_edges[3]).id == m.downward_id(2, 2));
  CHECK(net.edge_by_index(center.out_edges[0]).id == m.rightward_id(2, 2));
  CHECK(net.edge_by_index(center.out_edges[1]).id == m.leftward_id(2, 1));
  CHECK(net.edge_by_index(center.out_edges[2]).id == m.upward_id(2, 2));
  CHECK(net.edge_by_index(center.out_edges[3]).id == m.downward_id(1, 2));
}

TEST_CASE("closure zeroes the column and renormalizes") {
  MetricNetwork net = MetricNetwork::manhattan(5);
  MetricNetwork closed = net.with_closed_edge(11);
  const VertexTopology& center = closed.vertex_by_index(closed.vertex_index(13));
  int col = -1;
  for (int s = 0; s < center.n_out(); ++s) {
    if (closed.edge_by_index(center.out_edges[s]).id == 11) col = s;
  }
  REQUIRE(col >= 0);
  for (int r = 0; r < center.n_in(); ++r) {
    double sum = 0.0;
    for (int s = 0; s < center.n_out(); ++s) {
      double a = center.alpha_at(r, s);
      if (s == col) {
        CHECK(a == 0.0);
      } else {
        CHECK(a == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
      }
      sum += a;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // closing the only way out is refused
  NetworkSpec spec;
  spec.vertices = {1, 2};
  spec.edges = {{1, 1, 2, 1.0}, {2, 2, 1, 1.0}};
  MetricNetwork ring = MetricNetwork::build(spec);
  try {
    ring.with_closed_edge(1);
    FAIL("expected a closure error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::ClosureLastOutgoing);
  }
  CHECK_THROWS_AS(ring.with_closed_edge(99), ValidationError);

  // a row routing everything into the closed road cannot be repaired
  NetworkSpec fork;
  fork.vertices = {1, 2, 3};
  fork.edges = {{1, 1, 2, 1.0}, {2, 2, 3, 1.0}, {3, 2, 1, 1.0}, {4, 3, 1, 1.0}};
  fork.distribution = {{2, {1}, {2, 3}, {1.0, 0.0}}};
  MetricNetwork stuck = MetricNetwork::build(fork);
  try {
    stuck.with_closed_edge(2);
    FAIL("expected a stuck-row error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::ClosureRowStuck);
  }
}

TEST_CASE("even grids pick the road nearest the centroid, lowest id on ties") {
  // side 4: rows 1 and 2 tie at the centroid; row-major numbering makes the
  // row-1 road the lower id
  ManhattanLayout m(4);
  CHECK(m.central_rightward_edge() == m.rightward_id(1, 1));
  CHECK(m.central_rightward_edge() == 5);
}

TEST_CASE("discretize computes the cell counts") {
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(5));
  CellGrid grid = CellGrid::discretize(net, 0.1);
  CHECK(grid.total_cells() == 800);
  for (int e = 0; e < net->edge_count(); ++e) CHECK(grid.cells_on_edge(e) == 10);

  NetworkSpec spec;
  spec.vertices = {1, 2};
  spec.edges = {{1, 1, 2, 2.0}};
  auto single = std::make_shared<const MetricNetwork>(MetricNetwork::build(spec));
  CellGrid g2 = CellGrid::discretize(single, 0.5);
  CHECK(g2.total_cells() == 4);
  CHECK(g2.cells_on_edge(0) == 4);
  CHECK(g2.cell_center(0, 1) == doctest::Approx(0.25));

  spec.edges = {{1, 1, 2, 1.0}};
  auto odd = std::make_shared<const MetricNetwork>(MetricNetwork::build(spec));
  try {
    CellGrid::discretize(odd, 0.3);
    FAIL("expected a divisibility error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::NonDivisibleEdgeLength);
  }
}

TEST_CASE("grid cell count equals roads times cells per road") {
  for (int ell : {2, 3, 5}) {
    auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(ell));
    for (int je : {4, 10}) {
      CellGrid grid = CellGrid::discretize(net, 1.0 / je);
      CHECK(grid.total_cells() == 4 * ell * (ell - 1) * je);
    }
  }
}

TEST_CASE("global indexing is a bijection in edge-id order") {
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(3));
  CellGrid grid = CellGrid::discretize(net, 0.25);
  int expected = 0;
  for (int e = 0; e < net->edge_count(); ++e) {
    for (int j = 1; j <= grid.cells_on_edge(e); ++j) {
      CHECK(grid.global_index(e, j) == expected);
      auto [ee, jj] = grid.locate(expected);
      CHECK(ee == e);
      CHECK(jj == j);
      ++expected;
    }
  }
  CHECK(expected == grid.total_cells());
}

TEST_CASE("json round trip reproduces the network bit-exactly") {
  MetricNetwork net = MetricNetwork::manhattan(3, 2.0);
  MetricNetwork back = network_from_json(network_to_json(net));
  CHECK(net == back);

  // non-trivial matrices survive as well
  MetricNetwork closed = net.with_closed_edge(ManhattanLayout(3).central_rightward_edge());
  MetricNetwork closed_back = network_from_json(network_to_json(closed));
  CHECK(closed == closed_back);
}

TEST_CASE("unknown keys are rejected") {
  MetricNetwork net = MetricNetwork::manhattan(2);
  std::string text = network_to_json(net);
  text.insert(text.find("\"vertices\""), "\"speed_limit\": 3,\n  ");
  try {
    network_from_json(text);
    FAIL("expected an unknown key error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::UnknownKey);
  }
}
