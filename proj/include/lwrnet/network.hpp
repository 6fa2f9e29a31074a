#pragma once

// Metric road networks: a connected directed graph whose edges carry positive
// lengths and whose junctions carry row-stochastic distribution matrices,
// plus the two-way Manhattan grid generator used by the experiment suite.

#include <string>
#include <vector>

#include "lwrnet/errors.hpp"

namespace lwrnet {

using VertexId = int;
using EdgeId = int;

struct EdgeDef {
  EdgeId id = 0;
  VertexId tail = 0;
  VertexId head = 0;
  double length = 0.0;  // space units, > 0

  friend bool operator==(const EdgeDef&, const EdgeDef&) = default;
};

// One distribution-matrix entry of a network description. Row r holds the
// fractions of traffic leaving incoming edge `incoming[r]` toward each edge
// of `outgoing`, in the declared order.
struct DistributionSpec {
  VertexId vertex = 0;
  std::vector<EdgeId> incoming;
  std::vector<EdgeId> outgoing;
  std::vector<double> coeff;  // row-major, incoming.size() x outgoing.size()
};

struct NetworkSpec {
  std::vector<VertexId> vertices;
  std::vector<EdgeDef> edges;
  // Optional; junctions without an entry default to equidistribution over
  // their outgoing edges.
  std::vector<DistributionSpec> distribution;
};

// Per-vertex topology with incident edges in ascending edge-id order.
// `alpha` is the distribution matrix (n_in x n_out, row-major); empty when
// the vertex has no incoming or no outgoing edges.
struct VertexTopology {
  VertexId id = 0;
  std::vector<int> in_edges;   // dense edge indices
  std::vector<int> out_edges;  // dense edge indices
  std::vector<double> alpha;

  int n_in() const { return static_cast<int>(in_edges.size()); }
  int n_out() const { return static_cast<int>(out_edges.size()); }
  double alpha_at(int r, int s) const {
    return alpha[static_cast<std::size_t>(r) * out_edges.size() + static_cast<std::size_t>(s)];
  }
};

// Immutable after construction; safe to share across threads.
class MetricNetwork {
 public:
  // Validates and canonicalizes a description: edges sorted by id,
  // distribution matrices re-indexed to ascending edge ids, equidistribution
  // filled in where no matrix was given.
  static MetricNetwork build(const NetworkSpec& spec);

  // Two-way grid with `ell` junctions per side: ell^2 vertices and
  // 4*ell*(ell-1) directed edges, all of length `edge_length`. Vertices are
  // numbered row-major from the bottom-left corner starting at 1. Edges are
  // numbered in four blocks (rightward, leftward, upward, downward), each
  // block row-major; see ManhattanLayout. All distribution matrices are
  // equidistributed.
  static MetricNetwork manhattan(int ell, double edge_length = 1.0);

  // Copy of this network with `edge` closed at its tail junction: the
  // distribution column of `edge` is zeroed and every row renormalized to
  // sum 1. Traffic already on the edge still discharges through its head.
  MetricNetwork with_closed_edge(EdgeId edge) const;

  // Copy with the distribution matrix of one vertex replaced (row-major,
  // rows over incoming edges in ascending id order). Rows are re-validated.
  MetricNetwork with_distribution(VertexId vertex, std::vector<double> alpha) const;

  int vertex_count() const { return static_cast<int>(vertex_ids_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<VertexId>& vertex_ids() const { return vertex_ids_; }
  const std::vector<EdgeDef>& edges() const { return edges_; }
  const EdgeDef& edge_by_index(int index) const { return edges_[static_cast<std::size_t>(index)]; }
  const std::vector<VertexTopology>& vertices() const { return topo_; }
  const VertexTopology& vertex_by_index(int index) const { return topo_[static_cast<std::size_t>(index)]; }

  int edge_index(EdgeId id) const;      // throws UnknownEdge
  int vertex_index(VertexId id) const;  // throws UnknownVertex

  // True when every vertex has at least one incoming and one outgoing edge
  // (required for simulation: the junction scheme owns all edge ends).
  bool closed_flow_network() const;

  NetworkSpec to_spec() const;  // canonical description, for serialization

  friend bool operator==(const MetricNetwork& a, const MetricNetwork& b);

 private:
  MetricNetwork() = default;

  std::vector<VertexId> vertex_ids_;
  std::vector<EdgeDef> edges_;  // ascending id
  std::vector<VertexTopology> topo_;
};

// Deterministic addressing of the Manhattan grid. Vertex (row, col) with
// row, col in [0, ell) counts from the bottom-left corner and has id
// row*ell + col + 1. Edge ids are 1-based in four row-major blocks of size
// ell*(ell-1): rightward, leftward, upward, downward. With this numbering
// the incoming (and outgoing) edges at any junction sort rightward,
// leftward, upward, downward, which fixes the meaning of "road 1..4" in the
// junction-perturbation experiments.
struct ManhattanLayout {
  int ell = 0;

  explicit ManhattanLayout(int ell_) : ell(ell_) {}

  int vertex_count() const { return ell * ell; }
  int edge_count() const { return 4 * ell * (ell - 1); }
  int block_size() const { return ell * (ell - 1); }

  VertexId vertex_id(int row, int col) const { return row * ell + col + 1; }
  EdgeId rightward_id(int row, int col) const { return row * (ell - 1) + col + 1; }
  EdgeId leftward_id(int row, int col) const { return block_size() + row * (ell - 1) + col + 1; }
  EdgeId upward_id(int row, int col) const { return 2 * block_size() + row * ell + col + 1; }
  EdgeId downward_id(int row, int col) const { return 3 * block_size() + row * ell + col + 1; }

  bool is_rightward(EdgeId id) const { return id >= 1 && id <= block_size(); }
  bool is_leftward(EdgeId id) const { return id > block_size() && id <= 2 * block_size(); }

  std::vector<EdgeId> rightward_edges() const;
  std::vector<EdgeId> leftward_edges() const;

  // The junction at the exact grid center (odd ell only).
  VertexId central_vertex() const;
  // The rightward edge leaving the central junction for odd ell; for even
  // ell, the rightward edge nearest the grid centroid with the lowest id.
  EdgeId central_rightward_edge() const;
};

}  // namespace lwrnet
