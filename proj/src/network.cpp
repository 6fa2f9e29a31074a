#include "lwrnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace lwrnet {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string edge_label(EdgeId id) {
  return "edge " + std::to_string(id);
}

std::string vertex_label(VertexId id) {
  return "vertex " + std::to_string(id);
}

void check_row_stochastic(const std::vector<double>& alpha, int n_in, int n_out,
                          VertexId vertex) {
  for (int r = 0; r < n_in; ++r) {
    double sum = 0.0;
    for (int s = 0; s < n_out; ++s) {
      double a = alpha[static_cast<std::size_t>(r) * n_out + s];
      if (a < 0.0) {
        throw ValidationError(ValidationCode::NegativeCoefficient,
                              vertex_label(vertex) + " row " + std::to_string(r + 1));
      }
      sum += a;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os << vertex_label(vertex) << " row " << r + 1 << " sums to " << sum;
      throw ValidationError(ValidationCode::RowSumMismatch, os.str());
    }
  }
}

}  // namespace

int MetricNetwork::edge_index(EdgeId id) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                             [](const EdgeDef& e, EdgeId v) { return e.id < v; });
  if (it == edges_.end() || it->id != id) {
    throw ValidationError(ValidationCode::UnknownEdge, edge_label(id));
  }
  return static_cast<int>(it - edges_.begin());
}

int MetricNetwork::vertex_index(VertexId id) const {
  auto it = std::lower_bound(vertex_ids_.begin(), vertex_ids_.end(), id);
  if (it == vertex_ids_.end() || *it != id) {
    throw ValidationError(ValidationCode::UnknownVertex, vertex_label(id));
  }
  return static_cast<int>(it - vertex_ids_.begin());
}

bool MetricNetwork::closed_flow_network() const {
  for (const auto& v : topo_) {
    if (v.n_in() == 0 || v.n_out() == 0) return false;
  }
  return true;
}

MetricNetwork MetricNetwork::build(const NetworkSpec& spec) {
  if (spec.vertices.empty() || spec.edges.empty()) {
    throw ValidationError(ValidationCode::EmptyNetwork,
                          "need at least one vertex and one edge");
  }

  MetricNetwork net;
  net.vertex_ids_ = spec.vertices;
  std::sort(net.vertex_ids_.begin(), net.vertex_ids_.end());
  for (std::size_t i = 1; i < net.vertex_ids_.size(); ++i) {
    if (net.vertex_ids_[i] == net.vertex_ids_[i - 1]) {
      throw ValidationError(ValidationCode::DuplicateVertexId, vertex_label(net.vertex_ids_[i]));
    }
  }

  net.edges_ = spec.edges;
  std::sort(net.edges_.begin(), net.edges_.end(),
            [](const EdgeDef& a, const EdgeDef& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < net.edges_.size(); ++i) {
    if (net.edges_[i].id == net.edges_[i - 1].id) {
      throw ValidationError(ValidationCode::DuplicateEdgeId, edge_label(net.edges_[i].id));
    }
  }

  const int n_vertices = net.vertex_count();
  net.topo_.resize(static_cast<std::size_t>(n_vertices));
  for (int i = 0; i < n_vertices; ++i) net.topo_[static_cast<std::size_t>(i)].id = net.vertex_ids_[static_cast<std::size_t>(i)];

  for (int e = 0; e < net.edge_count(); ++e) {
    const EdgeDef& edge = net.edges_[static_cast<std::size_t>(e)];
    if (!(edge.length > 0.0)) {
      std::ostringstream os;
      os << edge_label(edge.id) << " has length " << edge.length;
      throw ValidationError(ValidationCode::NonPositiveLength, os.str());
    }
    auto tail_it = std::lower_bound(net.vertex_ids_.begin(), net.vertex_ids_.end(), edge.tail);
    auto head_it = std::lower_bound(net.vertex_ids_.begin(), net.vertex_ids_.end(), edge.head);
    if (tail_it == net.vertex_ids_.end() || *tail_it != edge.tail ||
        head_it == net.vertex_ids_.end() || *head_it != edge.head) {
      throw ValidationError(ValidationCode::DanglingEndpoint, edge_label(edge.id));
    }
    net.topo_[static_cast<std::size_t>(tail_it - net.vertex_ids_.begin())].out_edges.push_back(e);
    net.topo_[static_cast<std::size_t>(head_it - net.vertex_ids_.begin())].in_edges.push_back(e);
  }
  // Edge vectors were filled in ascending id order already (edges_ is sorted),
  // so in_edges/out_edges are canonical as-is.

  // Distribution matrices: start from equidistribution, then overlay the
  // declared entries after re-indexing them to ascending edge ids.
  for (auto& v : net.topo_) {
    if (v.n_in() == 0 || v.n_out() == 0) continue;
    double a = 1.0 / static_cast<double>(v.n_out());
    v.alpha.assign(static_cast<std::size_t>(v.n_in()) * v.n_out(), a);
  }

  std::set<VertexId> seen;
  for (const auto& entry : spec.distribution) {
    if (!seen.insert(entry.vertex).second) {
      throw ValidationError(ValidationCode::DuplicateVertexId,
                            "distribution entry repeated for " + vertex_label(entry.vertex));
    }
    int vi = net.vertex_index(entry.vertex);
    VertexTopology& v = net.topo_[static_cast<std::size_t>(vi)];
    const int n_in = v.n_in();
    const int n_out = v.n_out();
    if (static_cast<int>(entry.incoming.size()) != n_in ||
        static_cast<int>(entry.outgoing.size()) != n_out ||
        entry.coeff.size() != static_cast<std::size_t>(n_in) * static_cast<std::size_t>(n_out)) {
      throw ValidationError(ValidationCode::BadMatrixShape,
                            vertex_label(entry.vertex) + " expects " + std::to_string(n_in) + "x" +
                                std::to_string(n_out));
    }
    // Map the declared edge orders onto the canonical ascending-id order.
    auto position = [&](const std::vector<EdgeId>& declared, const std::vector<int>& canonical,
                        int slot) {
      EdgeId want = net.edges_[static_cast<std::size_t>(canonical[static_cast<std::size_t>(slot)])].id;
      auto it = std::find(declared.begin(), declared.end(), want);
      if (it == declared.end()) {
        throw ValidationError(ValidationCode::UnknownEdge,
                              vertex_label(entry.vertex) + " matrix misses " + edge_label(want));
      }
      return static_cast<int>(it - declared.begin());
    };
    v.alpha.assign(static_cast<std::size_t>(n_in) * static_cast<std::size_t>(n_out), 0.0);
    for (int r = 0; r < n_in; ++r) {
      int dr = position(entry.incoming, v.in_edges, r);
      for (int s = 0; s < n_out; ++s) {
        int ds = position(entry.outgoing, v.out_edges, s);
        v.alpha[static_cast<std::size_t>(r) * n_out + s] =
            entry.coeff[static_cast<std::size_t>(dr) * n_out + ds];
      }
    }
    check_row_stochastic(v.alpha, n_in, n_out, entry.vertex);
  }

  // Connectivity, ignoring directions.
  std::vector<std::vector<int>> und(static_cast<std::size_t>(n_vertices));
  for (const auto& edge : net.edges_) {
    int t = net.vertex_index(edge.tail);
    int h = net.vertex_index(edge.head);
    und[static_cast<std::size_t>(t)].push_back(h);
    und[static_cast<std::size_t>(h)].push_back(t);
  }
  std::vector<char> reached(static_cast<std::size_t>(n_vertices), 0);
  std::vector<int> stack{0};
  reached[0] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : und[static_cast<std::size_t>(u)]) {
      if (!reached[static_cast<std::size_t>(w)]) {
        reached[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  for (int i = 0; i < n_vertices; ++i) {
    if (!reached[static_cast<std::size_t>(i)]) {
      throw ValidationError(ValidationCode::Disconnected,
                            vertex_label(net.vertex_ids_[static_cast<std::size_t>(i)]) + " unreachable");
    }
  }

  return net;
}

MetricNetwork MetricNetwork::manhattan(int ell, double edge_length) {
  if (ell < 2) {
    throw ValidationError(ValidationCode::BadParameter,
                          "manhattan grid needs ell >= 2, got " + std::to_string(ell));
  }
  if (!(edge_length > 0.0)) {
    throw ValidationError(ValidationCode::NonPositiveLength, "manhattan edge length");
  }
  ManhattanLayout m(ell);
  NetworkSpec spec;
  spec.vertices.reserve(static_cast<std::size_t>(m.vertex_count()));
  for (int row = 0; row < ell; ++row)
    for (int col = 0; col < ell; ++col) spec.vertices.push_back(m.vertex_id(row, col));

  spec.edges.reserve(static_cast<std::size_t>(m.edge_count()));
  for (int row = 0; row < ell; ++row)
    for (int col = 0; col < ell - 1; ++col)
      spec.edges.push_back({m.rightward_id(row, col), m.vertex_id(row, col), m.vertex_id(row, col + 1), edge_length});
  for (int row = 0; row < ell; ++row)
    for (int col = 0; col < ell - 1; ++col)
      spec.edges.push_back({m.leftward_id(row, col), m.vertex_id(row, col + 1), m.vertex_id(row, col), edge_length});
  for (int row = 0; row < ell - 1; ++row)
    for (int col = 0; col < ell; ++col)
      spec.edges.push_back({m.upward_id(row, col), m.vertex_id(row, col), m.vertex_id(row + 1, col), edge_length});
  for (int row = 0; row < ell - 1; ++row)
    for (int col = 0; col < ell; ++col)
      spec.edges.push_back({m.downward_id(row, col), m.vertex_id(row + 1, col), m.vertex_id(row, col), edge_length});

  return build(spec);
}

MetricNetwork MetricNetwork::with_closed_edge(EdgeId edge) const {
  int e = edge_index(edge);
  int vi = vertex_index(edges_[static_cast<std::size_t>(e)].tail);
  const VertexTopology& tail = topo_[static_cast<std::size_t>(vi)];
  if (tail.n_out() < 2) {
    throw ValidationError(ValidationCode::ClosureLastOutgoing,
                          edge_label(edge) + " is the only way out of " + vertex_label(tail.id));
  }

  int col = -1;
  for (int s = 0; s < tail.n_out(); ++s) {
    if (tail.out_edges[static_cast<std::size_t>(s)] == e) col = s;
  }

  std::vector<double> alpha = tail.alpha;
  const int n_out = tail.n_out();
  for (int r = 0; r < tail.n_in(); ++r) {
    double removed = alpha[static_cast<std::size_t>(r) * n_out + col];
    double keep = 1.0 - removed;
    if (!(keep > 0.0)) {
      throw ValidationError(ValidationCode::ClosureRowStuck,
                            vertex_label(tail.id) + " row " + std::to_string(r + 1) +
                                " sends everything into " + edge_label(edge));
    }
    for (int s = 0; s < n_out; ++s) {
      auto& a = alpha[static_cast<std::size_t>(r) * n_out + s];
      a = (s == col) ? 0.0 : a / keep;
    }
  }
  return with_distribution(tail.id, std::move(alpha));
}

MetricNetwork MetricNetwork::with_distribution(VertexId vertex, std::vector<double> alpha) const {
  int vi = vertex_index(vertex);
  const VertexTopology& v = topo_[static_cast<std::size_t>(vi)];
  if (alpha.size() != static_cast<std::size_t>(v.n_in()) * static_cast<std::size_t>(v.n_out())) {
    throw ValidationError(ValidationCode::BadMatrixShape,
                          vertex_label(vertex) + " expects " + std::to_string(v.n_in()) + "x" +
                              std::to_string(v.n_out()));
  }
  check_row_stochastic(alpha, v.n_in(), v.n_out(), vertex);
  MetricNetwork out = *this;
  out.topo_[static_cast<std::size_t>(vi)].alpha = std::move(alpha);
  return out;
}

NetworkSpec MetricNetwork::to_spec() const {
  NetworkSpec spec;
  spec.vertices = vertex_ids_;
  spec.edges = edges_;
  for (const auto& v : topo_) {
    if (v.alpha.empty()) continue;
    DistributionSpec d;
    d.vertex = v.id;
    for (int e : v.in_edges) d.incoming.push_back(edges_[static_cast<std::size_t>(e)].id);
    for (int e : v.out_edges) d.outgoing.push_back(edges_[static_cast<std::size_t>(e)].id);
    d.coeff = v.alpha;
    spec.distribution.push_back(std::move(d));
  }
  return spec;
}

bool operator==(const MetricNetwork& a, const MetricNetwork& b) {
  if (a.vertex_ids_ != b.vertex_ids_ || a.edges_ != b.edges_) return false;
  for (std::size_t i = 0; i < a.topo_.size(); ++i) {
    if (a.topo_[i].in_edges != b.topo_[i].in_edges) return false;
    if (a.topo_[i].out_edges != b.topo_[i].out_edges) return false;
    if (a.topo_[i].alpha != b.topo_[i].alpha) return false;
  }
  return true;
}

std::vector<EdgeId> ManhattanLayout::rightward_edges() const {
  std::vector<EdgeId> out;
  out.reserve(static_cast<std::size_t>(block_size()));
  for (EdgeId id = 1; id <= block_size(); ++id) out.push_back(id);
  return out;
}

std::vector<EdgeId> ManhattanLayout::leftward_edges() const {
  std::vector<EdgeId> out;
  out.reserve(static_cast<std::size_t>(block_size()));
  for (EdgeId id = block_size() + 1; id <= 2 * block_size(); ++id) out.push_back(id);
  return out;
}

VertexId ManhattanLayout::central_vertex() const {
  if (ell % 2 == 0) {
    throw ValidationError(ValidationCode::BadParameter,
                          "central junction needs an odd grid side");
  }
  int mid = (ell - 1) / 2;
  return vertex_id(mid, mid);
}

EdgeId ManhattanLayout::central_rightward_edge() const {
  if (ell % 2 == 1) {
    int mid = (ell - 1) / 2;
    return rightward_id(mid, mid);
  }
  // Even side: rightward edge whose midpoint is nearest the grid centroid,
  // lowest id on ties.
  double c = (ell - 1) / 2.0;
  EdgeId best = 1;
  double best_d = 1e300;
  for (int row = 0; row < ell; ++row) {
    for (int col = 0; col < ell - 1; ++col) {
      double dr = row - c;
      double dc = col + 0.5 - c;
      double d = dr * dr + dc * dc;
      if (d < best_d - 1e-12) {
        best_d = d;
        best = rightward_id(row, col);
      }
    }
  }
  return best;
}

}  // namespace lwrnet
