#include "lwrnet/cell_graph.hpp"

#include <limits>
#include <queue>
#include <string>

#include "lwrnet/parallel.hpp"

namespace lwrnet {

CellGraph::CellGraph(const CellGrid& grid) {
  const MetricNetwork& net = grid.network();
  cells_ = grid.total_cells();
  dx_ = grid.dx();
  adj_.resize(static_cast<std::size_t>(cells_ + net.vertex_count()));

  const double half = dx_ / 2.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const int first = grid.first_cell(e);
    const int count = grid.cells_on_edge(e);
    for (int j = 0; j + 1 < count; ++j) {
      adj_[static_cast<std::size_t>(first + j)].push_back({first + j + 1, dx_});
      adj_[static_cast<std::size_t>(first + j + 1)].push_back({first + j, dx_});
    }
  }
  for (int vi = 0; vi < net.vertex_count(); ++vi) {
    const VertexTopology& v = net.vertex_by_index(vi);
    const int connector = cells_ + vi;
    auto tie = [&](int cell) {
      adj_[static_cast<std::size_t>(connector)].push_back({cell, half});
      adj_[static_cast<std::size_t>(cell)].push_back({connector, half});
    };
    for (int e : v.in_edges) tie(grid.last_cell(e));
    for (int e : v.out_edges) tie(grid.first_cell(e));
  }
}

std::vector<double> shortest_paths(const CellGraph& graph, int source_cell) {
  const int n = graph.node_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(source_cell)] = 0.0;
  heap.push({0.0, source_cell});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& link : graph.links(u)) {
      double nd = d + link.weight;
      if (nd < dist[static_cast<std::size_t>(link.to)]) {
        dist[static_cast<std::size_t>(link.to)] = nd;
        heap.push({nd, link.to});
      }
    }
  }
  dist.resize(static_cast<std::size_t>(graph.cell_count()));
  for (double d : dist) {
    if (d == kInf) {
      throw InternalError("cell graph is not connected");
    }
  }
  return dist;
}

double CostMatrix::max_entry() const {
  double m = 0.0;
  for (double d : data_) m = d > m ? d : m;
  return m;
}

CostMatrix cost_matrix(const CellGraph& graph, const CostMatrixOptions& options) {
  const int n = graph.cell_count();
  if (n > options.max_cells) {
    throw ValidationError(ValidationCode::SizeGuard,
                          "cost matrix for " + std::to_string(n) + " cells exceeds the cap of " +
                              std::to_string(options.max_cells) +
                              " (raise max_cells if this is intended)");
  }
  std::vector<double> data(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), options.workers, [&](std::size_t j) {
    std::vector<double> row = shortest_paths(graph, static_cast<int>(j));
    // Keep the upper triangle of this row and mirror it, so the matrix is
    // bitwise symmetric no matter how ties were broken per source.
    for (std::size_t k = j; k < static_cast<std::size_t>(n); ++k) {
      double d = row[k];
      data[j * static_cast<std::size_t>(n) + k] = d;
      data[k * static_cast<std::size_t>(n) + j] = d;
    }
  });
  for (int j = 0; j < n; ++j) {
    data[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = 0.0;
  }
  return CostMatrix(n, std::move(data));
}

}  // namespace lwrnet
