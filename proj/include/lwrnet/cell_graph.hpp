#pragma once

// Undirected graph on the cell centers of a discretized network, used to
// price mass transport. Consecutive cells of an edge are dx apart; every
// junction is a zero-extent connector sitting dx/2 from each adjacent cell
// (the last cell of each incoming edge, the first cell of each outgoing
// edge), so crossing a junction between adjacent cells costs exactly dx.
// Edge directions are discarded.

#include <span>
#include <vector>

#include "lwrnet/grid.hpp"

namespace lwrnet {

class CellGraph {
 public:
  explicit CellGraph(const CellGrid& grid);

  int cell_count() const { return cells_; }               // J
  int node_count() const { return static_cast<int>(adj_.size()); }  // J + junction connectors
  double dx() const { return dx_; }

  struct Link {
    int to;
    double weight;
  };
  std::span<const Link> links(int node) const { return adj_[static_cast<std::size_t>(node)]; }

 private:
  int cells_ = 0;
  double dx_ = 0.0;
  std::vector<std::vector<Link>> adj_;
};

// Exact single-source distances from a cell to every cell. Junction
// connector nodes are traversed but not reported.
std::vector<double> shortest_paths(const CellGraph& graph, int source_cell);

// Dense symmetric matrix of shortest-path distances between cell centers.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int n, std::vector<double> data) : n_(n), data_(std::move(data)) {}

  int size() const { return n_; }
  double at(int j, int k) const {
    return data_[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(k)];
  }
  std::span<const double> row(int j) const {
    return {data_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n_),
            static_cast<std::size_t>(n_)};
  }
  double max_entry() const;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

struct CostMatrixOptions {
  // Refuse to build matrices beyond this many cells (dense J x J storage).
  int max_cells = 5000;
  // Worker threads for the per-source runs; 0 picks the hardware count.
  int workers = 0;
};

// All-pairs matrix from per-source shortest paths. Symmetry and a zero
// diagonal hold bitwise: the upper triangle is computed and mirrored.
CostMatrix cost_matrix(const CellGraph& graph, const CostMatrixOptions& options = {});

}  // namespace lwrnet
