#pragma once

// Uniform discretization of a metric network: every edge is split into
// J_e = L_e / dx cells of equal width. Cells are indexed globally, edges in
// ascending id order and cells in increasing position along the edge.

#include <memory>
#include <utility>
#include <vector>

#include "lwrnet/network.hpp"

namespace lwrnet {

class CellGrid {
 public:
  // Requires every edge length to be an integer multiple of dx (relative
  // tolerance 1e-9 on L_e/dx).
  static CellGrid discretize(std::shared_ptr<const MetricNetwork> net, double dx);

  const MetricNetwork& network() const { return *net_; }
  std::shared_ptr<const MetricNetwork> network_ptr() const { return net_; }

  double dx() const { return dx_; }
  int total_cells() const { return total_; }                                // J
  int cells_on_edge(int edge_index) const { return counts_[static_cast<std::size_t>(edge_index)]; }  // J_e

  // Global 0-based cell id of cell j (1-based, j in 1..J_e) on an edge.
  int global_index(int edge_index, int j) const {
    return offsets_[static_cast<std::size_t>(edge_index)] + (j - 1);
  }
  int first_cell(int edge_index) const { return offsets_[static_cast<std::size_t>(edge_index)]; }
  int last_cell(int edge_index) const {
    return offsets_[static_cast<std::size_t>(edge_index)] + counts_[static_cast<std::size_t>(edge_index)] - 1;
  }

  // Coordinate of the cell center along its edge: (j - 1/2) dx.
  double cell_center(int /*edge_index*/, int j) const { return (j - 0.5) * dx_; }

  // Inverse of global_index: (edge_index, j).
  std::pair<int, int> locate(int global) const;

  // Same edge ids, same cell counts, same dx: densities are comparable.
  bool geometry_equals(const CellGrid& other) const;

 private:
  CellGrid() = default;

  std::shared_ptr<const MetricNetwork> net_;
  double dx_ = 0.0;
  int total_ = 0;
  std::vector<int> counts_;   // per edge index
  std::vector<int> offsets_;  // per edge index, prefix sums
};

}  // namespace lwrnet
