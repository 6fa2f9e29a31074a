#include "lwrnet/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lwrnet {

CellGrid CellGrid::discretize(std::shared_ptr<const MetricNetwork> net, double dx) {
  if (!net) {
    throw ValidationError(ValidationCode::BadParameter, "null network");
  }
  if (!(dx > 0.0)) {
    throw ValidationError(ValidationCode::BadParameter, "dx must be > 0");
  }
  CellGrid grid;
  grid.net_ = std::move(net);
  grid.dx_ = dx;
  grid.counts_.reserve(static_cast<std::size_t>(grid.net_->edge_count()));
  grid.offsets_.reserve(static_cast<std::size_t>(grid.net_->edge_count()));
  for (const auto& edge : grid.net_->edges()) {
    double ratio = edge.length / dx;
    double rounded = std::round(ratio);
    if (rounded < 0.5 || std::abs(ratio - rounded) > 1e-9 * ratio) {
      std::ostringstream os;
      os << "edge " << edge.id << ": length " << edge.length << " is not a multiple of dx " << dx;
      throw ValidationError(ValidationCode::NonDivisibleEdgeLength, os.str());
    }
    grid.offsets_.push_back(grid.total_);
    grid.counts_.push_back(static_cast<int>(rounded));
    grid.total_ += static_cast<int>(rounded);
  }
  return grid;
}

std::pair<int, int> CellGrid::locate(int global) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
  int e = static_cast<int>(it - offsets_.begin()) - 1;
  return {e, global - offsets_[static_cast<std::size_t>(e)] + 1};
}

bool CellGrid::geometry_equals(const CellGrid& other) const {
  if (dx_ != other.dx_ || total_ != other.total_ || counts_ != other.counts_) return false;
  if (net_->edge_count() != other.net_->edge_count()) return false;
  for (int e = 0; e < net_->edge_count(); ++e) {
    if (net_->edge_by_index(e).id != other.net_->edge_by_index(e).id) return false;
  }
  return true;
}

}  // namespace lwrnet
