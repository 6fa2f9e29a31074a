#pragma once

// Godunov time stepping of the LWR density on a discretized network.
// Interior cells of an edge advance with the standard three-point update;
// the first and last cell of every edge belong to a junction and advance
// through the localized per-path system: each junction tracks one
// sub-density per (incoming edge, outgoing edge) pair on both cells it owns,
// and cell totals are recovered by summing the sub-densities.
//
// Simulation requires every vertex to have at least one incoming and one
// outgoing edge, and every edge to carry at least two cells, so that each
// edge end has a junction owner and a neighbor to exchange flux with.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "lwrnet/fundamental_diagram.hpp"
#include "lwrnet/grid.hpp"

namespace lwrnet {

// Addressing of the flattened per-path arrays: the path (incoming slot r,
// outgoing slot s) of vertex v lives at path_offset(v) + r * n_out + s.
// Slots follow the ascending-edge-id order of VertexTopology.
class JunctionLayout {
 public:
  explicit JunctionLayout(const CellGrid& grid);

  int total_paths() const { return offsets_.back(); }
  int path_offset(int vertex_index) const { return offsets_[static_cast<std::size_t>(vertex_index)]; }
  int path_index(int vertex_index, int r, int s, int n_out) const {
    return path_offset(vertex_index) + r * n_out + s;
  }

 private:
  std::vector<int> offsets_;  // size V+1
};

// One time level of the solution: cell totals plus the junction sub-density
// pair for every local path. `sub_in` lives on the last cell of the path's
// incoming edge, `sub_out` on the first cell of its outgoing edge; both are
// indexed by JunctionLayout.
struct DensityField {
  std::vector<double> rho;
  std::vector<double> sub_in;
  std::vector<double> sub_out;
  double time = 0.0;
  std::int64_t step = 0;
};

// Sub-densities recovered from cell totals and the distribution matrices:
// toward the junction each path receives the matrix share of its cell total,
// away from it the total splits equally over the incoming edges.
DensityField init_subdensities(const std::vector<double>& rho0, const CellGrid& grid);
DensityField init_subdensities(const std::vector<double>& rho0, const CellGrid& grid,
                               const MetricNetwork& net);

struct Scenario {
  std::shared_ptr<const CellGrid> grid;
  FundamentalDiagram fd{0.5, 0.25};
  // Optional per-edge diagrams (by edge index); empty means `fd` everywhere.
  // Fluxes across a junction use the upstream edge's diagram.
  std::vector<FundamentalDiagram> per_edge_fd;
  // Total density per cell at t = 0. Ignored when `initial` is set.
  std::vector<double> rho0;
  std::optional<DensityField> initial;
  // Edges closed at their tail junction just after the initial time.
  std::vector<EdgeId> closures;
  double t_final = 0.0;
  double dt = 0.0;  // 0: derive from the CFL bound with dt_safety
  double dt_safety = 0.9;
};

struct Snapshot {
  double requested_time = 0.0;
  DensityField state;
};
using Trajectory = std::vector<Snapshot>;

class Simulator {
 public:
  // Validates the scenario, applies closures to the distribution matrices,
  // and prepares the initial field (from `initial` or `rho0`).
  explicit Simulator(const Scenario& scenario);

  const DensityField& state() const { return state_; }
  const CellGrid& grid() const { return *grid_; }
  // Network actually driving the dynamics (closures applied).
  const MetricNetwork& effective_network() const { return *net_; }
  const JunctionLayout& layout() const { return layout_; }
  double dt() const { return dt_; }

  void advance();                       // one time step
  void advance_to_step(std::int64_t n);

  // Step index holding the state at the largest step time <= t.
  std::int64_t step_for_time(double t) const;

 private:
  void validate_field(const DensityField& f) const;

  std::shared_ptr<const CellGrid> grid_;
  std::shared_ptr<const MetricNetwork> net_;  // with closures applied
  std::vector<FundamentalDiagram> edge_fd_;   // always one per edge
  JunctionLayout layout_;
  double dt_ = 0.0;
  DensityField state_;
  DensityField next_;
  // Per-junction scratch, sized to the largest degree.
  std::vector<double> in_flux_, rho_last_, out_flux_, rho_first_;
  std::vector<int> last_cell_, first_cell_;
};

// One Godunov step of `state` under `scenario` (convenience wrapper that
// builds a Simulator; use Simulator directly for time loops).
DensityField step(const DensityField& state, const Scenario& scenario);

// Run from t = 0 to t_final and capture the state at the nearest step time
// at or before each requested time. Deterministic.
Trajectory simulate(const Scenario& scenario, const std::vector<double>& snapshot_times);

double total_mass(const std::vector<double>& rho, double dx);

}  // namespace lwrnet
