#pragma once

// Exact solver for the balanced transportation problem over cell-graph
// costs, and the normalized transport distance between two density fields on
// the same grid. The solver is a primal transportation simplex on the
// positive-mass supports; every returned plan is checked for feasibility and
// dual optimality before it leaves this module.

#include <utility>
#include <vector>

#include "lwrnet/cell_graph.hpp"

namespace lwrnet {

struct TransportPlan {
  struct Shipment {
    int from = 0;
    int to = 0;
    double amount = 0.0;
  };
  std::vector<Shipment> shipments;  // positive amounts only
  double objective = 0.0;           // total cost, mass x distance
};

// Strips the overlap min(s_j, d_j) from both vectors. Leaves disjoint
// supports and preserves the transport optimum, since staying put is free
// and the costs form a metric. Requires balanced totals (1e-9 relative).
std::pair<std::vector<double>, std::vector<double>> cancel_common_mass(
    const std::vector<double>& supply, const std::vector<double>& demand);

// Optimal basic solution of: minimize sum c_jk x_jk over x >= 0 with row
// sums = supply and column sums = demand. Totals must balance within 1e-9
// relative. The objective is deterministic; the plan is any optimal basis.
TransportPlan solve_transport(const CostMatrix& cost, const std::vector<double>& supply,
                              const std::vector<double>& demand);

struct DistanceOptions {
  bool normalized = true;    // divide the objective by the total mass
  bool renormalize = false;  // scale the demand field to the supply mass
};

// Transport distance between two densities on the grid underlying `cost`:
// masses are rho * dx per cell, common mass is cancelled, and the remainder
// is shipped optimally. Returns the objective, divided by the total mass
// when `normalized` is set. Two all-zero fields have distance 0.
double wasserstein_grid(const std::vector<double>& rho_s, const std::vector<double>& rho_d,
                        const CostMatrix& cost, double dx, const DistanceOptions& options = {});

// Plan variant of wasserstein_grid (unnormalized objective).
TransportPlan transport_between(const std::vector<double>& rho_s, const std::vector<double>& rho_d,
                                const CostMatrix& cost, double dx,
                                const DistanceOptions& options = {});

}  // namespace lwrnet
