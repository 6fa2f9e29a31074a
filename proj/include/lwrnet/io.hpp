#pragma once

// Tabular outputs: density snapshots (edge_id, cell_index, x_center, rho),
// result series, transport plan dumps and run manifests. All writers format
// numbers deterministically, so identical inputs give identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "lwrnet/grid.hpp"
#include "lwrnet/transport.hpp"

namespace lwrnet {

std::string format_double(double v);

void write_snapshot_csv(const std::filesystem::path& path, const CellGrid& grid,
                        const std::vector<double>& rho);

// Reads a snapshot back onto the given grid, checking edge ids, cell counts
// and center coordinates against it.
std::vector<double> read_snapshot_csv(const std::filesystem::path& path, const CellGrid& grid);

// Rebuilds the grid implied by a snapshot (per-edge cell counts and dx) over
// the given network, then reads the densities onto it.
std::pair<CellGrid, std::vector<double>> read_snapshot_with_grid(
    const std::filesystem::path& path, std::shared_ptr<const MetricNetwork> net);

// Generic CSV with a header row; every cell is preformatted text.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_plan_csv(const std::filesystem::path& path, const TransportPlan& plan);

// Debugging dump of a cost matrix: a header line with the cell count and
// spacing, then the rows.
void write_cost_matrix_csv(const std::filesystem::path& path, const CostMatrix& cost, double dx);

// File name for a snapshot requested at time t: rho_t<time>.csv.
std::string snapshot_file_name(double t);

}  // namespace lwrnet
