#include "lwrnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lwrnet {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

struct SnapshotRow {
  EdgeId edge = 0;
  int cell = 0;
  double x = 0.0;
  double rho = 0.0;
};

std::vector<SnapshotRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(ValidationCode::BadFile, "cannot read " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || split_line(line) != std::vector<std::string>{"edge_id", "cell_index", "x_center", "rho"}) {
    throw ValidationError(ValidationCode::BadFile, path.string() + ": bad snapshot header");
  }
  std::vector<SnapshotRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != 4) {
      throw ValidationError(ValidationCode::BadFile,
                            path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      rows.push_back({std::stoi(fields[0]), std::stoi(fields[1]), std::stod(fields[2]),
                      std::stod(fields[3])});
    } catch (const std::exception&) {
      throw ValidationError(ValidationCode::BadFile,
                            path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_snapshot_csv(const std::filesystem::path& path, const CellGrid& grid,
                        const std::vector<double>& rho) {
  if (static_cast<int>(rho.size()) != grid.total_cells()) {
    throw ValidationError(ValidationCode::GridMismatch, "density field does not match the grid");
  }
  std::ofstream out(path);
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write " + path.string());
  }
  out << "edge_id,cell_index,x_center,rho\n";
  const MetricNetwork& net = grid.network();
  for (int e = 0; e < net.edge_count(); ++e) {
    for (int j = 1; j <= grid.cells_on_edge(e); ++j) {
      out << net.edge_by_index(e).id << ',' << j << ',' << format_double(grid.cell_center(e, j))
          << ',' << format_double(rho[static_cast<std::size_t>(grid.global_index(e, j))]) << '\n';
    }
  }
}

std::vector<double> read_snapshot_csv(const std::filesystem::path& path, const CellGrid& grid) {
  auto rows = read_rows(path);
  if (static_cast<int>(rows.size()) != grid.total_cells()) {
    throw ValidationError(ValidationCode::GridMismatch,
                          path.string() + ": expected " + std::to_string(grid.total_cells()) +
                              " cells, found " + std::to_string(rows.size()));
  }
  const MetricNetwork& net = grid.network();
  std::vector<double> rho(rows.size());
  std::vector<char> seen(rows.size(), 0);
  for (const auto& row : rows) {
    int e = net.edge_index(row.edge);
    if (row.cell < 1 || row.cell > grid.cells_on_edge(e)) {
      throw ValidationError(ValidationCode::GridMismatch,
                            path.string() + ": cell " + std::to_string(row.cell) + " out of range on edge " +
                                std::to_string(row.edge));
    }
    if (std::abs(row.x - grid.cell_center(e, row.cell)) > 1e-9) {
      throw ValidationError(ValidationCode::GridMismatch,
                            path.string() + ": cell center mismatch on edge " + std::to_string(row.edge));
    }
    int g = grid.global_index(e, row.cell);
    if (seen[static_cast<std::size_t>(g)]) {
      throw ValidationError(ValidationCode::BadFile,
                            path.string() + ": duplicate cell on edge " + std::to_string(row.edge));
    }
    seen[static_cast<std::size_t>(g)] = 1;
    rho[static_cast<std::size_t>(g)] = row.rho;
  }
  return rho;
}

std::pair<CellGrid, std::vector<double>> read_snapshot_with_grid(
    const std::filesystem::path& path, std::shared_ptr<const MetricNetwork> net) {
  auto rows = read_rows(path);
  if (rows.empty()) {
    throw ValidationError(ValidationCode::BadFile, path.string() + ": empty snapshot");
  }
  std::map<EdgeId, int> counts;
  for (const auto& row : rows) counts[row.edge] = std::max(counts[row.edge], row.cell);
  // dx from any edge: L_e / J_e must agree across edges (uniform grids only).
  const EdgeDef& e0 = net->edge_by_index(net->edge_index(counts.begin()->first));
  double dx = e0.length / counts.begin()->second;
  CellGrid grid = CellGrid::discretize(std::move(net), dx);
  return {grid, read_snapshot_csv(path, grid)};
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write " + path.string());
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << header[i] << (i + 1 < header.size() ? ',' : '\n');
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i] << (i + 1 < row.size() ? ',' : '\n');
    }
  }
}

void write_plan_csv(const std::filesystem::path& path, const TransportPlan& plan) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write " + path.string());
  }
  out << "from,to,amount\n";
  for (const auto& s : plan.shipments) {
    out << s.from << ',' << s.to << ',' << format_double(s.amount) << '\n';
  }
  out << "objective," << format_double(plan.objective) << ",\n";
}

void write_cost_matrix_csv(const std::filesystem::path& path, const CostMatrix& cost, double dx) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write " + path.string());
  }
  out << "cells," << cost.size() << ",dx," << format_double(dx) << '\n';
  for (int j = 0; j < cost.size(); ++j) {
    for (int k = 0; k < cost.size(); ++k) {
      out << format_double(cost.at(j, k)) << (k + 1 < cost.size() ? ',' : '\n');
    }
  }
}

std::string snapshot_file_name(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "rho_t%g.csv", t);
  return buf;
}

}  // namespace lwrnet
