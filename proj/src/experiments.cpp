#include "lwrnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>

#include <json.hpp>

#include "lwrnet/io.hpp"
#include "lwrnet/parallel.hpp"
#include "lwrnet/svg_chart.hpp"
#include "lwrnet/version.hpp"

namespace lwrnet {

namespace {

using nlohmann::json;

struct KindName {
  ExperimentKind kind;
  const char* name;
};
constexpr KindName kKindNames[] = {
    {ExperimentKind::InitialData, "initial_data"},
    {ExperimentKind::FundamentalDiagram, "fundamental_diagram"},
    {ExperimentKind::JunctionSingle, "junction_single"},
    {ExperimentKind::JunctionAll, "junction_all"},
    {ExperimentKind::RoadClosure, "road_closure"},
    {ExperimentKind::Convergence1d, "convergence_1d"},
    {ExperimentKind::ConvergenceGrid, "convergence_grid"},
};

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ValidationError(ValidationCode::UnknownKey, "\"" + it.key() + "\" in " + where);
    }
  }
}

std::shared_ptr<const CellGrid> manhattan_grid(int ell, double edge_length, int cells_per_edge) {
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(ell, edge_length));
  return std::make_shared<const CellGrid>(
      CellGrid::discretize(net, edge_length / static_cast<double>(cells_per_edge)));
}

Scenario base_scenario(std::shared_ptr<const CellGrid> grid, const ExperimentConfig& c) {
  Scenario s;
  s.grid = std::move(grid);
  s.fd = FundamentalDiagram(c.sigma_s, c.fmax_s);
  s.dt_safety = c.dt_safety;
  s.t_final = c.t_final;
  return s;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  throw ValidationError(ValidationCode::BadConfig, "unknown experiment kind \"" + name + "\"");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(ValidationCode::BadFile, std::string("experiment config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError(ValidationCode::BadConfig, "experiment config must be an object");
  }
  reject_unknown_keys(doc,
                      {"kind", "ells", "cells_per_edge", "edge_length", "sigma_s", "fmax_s",
                       "sigma_d", "fmax_d", "eps", "T", "sample_count", "dt_safety",
                       "sigma_d_values", "fmax_d_values", "je_values", "dx_values", "workers",
                       "charts", "out"},
                      "experiment config");
  ExperimentConfig c;
  try {
    if (doc.contains("kind")) c.kind = experiment_kind_from_string(doc["kind"].get<std::string>());
    if (doc.contains("ells")) doc["ells"].get_to(c.ells);
    if (doc.contains("cells_per_edge")) doc["cells_per_edge"].get_to(c.cells_per_edge);
    if (doc.contains("edge_length")) doc["edge_length"].get_to(c.edge_length);
    if (doc.contains("sigma_s")) doc["sigma_s"].get_to(c.sigma_s);
    if (doc.contains("fmax_s")) doc["fmax_s"].get_to(c.fmax_s);
    if (doc.contains("sigma_d")) doc["sigma_d"].get_to(c.sigma_d);
    if (doc.contains("fmax_d")) doc["fmax_d"].get_to(c.fmax_d);
    if (doc.contains("eps")) doc["eps"].get_to(c.eps);
    if (doc.contains("T")) doc["T"].get_to(c.t_final);
    if (doc.contains("sample_count")) doc["sample_count"].get_to(c.sample_count);
    if (doc.contains("dt_safety")) doc["dt_safety"].get_to(c.dt_safety);
    if (doc.contains("sigma_d_values")) doc["sigma_d_values"].get_to(c.sigma_d_values);
    if (doc.contains("fmax_d_values")) doc["fmax_d_values"].get_to(c.fmax_d_values);
    if (doc.contains("je_values")) doc["je_values"].get_to(c.je_values);
    if (doc.contains("dx_values")) doc["dx_values"].get_to(c.dx_values);
    if (doc.contains("workers")) doc["workers"].get_to(c.workers);
    if (doc.contains("charts")) doc["charts"].get_to(c.charts);
    if (doc.contains("out")) c.out = doc["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(ValidationCode::BadConfig, std::string("experiment config: ") + e.what());
  }
  return c;
}

std::string ExperimentConfig::to_json() const {
  json doc;
  doc["kind"] = to_string(kind);
  doc["ells"] = ells;
  doc["cells_per_edge"] = cells_per_edge;
  doc["edge_length"] = edge_length;
  doc["sigma_s"] = sigma_s;
  doc["fmax_s"] = fmax_s;
  doc["sigma_d"] = sigma_d;
  doc["fmax_d"] = fmax_d;
  doc["eps"] = eps;
  doc["T"] = t_final;
  doc["sample_count"] = sample_count;
  doc["dt_safety"] = dt_safety;
  doc["sigma_d_values"] = sigma_d_values;
  doc["fmax_d_values"] = fmax_d_values;
  doc["je_values"] = je_values;
  doc["dx_values"] = dx_values;
  doc["workers"] = workers;
  doc["charts"] = charts;
  doc["out"] = out.string();
  return doc.dump(2) + "\n";
}

void ExperimentConfig::resolve_defaults() {
  if (ells.empty()) {
    switch (kind) {
      case ExperimentKind::InitialData: ells = {3, 5}; break;
      case ExperimentKind::FundamentalDiagram: ells = {5}; break;
      case ExperimentKind::JunctionSingle: ells = {3, 5, 7}; break;
      case ExperimentKind::JunctionAll: ells = {3, 5, 7}; break;
      case ExperimentKind::RoadClosure: ells = {5, 7}; break;
      case ExperimentKind::ConvergenceGrid: ells = {3}; break;
      case ExperimentKind::Convergence1d: break;
    }
  }
  if (t_final < 0.0) {
    switch (kind) {
      case ExperimentKind::InitialData: t_final = 20.0; break;
      case ExperimentKind::FundamentalDiagram: t_final = 20.0; break;
      case ExperimentKind::JunctionSingle: t_final = 55.0; break;
      case ExperimentKind::JunctionAll: t_final = 55.0; break;
      case ExperimentKind::RoadClosure: t_final = 55.0; break;
      case ExperimentKind::ConvergenceGrid: t_final = 1.4; break;
      case ExperimentKind::Convergence1d: t_final = 0.0; break;
    }
  }
  if (sigma_d < 0.0) sigma_d = kind == ExperimentKind::FundamentalDiagram ? 0.2 : sigma_s;
  if (fmax_d < 0.0) fmax_d = kind == ExperimentKind::FundamentalDiagram ? 0.3 : fmax_s;
  if (sigma_d_values.empty()) sigma_d_values = {0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  if (fmax_d_values.empty()) fmax_d_values = {0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
  if (je_values.empty()) je_values = {10, 20, 40, 80};
  if (dx_values.empty()) dx_values = {0.2, 0.1, 0.05, 0.025};
}

void ExperimentConfig::validate() const {
  if (cells_per_edge < 2) {
    throw ValidationError(ValidationCode::BadConfig, "cells_per_edge must be >= 2");
  }
  if (!(edge_length > 0.0)) {
    throw ValidationError(ValidationCode::BadConfig, "edge_length must be > 0");
  }
  if (sample_count < 1) {
    throw ValidationError(ValidationCode::BadConfig, "sample_count must be >= 1");
  }
  if (!(dt_safety > 0.0) || dt_safety > 1.0) {
    throw ValidationError(ValidationCode::BadConfig, "dt_safety must lie in (0,1]");
  }
  if (!(t_final >= 0.0)) {
    throw ValidationError(ValidationCode::BadConfig, "T must be >= 0");
  }
  auto require_valid_diagram = [](double sigma, double fmax) {
    FundamentalDiagram fd(sigma, fmax);
    (void)fd;
  };
  require_valid_diagram(sigma_s, fmax_s);
  require_valid_diagram(sigma_d, fmax_d);
  if (kind != ExperimentKind::Convergence1d && ells.empty()) {
    throw ValidationError(ValidationCode::BadConfig, "no grid sides given");
  }
  for (int ell : ells) {
    if (ell < 2) {
      throw ValidationError(ValidationCode::BadConfig, "grid side must be >= 2");
    }
  }
  switch (kind) {
    case ExperimentKind::InitialData:
    case ExperimentKind::ConvergenceGrid: {
      if (cells_per_edge % 2 != 0) {
        throw ValidationError(ValidationCode::BadConfig,
                              "half-road initial data needs an even cells_per_edge");
      }
      for (int je : je_values) {
        if (je < 2 || je % 2 != 0) {
          throw ValidationError(ValidationCode::BadConfig, "je_values must be even and >= 2");
        }
      }
      break;
    }
    case ExperimentKind::JunctionSingle: {
      for (int ell : ells) {
        if (ell % 2 == 0) {
          throw ValidationError(ValidationCode::BadConfig,
                                "the single-junction study needs odd grid sides");
        }
      }
      if (eps < 0.0 || eps > 0.25) {
        throw ValidationError(ValidationCode::BadConfig,
                              "eps must lie in [0, 1/4] to keep the matrix rows valid");
      }
      break;
    }
    case ExperimentKind::JunctionAll: {
      bool has_interior = std::any_of(ells.begin(), ells.end(), [](int e) { return e >= 3; });
      double cap = has_interior ? 0.25 : 0.5;
      if (eps < 0.0 || eps > cap) {
        throw ValidationError(ValidationCode::BadConfig,
                              "eps must keep every matrix coefficient in [0,1]");
      }
      break;
    }
    case ExperimentKind::Convergence1d: {
      for (double dx : dx_values) {
        double ratio = 4.0 / dx;
        if (!(dx > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
          throw ValidationError(ValidationCode::BadConfig,
                                "dx_values must divide the interval length 4");
        }
      }
      break;
    }
    case ExperimentKind::FundamentalDiagram: {
      for (double s : sigma_d_values) require_valid_diagram(s, fmax_s);
      for (double f : fmax_d_values) require_valid_diagram(sigma_s, f);
      break;
    }
    case ExperimentKind::RoadClosure:
      break;
  }
}

std::vector<double> uniform_density(const CellGrid& grid, double value) {
  return std::vector<double>(static_cast<std::size_t>(grid.total_cells()), value);
}

std::vector<double> density_on_edges(const CellGrid& grid, const std::vector<EdgeId>& edges,
                                     double value, bool first_half_only) {
  std::vector<double> rho(static_cast<std::size_t>(grid.total_cells()), 0.0);
  const MetricNetwork& net = grid.network();
  for (EdgeId id : edges) {
    int e = net.edge_index(id);
    int count = grid.cells_on_edge(e);
    int upto = count;
    if (first_half_only) {
      if (count % 2 != 0) {
        throw ValidationError(ValidationCode::BadParameter,
                              "half-road data needs an even number of cells per edge");
      }
      upto = count / 2;
    }
    for (int j = 1; j <= upto; ++j) {
      rho[static_cast<std::size_t>(grid.global_index(e, j))] = value;
    }
  }
  return rho;
}

MetricNetwork perturb_junction(const MetricNetwork& net, VertexId vertex, double eps, int sign) {
  const VertexTopology& v = net.vertex_by_index(net.vertex_index(vertex));
  const int n_in = v.n_in();
  const int n_out = v.n_out();
  if (n_in == 0 || n_out == 0) {
    throw ValidationError(ValidationCode::BadParameter,
                          "vertex " + std::to_string(vertex) + " has no junction matrix");
  }
  const int perturbed_rows = (n_in >= 4) ? n_in : std::min(n_in, 2);
  std::vector<double> alpha = v.alpha;
  for (int r = 0; r < perturbed_rows; ++r) {
    double sum = 0.0;
    for (int s = 0; s < n_out; ++s) {
      double value = 1.0 / static_cast<double>(n_out) +
                     (s % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(sign) * eps;
      if (value < 0.0 || value > 1.0) {
        throw ValidationError(ValidationCode::NegativeCoefficient,
                              "eps " + std::to_string(eps) + " leaves vertex " +
                                  std::to_string(vertex) + " without a valid matrix row");
      }
      alpha[static_cast<std::size_t>(r) * n_out + s] = value;
      sum += value;
    }
    // Truncated patterns do not balance; scale the row back onto the simplex.
    if (std::abs(sum - 1.0) > 1e-12) {
      for (int s = 0; s < n_out; ++s) {
        alpha[static_cast<std::size_t>(r) * n_out + s] /= sum;
      }
    }
  }
  return net.with_distribution(vertex, std::move(alpha));
}

MetricNetwork perturb_single_junction(const MetricNetwork& net, int ell, double eps) {
  ManhattanLayout m(ell);
  return perturb_junction(net, m.central_vertex(), eps, 1);
}

MetricNetwork perturb_all_junctions(const MetricNetwork& net, int ell, double eps) {
  ManhattanLayout m(ell);
  MetricNetwork out = net;
  for (VertexId v = 1; v <= m.vertex_count(); ++v) {
    out = perturb_junction(out, v, eps, v % 2 == 1 ? 1 : -1);
  }
  return out;
}

double scenario_cfl_dt(const Scenario& scenario) {
  if (!scenario.grid) {
    throw ValidationError(ValidationCode::BadParameter, "scenario without a grid");
  }
  if (!(scenario.dt_safety > 0.0) || scenario.dt_safety > 1.0) {
    throw ValidationError(ValidationCode::BadParameter, "CFL safety factor must lie in (0,1]");
  }
  double max_speed = scenario.per_edge_fd.empty() ? scenario.fd.max_wave_speed() : 0.0;
  for (const auto& fd : scenario.per_edge_fd) {
    max_speed = std::max(max_speed, fd.max_wave_speed());
  }
  return scenario.dt_safety * scenario.grid->dx() / max_speed;
}

std::vector<double> sample_times(double t_final, int count) {
  if (count < 1) {
    throw ValidationError(ValidationCode::BadParameter, "need at least one sample");
  }
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    times.push_back(t_final);
    return times;
  }
  for (int i = 0; i < count; ++i) {
    times.push_back(t_final * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return times;
}

std::vector<SeriesRow> distance_series(const Scenario& supply, const Scenario& demand,
                                       const std::vector<double>& times, const CostMatrix& cost) {
  FinalDensities ignored;
  return distance_series(supply, demand, times, cost, ignored);
}

std::vector<SeriesRow> distance_series(const Scenario& supply, const Scenario& demand,
                                       const std::vector<double>& times, const CostMatrix& cost,
                                       FinalDensities& finals) {
  if (!supply.grid || !demand.grid) {
    throw ValidationError(ValidationCode::BadParameter, "scenario without a grid");
  }
  if (!supply.grid->geometry_equals(*demand.grid)) {
    throw ValidationError(ValidationCode::GridMismatch,
                          "scenarios live on different discretizations");
  }
  if (cost.size() != supply.grid->total_cells()) {
    throw ValidationError(ValidationCode::GridMismatch, "cost matrix does not match the grid");
  }
  if (supply.t_final != demand.t_final) {
    throw ValidationError(ValidationCode::BadParameter, "scenarios disagree on t_final");
  }

  // One shared step size for both runs, dividing t_final exactly, so every
  // comparison happens at a common instant.
  const double t_final = supply.t_final;
  double dt = std::min(scenario_cfl_dt(supply), scenario_cfl_dt(demand));
  std::int64_t n_steps = 0;
  if (t_final > 0.0) {
    n_steps = static_cast<std::int64_t>(std::ceil(t_final / dt - 1e-9));
    dt = t_final / static_cast<double>(n_steps);
  }
  Scenario s = supply;
  Scenario d = demand;
  s.dt = dt;
  d.dt = dt;
  Simulator sim_s(s);
  Simulator sim_d(d);

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  const double dx = supply.grid->dx();
  std::vector<SeriesRow> rows(times.size());
  for (std::size_t idx : order) {
    std::int64_t n = std::min(sim_s.step_for_time(times[idx]), n_steps);
    sim_s.advance_to_step(n);
    sim_d.advance_to_step(n);
    SeriesRow row;
    row.t = sim_s.state().time;
    row.h_hat = wasserstein_grid(sim_s.state().rho, sim_d.state().rho, cost, dx);
    row.l1_hat = l1_discrete(sim_s.state().rho, sim_d.state().rho, dx);
    rows[idx] = row;
  }
  sim_s.advance_to_step(n_steps);
  sim_d.advance_to_step(n_steps);
  finals.supply = sim_s.state().rho;
  finals.demand = sim_d.state().rho;
  finals.t = sim_s.state().time;
  return rows;
}

LineDensity quartic_line_density() {
  return LineDensity::from_function(-2.0, 2.0, [](double x) {
    double q = x * x - 1.0;
    return q * q;
  });
}

LineDensity constant_line_density() {
  return LineDensity::from_function(-2.0, 2.0, [](double) { return 23.0 / 15.0; });
}

namespace {
double quartic_antiderivative(double x) {
  return x * x * x * x * x / 5.0 - 2.0 * x * x * x / 3.0 + x;
}
}  // namespace

std::pair<std::vector<double>, std::vector<double>> quartic_pair_cell_masses(int cells) {
  if (cells < 1) {
    throw ValidationError(ValidationCode::BadParameter, "need at least one cell");
  }
  std::vector<double> supply(static_cast<std::size_t>(cells));
  std::vector<double> demand(static_cast<std::size_t>(cells));
  const double step = 4.0 / static_cast<double>(cells);
  for (int k = 0; k < cells; ++k) {
    double lo = -2.0 + step * static_cast<double>(k);
    double hi = -2.0 + step * static_cast<double>(k + 1);
    supply[static_cast<std::size_t>(k)] = quartic_antiderivative(hi) - quartic_antiderivative(lo);
    demand[static_cast<std::size_t>(k)] = 23.0 / 15.0 * step;
  }
  return {std::move(supply), std::move(demand)};
}

double quartic_transport_value(double dx) {
  double ratio = 4.0 / dx;
  int cells = static_cast<int>(std::round(ratio));
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ValidationError(ValidationCode::BadParameter, "dx must divide the interval length 4");
  }
  NetworkSpec spec;
  spec.vertices = {1, 2};
  spec.edges = {{1, 1, 2, 4.0}};
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::build(spec));
  CellGrid grid = CellGrid::discretize(net, 4.0 / static_cast<double>(cells));
  CellGraph graph(grid);
  CostMatrix cost = cost_matrix(graph, {.max_cells = 5000, .workers = 1});
  auto [supply, demand] = quartic_pair_cell_masses(cells);
  auto [s, d] = cancel_common_mass(supply, demand);
  return solve_transport(cost, s, d).objective;
}

InitialDataResult run_initial_data(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  InitialDataResult out;
  out.per_ell.resize(c.ells.size());
  parallel_for(c.ells.size(), c.workers, [&](std::size_t i) {
    const int ell = c.ells[i];
    auto grid = manhattan_grid(ell, c.edge_length, c.cells_per_edge);
    CostMatrix cost = cost_matrix(CellGraph(*grid), {.max_cells = 5000, .workers = 1});
    ManhattanLayout m(ell);
    Scenario s = base_scenario(grid, c);
    Scenario d = s;
    s.rho0 = density_on_edges(*grid, m.rightward_edges(), 0.5, true);
    d.rho0 = density_on_edges(*grid, m.leftward_edges(), 0.5, true);
    TimeSeries ts;
    ts.ell = ell;
    ts.grid = grid;
    ts.rows = distance_series(s, d, sample_times(c.t_final, c.sample_count), cost, ts.finals);
    out.per_ell[i] = std::move(ts);
  });
  return out;
}

FundamentalDiagramResult run_fundamental_diagram(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  FundamentalDiagramResult out;
  for (int ell : c.ells) {
    auto grid = manhattan_grid(ell, c.edge_length, c.cells_per_edge);
    CostMatrix cost = cost_matrix(CellGraph(*grid), {.max_cells = 5000, .workers = c.workers});
    ManhattanLayout m(ell);
    std::vector<double> rho0 = density_on_edges(*grid, m.rightward_edges(), 0.5, false);

    auto demand_run = [&](const FundamentalDiagram& fd_d, const std::vector<double>& times,
                          FinalDensities* finals) {
      Scenario s = base_scenario(grid, c);
      s.rho0 = rho0;
      Scenario d = s;
      d.fd = fd_d;
      FinalDensities local;
      return distance_series(s, d, times, cost, finals ? *finals : local);
    };

    std::vector<double> at_t_final{c.t_final};
    std::vector<SweepPoint> sigma_points(c.sigma_d_values.size());
    parallel_for(c.sigma_d_values.size(), c.workers, [&](std::size_t i) {
      double value = c.sigma_d_values[i];
      auto rows = demand_run(FundamentalDiagram(value, c.fmax_s), at_t_final, nullptr);
      sigma_points[i] = {ell, value, rows.back().h_hat};
    });
    std::vector<SweepPoint> fmax_points(c.fmax_d_values.size());
    parallel_for(c.fmax_d_values.size(), c.workers, [&](std::size_t i) {
      double value = c.fmax_d_values[i];
      auto rows = demand_run(FundamentalDiagram(c.sigma_s, value), at_t_final, nullptr);
      fmax_points[i] = {ell, value, rows.back().h_hat};
    });
    out.sigma_sweep.insert(out.sigma_sweep.end(), sigma_points.begin(), sigma_points.end());
    out.fmax_sweep.insert(out.fmax_sweep.end(), fmax_points.begin(), fmax_points.end());

    std::vector<double> times = sample_times(c.t_final, c.sample_count);
    TimeSeries sigma_ts;
    sigma_ts.ell = ell;
    sigma_ts.grid = grid;
    sigma_ts.rows = demand_run(FundamentalDiagram(c.sigma_d, c.fmax_s), times, &sigma_ts.finals);
    out.sigma_series.push_back(std::move(sigma_ts));
    TimeSeries fmax_ts;
    fmax_ts.ell = ell;
    fmax_ts.grid = grid;
    fmax_ts.rows = demand_run(FundamentalDiagram(c.sigma_s, c.fmax_d), times, &fmax_ts.finals);
    out.fmax_series.push_back(std::move(fmax_ts));
  }
  return out;
}

JunctionResult run_junction(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  if (c.kind != ExperimentKind::JunctionSingle && c.kind != ExperimentKind::JunctionAll) {
    throw ValidationError(ValidationCode::BadConfig, "not a junction study config");
  }
  JunctionResult out;
  out.per_ell.resize(c.ells.size());
  parallel_for(c.ells.size(), c.workers, [&](std::size_t i) {
    const int ell = c.ells[i];
    auto grid = manhattan_grid(ell, c.edge_length, c.cells_per_edge);
    CostMatrix cost = cost_matrix(CellGraph(*grid), {.max_cells = 5000, .workers = 1});
    MetricNetwork perturbed = c.kind == ExperimentKind::JunctionSingle
                                  ? perturb_single_junction(grid->network(), ell, c.eps)
                                  : perturb_all_junctions(grid->network(), ell, c.eps);
    auto demand_net = std::make_shared<const MetricNetwork>(std::move(perturbed));
    auto demand_grid = std::make_shared<const CellGrid>(CellGrid::discretize(demand_net, grid->dx()));

    Scenario s = base_scenario(grid, c);
    s.rho0 = uniform_density(*grid, 0.5);
    Scenario d = base_scenario(demand_grid, c);
    d.rho0 = s.rho0;
    TimeSeries ts;
    ts.ell = ell;
    ts.grid = grid;
    ts.rows = distance_series(s, d, sample_times(c.t_final, c.sample_count), cost, ts.finals);
    out.per_ell[i] = std::move(ts);
  });
  return out;
}

JunctionResult run_road_closure(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  JunctionResult out;
  out.per_ell.resize(c.ells.size());
  parallel_for(c.ells.size(), c.workers, [&](std::size_t i) {
    const int ell = c.ells[i];
    auto grid = manhattan_grid(ell, c.edge_length, c.cells_per_edge);
    CostMatrix cost = cost_matrix(CellGraph(*grid), {.max_cells = 5000, .workers = 1});
    ManhattanLayout m(ell);
    Scenario s = base_scenario(grid, c);
    s.rho0 = uniform_density(*grid, 0.3);
    Scenario d = s;
    d.closures = {m.central_rightward_edge()};
    TimeSeries ts;
    ts.ell = ell;
    ts.grid = grid;
    ts.rows = distance_series(s, d, sample_times(c.t_final, c.sample_count), cost, ts.finals);
    out.per_ell[i] = std::move(ts);
  });
  return out;
}

ConvergenceGridResult run_convergence_grid(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  const int ell = c.ells.front();
  ConvergenceGridResult out;
  out.je_to_h.resize(c.je_values.size());
  parallel_for(c.je_values.size(), c.workers, [&](std::size_t i) {
    const int je = c.je_values[i];
    auto grid = manhattan_grid(ell, c.edge_length, je);
    CostMatrix cost = cost_matrix(CellGraph(*grid), {.max_cells = 5000, .workers = 1});
    ManhattanLayout m(ell);
    Scenario s = base_scenario(grid, c);
    Scenario d = s;
    s.rho0 = density_on_edges(*grid, m.rightward_edges(), 0.5, true);
    d.rho0 = density_on_edges(*grid, m.leftward_edges(), 0.5, true);
    auto rows = distance_series(s, d, {c.t_final}, cost);
    out.je_to_h[i] = {je, rows.back().h_hat};
  });
  return out;
}

Convergence1dResult run_convergence_1d(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  Convergence1dResult out;
  out.w1 = w1_line(quartic_line_density(), constant_line_density(), 1000000);
  out.rows.resize(c.dx_values.size());
  parallel_for(c.dx_values.size(), c.workers, [&](std::size_t i) {
    const double dx = c.dx_values[i];
    double value = quartic_transport_value(dx);
    out.rows[i] = {dx, value, std::abs(value - out.w1), kQuarticMass * dx};
  });
  return out;
}

namespace {

std::string series_file_name(const std::string& prefix, int ell) {
  return prefix + "_ell" + std::to_string(ell) + ".csv";
}

void write_time_series(const std::filesystem::path& dir, const std::string& prefix,
                       const std::vector<TimeSeries>& series, bool with_l1, bool charts,
                       const std::string& title) {
  std::vector<ChartSeries> chart;
  for (const TimeSeries& ts : series) {
    std::vector<std::vector<std::string>> rows;
    ChartSeries cs{"side " + std::to_string(ts.ell), {}, {}};
    ChartSeries l1{"L1, side " + std::to_string(ts.ell), {}, {}};
    for (const SeriesRow& r : ts.rows) {
      std::vector<std::string> row{format_double(r.t), format_double(r.h_hat)};
      if (with_l1) row.push_back(format_double(r.l1_hat));
      rows.push_back(std::move(row));
      cs.x.push_back(r.t);
      cs.y.push_back(r.h_hat);
      l1.x.push_back(r.t);
      l1.y.push_back(r.l1_hat);
    }
    std::vector<std::string> header{"t", "H_hat"};
    if (with_l1) header.push_back("L1_hat");
    write_csv(dir / series_file_name(prefix, ts.ell), header, rows);
    if (with_l1 && charts) {
      write_line_chart_svg(dir / (prefix + "_ell" + std::to_string(ts.ell) + ".svg"), title, "t",
                           "normalized distance", {ChartSeries{"transport", cs.x, cs.y}, ChartSeries{"L1", l1.x, l1.y}});
    }
    if (ts.grid) {
      std::string tag = prefix + "_ell" + std::to_string(ts.ell);
      write_snapshot_csv(dir / (tag + "_rho_s_final.csv"), *ts.grid, ts.finals.supply);
      write_snapshot_csv(dir / (tag + "_rho_d_final.csv"), *ts.grid, ts.finals.demand);
    }
    chart.push_back(std::move(cs));
  }
  if (charts && !chart.empty()) {
    write_line_chart_svg(dir / (prefix + ".svg"), title, "t", "normalized distance", chart);
  }
}

void write_sweep(const std::filesystem::path& dir, const std::string& name,
                 const std::string& parameter, const std::vector<SweepPoint>& points, bool charts,
                 const std::string& title) {
  std::vector<std::vector<std::string>> rows;
  std::map<int, ChartSeries> by_ell;
  for (const SweepPoint& p : points) {
    rows.push_back({std::to_string(p.ell), format_double(p.parameter), format_double(p.h_hat)});
    ChartSeries& cs = by_ell[p.ell];
    cs.label = "side " + std::to_string(p.ell);
    cs.x.push_back(p.parameter);
    cs.y.push_back(p.h_hat);
  }
  write_csv(dir / (name + ".csv"), {"ell", parameter, "H_hat"}, rows);
  if (charts && !by_ell.empty()) {
    std::vector<ChartSeries> chart;
    for (auto& [ell, cs] : by_ell) chart.push_back(std::move(cs));
    write_line_chart_svg(dir / (name + ".svg"), title, parameter, "normalized distance", chart);
  }
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config) {
  json doc;
  doc["tool"] = kToolName;
  doc["version"] = kVersion;
  doc["config"] = json::parse(config.to_json());
  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write manifest in " + dir.string());
  }
  out << doc.dump(2) << "\n";
}

}  // namespace

void run_experiment_to_files(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.resolve_defaults();
  c.validate();
  if (c.out.empty()) {
    throw ValidationError(ValidationCode::BadConfig, "no output directory given");
  }
  std::filesystem::create_directories(c.out);

  switch (c.kind) {
    case ExperimentKind::InitialData: {
      auto res = run_initial_data(c);
      write_time_series(c.out, "series", res.per_ell, true, c.charts,
                        "Initial data: transport vs L1 distance");
      break;
    }
    case ExperimentKind::FundamentalDiagram: {
      auto res = run_fundamental_diagram(c);
      write_sweep(c.out, "sweep_sigma", "sigma_d", res.sigma_sweep, c.charts,
                  "Distance at T over the demand critical density");
      write_sweep(c.out, "sweep_fmax", "fmax_d", res.fmax_sweep, c.charts,
                  "Distance at T over the demand peak flux");
      write_time_series(c.out, "series_sigma", res.sigma_series, false, c.charts,
                        "Distance over time, perturbed critical density");
      write_time_series(c.out, "series_fmax", res.fmax_series, false, c.charts,
                        "Distance over time, perturbed peak flux");
      break;
    }
    case ExperimentKind::JunctionSingle:
    case ExperimentKind::JunctionAll: {
      auto res = run_junction(c);
      write_time_series(c.out, "series", res.per_ell, false, c.charts,
                        c.kind == ExperimentKind::JunctionSingle
                            ? "Perturbed central junction"
                            : "All junctions perturbed");
      break;
    }
    case ExperimentKind::RoadClosure: {
      auto res = run_road_closure(c);
      write_time_series(c.out, "series", res.per_ell, false, c.charts, "Central road closed");
      break;
    }
    case ExperimentKind::ConvergenceGrid: {
      auto res = run_convergence_grid(c);
      std::vector<std::vector<std::string>> rows;
      ChartSeries cs{"distance at T", {}, {}};
      for (auto [je, h] : res.je_to_h) {
        rows.push_back({std::to_string(je), format_double(h)});
        cs.x.push_back(je);
        cs.y.push_back(h);
      }
      write_csv(c.out / "convergence_grid.csv", {"cells_per_edge", "H_hat"}, rows);
      if (c.charts) {
        write_line_chart_svg(c.out / "convergence_grid.svg", "Grid refinement", "cells per edge",
                             "normalized distance", {cs});
      }
      break;
    }
    case ExperimentKind::Convergence1d: {
      auto res = run_convergence_1d(c);
      std::vector<std::vector<std::string>> rows;
      ChartSeries err{"error", {}, {}};
      ChartSeries bound{"bound", {}, {}};
      for (const auto& r : res.rows) {
        rows.push_back({format_double(r.dx), format_double(r.transport), format_double(r.error),
                        format_double(r.bound)});
        err.x.push_back(r.dx);
        err.y.push_back(r.error);
        bound.x.push_back(r.dx);
        bound.y.push_back(r.bound);
      }
      write_csv(c.out / "convergence_1d.csv", {"dx", "transport", "abs_error", "bound"}, rows);
      if (c.charts) {
        write_line_chart_svg(c.out / "convergence_1d.svg", "1D transport value vs exact distance",
                             "dx", "error", {err, bound});
      }
      break;
    }
  }
  write_manifest(c.out, c);
}

}  // namespace lwrnet
