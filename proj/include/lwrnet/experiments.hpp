#pragma once

// Batch sensitivity studies on Manhattan grids and the two convergence
// studies, with CSV series, optional SVG charts and a manifest per run.
// Every study compares a supply scenario against a demand scenario that
// differs in exactly one input (initial data, diagram, junction matrices or
// topology) and reports the normalized transport distance over time.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lwrnet/line_metrics.hpp"
#include "lwrnet/solver.hpp"
#include "lwrnet/transport.hpp"

namespace lwrnet {

enum class ExperimentKind {
  InitialData,
  FundamentalDiagram,
  JunctionSingle,
  JunctionAll,
  RoadClosure,
  Convergence1d,
  ConvergenceGrid,
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::InitialData;
  std::vector<int> ells;    // grid sides; kind default when empty
  int cells_per_edge = 10;  // cells per road
  double edge_length = 1.0;
  double sigma_s = 0.3;
  double fmax_s = 0.25;
  double sigma_d = -1.0;  // fundamental_diagram time series; kind default when < 0
  double fmax_d = -1.0;
  double eps = 0.1;
  double t_final = -1.0;  // kind default when < 0
  int sample_count = 50;
  double dt_safety = 0.9;
  std::vector<double> sigma_d_values;  // demand sweep grids
  std::vector<double> fmax_d_values;
  std::vector<int> je_values;     // grid convergence study
  std::vector<double> dx_values;  // 1D convergence study
  int workers = 0;
  bool charts = true;
  std::filesystem::path out;

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;

  void resolve_defaults();
  void validate() const;  // fail fast; resolve_defaults first
};

struct SeriesRow {
  double t = 0.0;
  double h_hat = 0.0;
  double l1_hat = 0.0;
};

// Densities of both runs at the end of a study, for snapshot output.
struct FinalDensities {
  std::vector<double> supply;
  std::vector<double> demand;
  double t = 0.0;
};

struct TimeSeries {
  int ell = 0;
  std::vector<SeriesRow> rows;
  std::shared_ptr<const CellGrid> grid;  // geometry of the final densities
  FinalDensities finals;
};

struct SweepPoint {
  int ell = 0;
  double parameter = 0.0;
  double h_hat = 0.0;
};

// --- scenario ingredients ---------------------------------------------

std::vector<double> uniform_density(const CellGrid& grid, double value);
// `value` on the listed edges (all cells, or only the first half of each
// edge, which requires an even cell count), zero elsewhere.
std::vector<double> density_on_edges(const CellGrid& grid, const std::vector<EdgeId>& edges,
                                     double value, bool first_half_only);

// Demand-side junction perturbations: outgoing columns receive
// sign*eps, -sign*eps, ... in ascending-id order. At junctions that are not
// interior (fewer than four incoming roads) only the first two incoming
// roads are perturbed; rows whose pattern truncates are renormalized.
MetricNetwork perturb_junction(const MetricNetwork& net, VertexId vertex, double eps, int sign);
// Central junction only.
MetricNetwork perturb_single_junction(const MetricNetwork& net, int ell, double eps);
// Every junction; the sign flips at even-numbered vertices.
MetricNetwork perturb_all_junctions(const MetricNetwork& net, int ell, double eps);

// Largest stable time step of a scenario (all edge diagrams considered).
double scenario_cfl_dt(const Scenario& scenario);

// Evenly spaced times 0..t_final (inclusive).
std::vector<double> sample_times(double t_final, int count);

// Runs both scenarios in lockstep with a shared time step chosen to divide
// t_final exactly, and reports normalized transport and L1 distances at the
// step time at or before each sample time. Both grids must agree
// geometrically with the cost matrix. The second form also hands out both
// density fields at t_final.
std::vector<SeriesRow> distance_series(const Scenario& supply, const Scenario& demand,
                                       const std::vector<double>& times, const CostMatrix& cost);
std::vector<SeriesRow> distance_series(const Scenario& supply, const Scenario& demand,
                                       const std::vector<double>& times, const CostMatrix& cost,
                                       FinalDensities& finals);

// --- the 1D reference pair ---------------------------------------------

// (x^2 - 1)^2 on [-2, 2] against the constant 23/15; both carry mass 92/15.
LineDensity quartic_line_density();
LineDensity constant_line_density();
constexpr double kQuarticMass = 92.0 / 15.0;

// Exact per-cell masses of the pair on a uniform grid over [-2, 2].
std::pair<std::vector<double>, std::vector<double>> quartic_pair_cell_masses(int cells);

// Graph-LP transport value (unnormalized) of the pair at the given spacing;
// the interval is modeled as a single road of length 4.
double quartic_transport_value(double dx);

// --- runners -------------------------------------------------------------

struct InitialDataResult {
  std::vector<TimeSeries> per_ell;  // rows carry both distances
};
struct FundamentalDiagramResult {
  std::vector<SweepPoint> sigma_sweep;
  std::vector<SweepPoint> fmax_sweep;
  std::vector<TimeSeries> sigma_series;  // at sigma_d, fmax_s
  std::vector<TimeSeries> fmax_series;   // at sigma_s, fmax_d
};
struct JunctionResult {
  std::vector<TimeSeries> per_ell;
};
struct ConvergenceGridResult {
  std::vector<std::pair<int, double>> je_to_h;  // (cells per edge, distance at t_final)
};
struct Convergence1dRow {
  double dx = 0.0;
  double transport = 0.0;  // graph-LP value
  double error = 0.0;      // |transport - w1|
  double bound = 0.0;      // mass * dx
};
struct Convergence1dResult {
  double w1 = 0.0;
  std::vector<Convergence1dRow> rows;
};

InitialDataResult run_initial_data(const ExperimentConfig& config);
FundamentalDiagramResult run_fundamental_diagram(const ExperimentConfig& config);
JunctionResult run_junction(const ExperimentConfig& config);  // single or all, per kind
JunctionResult run_road_closure(const ExperimentConfig& config);
ConvergenceGridResult run_convergence_grid(const ExperimentConfig& config);
Convergence1dResult run_convergence_1d(const ExperimentConfig& config);

// Dispatches on config.kind and writes series/sweep CSVs, optional charts
// and manifest.json into config.out.
void run_experiment_to_files(const ExperimentConfig& config);

}  // namespace lwrnet
