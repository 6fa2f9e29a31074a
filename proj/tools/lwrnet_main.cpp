// Command-line front end: network generation, single simulations, distance
// evaluation between snapshots, and the batch experiment runners.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lwrnet/cell_graph.hpp"
#include "lwrnet/experiments.hpp"
#include "lwrnet/io.hpp"
#include "lwrnet/network_io.hpp"
#include "lwrnet/solver.hpp"
#include "lwrnet/transport.hpp"
#include "lwrnet/version.hpp"

namespace {

using nlohmann::json;
using namespace lwrnet;

// Exit codes, also listed in --help: 1 usage, 2 file I/O, 3 invalid input
// or config, 4 numerical failure.
constexpr int kExitUsage = 1;
constexpr int kExitFile = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(ValidationCode::BadFile, "cannot read " + path.string());
  }
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

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

struct SimulateOptions {
  std::filesystem::path network_path;
  int manhattan_ell = 0;  // used instead of network_path when > 0
  double manhattan_edge_length = 1.0;
  double dx = 0.1;
  double sigma = 0.3;
  double fmax = 0.25;
  double dt = 0.0;
  double dt_safety = 0.9;
  double t_final = 0.0;
  std::vector<double> snapshot_times;
  std::vector<EdgeId> closures;
  json initial;  // {"kind": "uniform"|"edges"|"csv", ...}
  json raw;      // resolved copy for the manifest
};

SimulateOptions parse_simulate_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(ValidationCode::BadFile, std::string("simulate config: ") + e.what());
  }
  reject_unknown_keys(doc,
                      {"network", "manhattan", "dx", "sigma", "fmax", "dt", "dt_safety", "T",
                       "snapshot_times", "closures", "initial"},
                      "simulate config");
  SimulateOptions opt;
  try {
    if (doc.contains("network")) opt.network_path = doc["network"].get<std::string>();
    if (doc.contains("manhattan")) {
      reject_unknown_keys(doc["manhattan"], {"ell", "edge_length"}, "manhattan block");
      opt.manhattan_ell = doc["manhattan"].at("ell").get<int>();
      if (doc["manhattan"].contains("edge_length")) {
        opt.manhattan_edge_length = doc["manhattan"]["edge_length"].get<double>();
      }
    }
    if (doc.contains("dx")) doc["dx"].get_to(opt.dx);
    if (doc.contains("sigma")) doc["sigma"].get_to(opt.sigma);
    if (doc.contains("fmax")) doc["fmax"].get_to(opt.fmax);
    if (doc.contains("dt")) doc["dt"].get_to(opt.dt);
    if (doc.contains("dt_safety")) doc["dt_safety"].get_to(opt.dt_safety);
    if (doc.contains("T")) doc["T"].get_to(opt.t_final);
    if (doc.contains("snapshot_times")) doc["snapshot_times"].get_to(opt.snapshot_times);
    if (doc.contains("closures")) doc["closures"].get_to(opt.closures);
    opt.initial = doc.contains("initial") ? doc["initial"] : json{{"kind", "uniform"}, {"value", 0.0}};
  } catch (const json::exception& e) {
    throw ValidationError(ValidationCode::BadConfig, std::string("simulate config: ") + e.what());
  }
  if (opt.network_path.empty() == (opt.manhattan_ell <= 0)) {
    throw ValidationError(ValidationCode::BadConfig,
                          "give exactly one of \"network\" or \"manhattan\"");
  }
  if (opt.snapshot_times.empty()) opt.snapshot_times = {0.0, opt.t_final};
  opt.raw = doc;
  opt.raw["initial"] = opt.initial;
  opt.raw["snapshot_times"] = opt.snapshot_times;
  return opt;
}

std::vector<double> build_initial(const json& initial, const CellGrid& grid) {
  reject_unknown_keys(initial, {"kind", "value", "edges", "half", "path"}, "initial block");
  std::string kind = initial.at("kind").get<std::string>();
  if (kind == "uniform") {
    return uniform_density(grid, initial.at("value").get<double>());
  }
  if (kind == "edges") {
    return density_on_edges(grid, initial.at("edges").get<std::vector<EdgeId>>(),
                            initial.at("value").get<double>(),
                            initial.contains("half") && initial["half"].get<bool>());
  }
  if (kind == "csv") {
    return read_snapshot_csv(initial.at("path").get<std::string>(), grid);
  }
  throw ValidationError(ValidationCode::BadConfig, "unknown initial kind \"" + kind + "\"");
}

int cmd_generate_network(int ell, double edge_length, const std::filesystem::path& out) {
  save_network(MetricNetwork::manhattan(ell, edge_length), out);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
  SimulateOptions opt = parse_simulate_config(read_file(config_path));
  auto net = std::make_shared<const MetricNetwork>(
      opt.manhattan_ell > 0 ? MetricNetwork::manhattan(opt.manhattan_ell, opt.manhattan_edge_length)
                            : load_network(opt.network_path));
  auto grid = std::make_shared<const CellGrid>(CellGrid::discretize(net, opt.dx));

  Scenario scenario;
  scenario.grid = grid;
  scenario.fd = FundamentalDiagram(opt.sigma, opt.fmax);
  scenario.rho0 = build_initial(opt.initial, *grid);
  scenario.closures = opt.closures;
  scenario.t_final = opt.t_final;
  scenario.dt = opt.dt;
  scenario.dt_safety = opt.dt_safety;

  Trajectory traj = simulate(scenario, opt.snapshot_times);
  std::filesystem::create_directories(out_dir);
  for (const auto& snap : traj) {
    write_snapshot_csv(out_dir / snapshot_file_name(snap.requested_time), *grid, snap.state.rho);
  }
  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  manifest["command"] = "simulate";
  manifest["config"] = opt.raw;
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::printf("wrote %zu snapshots to %s\n", traj.size(), out_dir.string().c_str());
  return 0;
}

int cmd_distance(const std::filesystem::path& a, const std::filesystem::path& b,
                 const std::filesystem::path& network_path, bool unnormalized, bool renormalize) {
  auto net = std::make_shared<const MetricNetwork>(load_network(network_path));
  auto [grid, rho_a] = read_snapshot_with_grid(a, net);
  std::vector<double> rho_b = read_snapshot_csv(b, grid);
  CostMatrix cost = cost_matrix(CellGraph(grid));
  DistanceOptions options;
  options.normalized = !unnormalized;
  options.renormalize = renormalize;
  double d = wasserstein_grid(rho_a, rho_b, cost, grid.dx(), options);
  std::printf("%.12g\n", d);
  return 0;
}

int cmd_experiment(const std::optional<std::string>& kind_flag,
                   const std::filesystem::path& config_path, const std::vector<int>& ells,
                   double eps, double sigma_d, double fmax_d, double t_final, double dt_safety,
                   const std::filesystem::path& out, int workers) {
  ExperimentConfig config;
  if (!config_path.empty()) {
    config = ExperimentConfig::from_json(read_file(config_path));
  }
  if (kind_flag) config.kind = experiment_kind_from_string(*kind_flag);
  if (!config_path.empty() && !kind_flag) {
    // kind comes from the config file; nothing to do
  }
  if (!ells.empty()) config.ells = ells;
  if (eps >= 0.0) config.eps = eps;
  if (sigma_d > 0.0) config.sigma_d = sigma_d;
  if (fmax_d > 0.0) config.fmax_d = fmax_d;
  if (t_final >= 0.0) config.t_final = t_final;
  if (dt_safety > 0.0) config.dt_safety = dt_safety;
  if (workers > 0) config.workers = workers;
  if (!out.empty()) config.out = out;
  if (config.out.empty()) {
    const char* root = std::getenv("LWRNET_OUT_ROOT");
    config.out = std::filesystem::path(root ? root : "runs") / to_string(config.kind);
  }
  run_experiment_to_files(config);
  std::printf("experiment %s written to %s\n", to_string(config.kind), config.out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) + " " + kVersion +
               " - LWR traffic simulation and transport distances on road networks"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 usage, 2 unreadable or unwritable file,\n"
      "3 invalid input or config, 4 numerical failure.");

  auto* gen = app.add_subcommand("generate-network", "Write a Manhattan grid network file");
  int gen_ell = 5;
  double gen_len = 1.0;
  std::filesystem::path gen_out;
  gen->add_option("--ell", gen_ell, "junctions per side")->required();
  gen->add_option("--edge-length", gen_len, "road length");
  gen->add_option("--out", gen_out, "output path")->required();

  auto* sim = app.add_subcommand("simulate", "Run one scenario and write density snapshots");
  std::filesystem::path sim_config, sim_out = "sim_out";
  sim->add_option("--config", sim_config, "simulate config (JSON)")->required();
  sim->add_option("--out", sim_out, "output directory");

  auto* dist = app.add_subcommand("distance", "Distance between two density snapshots");
  std::filesystem::path dist_a, dist_b, dist_net;
  bool dist_unnormalized = false, dist_renormalize = false;
  dist->add_option("a", dist_a, "first snapshot CSV")->required();
  dist->add_option("b", dist_b, "second snapshot CSV")->required();
  dist->add_option("--network", dist_net, "network file the snapshots live on")->required();
  dist->add_flag("--unnormalized", dist_unnormalized, "report mass x distance instead of distance");
  dist->add_flag("--renormalize", dist_renormalize, "scale the second field to the first mass");

  auto* exp = app.add_subcommand("experiment", "Run a batch study and write CSV series");
  std::optional<std::string> exp_kind;
  std::filesystem::path exp_config, exp_out;
  std::vector<int> exp_ells;
  double exp_eps = -1.0, exp_sigma_d = -1.0, exp_fmax_d = -1.0, exp_t = -1.0, exp_safety = -1.0;
  int exp_workers = 0;
  exp->add_option("--kind", exp_kind,
                  "initial_data | fundamental_diagram | junction_single | junction_all | "
                  "road_closure | convergence_1d | convergence_grid");
  exp->add_option("--config", exp_config, "experiment config (JSON)");
  exp->add_option("--ell", exp_ells, "grid sides (repeatable)");
  exp->add_option("--eps", exp_eps, "junction perturbation");
  exp->add_option("--sigma-d", exp_sigma_d, "demand critical density");
  exp->add_option("--fmax-d", exp_fmax_d, "demand peak flux");
  exp->add_option("--T", exp_t, "final time");
  exp->add_option("--dt-safety", exp_safety, "CFL safety factor");
  exp->add_option("--out", exp_out, "output directory (default $LWRNET_OUT_ROOT/<kind>)");
  exp->add_option("--workers", exp_workers, "parallel jobs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate_network(gen_ell, gen_len, gen_out);
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
    if (dist->parsed()) {
      return cmd_distance(dist_a, dist_b, dist_net, dist_unnormalized, dist_renormalize);
    }
    if (exp->parsed()) {
      if (!exp_kind && exp_config.empty()) {
        std::fprintf(stderr, "lwrnet: experiment needs --kind or --config\n");
        return kExitUsage;
      }
      return cmd_experiment(exp_kind, exp_config, exp_ells, exp_eps, exp_sigma_d, exp_fmax_d,
                            exp_t, exp_safety, exp_out, exp_workers);
    }
  } catch (const ValidationError& e) {
    bool file_error = e.code() == ValidationCode::BadFile;
    std::fprintf(stderr, "lwrnet: %s\n", e.what());
    return file_error ? kExitFile : kExitValidation;
  } catch (const CflError& e) {
    std::fprintf(stderr, "lwrnet: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lwrnet: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
