#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lwrnet/experiments.hpp"
#include "lwrnet/io.hpp"
#include "lwrnet/network_io.hpp"

using namespace lwrnet;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig quick_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.ells = {kind == ExperimentKind::JunctionSingle ? 3 : 2};
  c.cells_per_edge = 4;
  c.t_final = 2.0;
  c.sample_count = 5;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("config json round trip and unknown keys") {
  ExperimentConfig c = ExperimentConfig::from_json(R"({
    "kind": "junction_all", "ells": [3], "eps": 0.05, "T": 10.0, "out": "x"
  })");
  CHECK(c.kind == ExperimentKind::JunctionAll);
  CHECK(c.ells == std::vector<int>{3});
  CHECK(c.eps == 0.05);
  CHECK(c.t_final == 10.0);

  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"kind": "initial_data", "foo": 1})"),
                  ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"kind": "nonsense"})"), ValidationError);

  ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.kind == c.kind);
  CHECK(back.eps == c.eps);
}

TEST_CASE("kind defaults follow the study") {
  ExperimentConfig c;
  c.kind = ExperimentKind::RoadClosure;
  c.resolve_defaults();
  CHECK(c.ells == std::vector<int>{5, 7});
  CHECK(c.t_final == 55.0);
  c.validate();

  ExperimentConfig c1;
  c1.kind = ExperimentKind::Convergence1d;
  c1.resolve_defaults();
  CHECK(c1.dx_values == std::vector<double>{0.2, 0.1, 0.05, 0.025});
  c1.validate();
}

TEST_CASE("config invariants fail fast") {
  ExperimentConfig c = quick_config(ExperimentKind::JunctionSingle);
  c.ells = {4};  // no central junction on an even side
  c.resolve_defaults();
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = quick_config(ExperimentKind::JunctionSingle);
  c.eps = 0.3;  // would push a coefficient below zero
  c.resolve_defaults();
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = quick_config(ExperimentKind::InitialData);
  c.cells_per_edge = 5;  // half-road data needs an even count
  c.resolve_defaults();
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = quick_config(ExperimentKind::InitialData);
  c.dt_safety = 1.5;
  c.resolve_defaults();
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("single-junction perturbation writes the alternating pattern") {
  MetricNetwork net = MetricNetwork::manhattan(3);
  MetricNetwork perturbed = perturb_single_junction(net, 3, 0.1);
  const VertexTopology& center = perturbed.vertex_by_index(perturbed.vertex_index(5));
  REQUIRE(center.n_out() == 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(center.alpha_at(r, 0) == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(center.alpha_at(r, 1) == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(center.alpha_at(r, 2) == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(center.alpha_at(r, 3) == doctest::Approx(0.15).epsilon(1e-14));
  }
  // other junctions untouched
  const VertexTopology& corner = perturbed.vertex_by_index(perturbed.vertex_index(1));
  CHECK(corner.alpha_at(0, 0) == 0.5);
}

TEST_CASE("all-junction perturbation flips sign at even labels and truncates at borders") {
  MetricNetwork net = MetricNetwork::manhattan(3);
  MetricNetwork perturbed = perturb_all_junctions(net, 3, 0.1);

  // center (vertex 5, odd): +,-,+,- on four columns
  const VertexTopology& center = perturbed.vertex_by_index(perturbed.vertex_index(5));
  CHECK(center.alpha_at(2, 0) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(center.alpha_at(2, 1) == doctest::Approx(0.15).epsilon(1e-14));

  // vertex 2 (even, bottom border, three outgoing roads): pattern -,+,-
  // renormalized by its sum 1 - eps, and only the first two incoming roads
  // perturbed
  const VertexTopology& border = perturbed.vertex_by_index(perturbed.vertex_index(2));
  REQUIRE(border.n_in() == 3);
  REQUIRE(border.n_out() == 3);
  double third = 1.0 / 3.0;
  double scale = 1.0 - 0.1;  // -,+,- truncation sums to 1 - eps
  for (int r = 0; r < 2; ++r) {
    CHECK(border.alpha_at(r, 0) == doctest::Approx((third - 0.1) / scale).epsilon(1e-13));
    CHECK(border.alpha_at(r, 1) == doctest::Approx((third + 0.1) / scale).epsilon(1e-13));
    CHECK(border.alpha_at(r, 2) == doctest::Approx((third - 0.1) / scale).epsilon(1e-13));
  }
  for (int s = 0; s < 3; ++s) CHECK(border.alpha_at(2, s) == doctest::Approx(third).epsilon(1e-14));

  // every row everywhere still sums to one
  for (const auto& v : perturbed.vertices()) {
    for (int r = 0; r < v.n_in(); ++r) {
      double sum = 0.0;
      for (int s = 0; s < v.n_out(); ++s) sum += v.alpha_at(r, s);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("no perturbation means no distance") {
  ExperimentConfig c = quick_config(ExperimentKind::JunctionSingle);
  c.eps = 0.0;
  auto res = run_junction(c);
  REQUIRE(res.per_ell.size() == 1);
  for (const SeriesRow& row : res.per_ell[0].rows) {
    CHECK(row.h_hat == 0.0);
    CHECK(row.l1_hat == 0.0);
  }
}

TEST_CASE("equal demand diagram means no distance") {
  ExperimentConfig c = quick_config(ExperimentKind::FundamentalDiagram);
  c.sigma_d = c.sigma_s;
  c.fmax_d = c.fmax_s;
  c.sigma_d_values = {c.sigma_s};
  c.fmax_d_values = {c.fmax_s};
  auto res = run_fundamental_diagram(c);
  for (const auto& p : res.sigma_sweep) CHECK(p.h_hat == 0.0);
  for (const auto& p : res.fmax_sweep) CHECK(p.h_hat == 0.0);
  for (const SeriesRow& row : res.sigma_series[0].rows) CHECK(row.h_hat == 0.0);
}

TEST_CASE("initial data study: exact L1 plateau at the start") {
  ExperimentConfig c = quick_config(ExperimentKind::InitialData);
  auto res = run_initial_data(c);
  REQUIRE(res.per_ell.size() == 1);
  const auto& rows = res.per_ell[0].rows;
  REQUIRE(!rows.empty());
  CHECK(rows[0].t == 0.0);
  CHECK(rows[0].l1_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rows[0].h_hat > 0.0);
}

TEST_CASE("experiment outputs are reproducible byte for byte") {
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "lwrnet_test_runs";
  fs::remove_all(base);
  ExperimentConfig c = quick_config(ExperimentKind::RoadClosure);
  c.ells = {2, 3};
  c.sample_count = 3;
  c.workers = 2;  // scheduling must not leak into the outputs
  c.out = base / "a";
  run_experiment_to_files(c);
  c.out = base / "b";
  run_experiment_to_files(c);
  CHECK(slurp(base / "a" / "series_ell3.csv") == slurp(base / "b" / "series_ell3.csv"));

  // the manifest restates the full resolved config
  auto manifest = slurp(base / "a" / "manifest.json");
  CHECK(manifest.find("\"kind\": \"road_closure\"") != std::string::npos);
  CHECK(manifest.find("\"cells_per_edge\": 4") != std::string::npos);
  CHECK(fs::exists(base / "a" / "series.svg"));
  fs::remove_all(base);
}

TEST_CASE("snapshot files round trip through the distance pipeline") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lwrnet_test_snap";
  fs::create_directories(dir);

  ExperimentConfig c = quick_config(ExperimentKind::InitialData);
  c.sample_count = 2;
  auto res = run_initial_data(c);
  const double h0 = res.per_ell[0].rows[0].h_hat;
  const double l0 = res.per_ell[0].rows[0].l1_hat;

  // rebuild the same t=0 states through file I/O and compare distances
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(2));
  auto grid = std::make_shared<const CellGrid>(CellGrid::discretize(net, 0.25));
  ManhattanLayout m(2);
  auto rho_s = density_on_edges(*grid, m.rightward_edges(), 0.5, true);
  auto rho_d = density_on_edges(*grid, m.leftward_edges(), 0.5, true);
  write_snapshot_csv(dir / "s.csv", *grid, rho_s);
  write_snapshot_csv(dir / "d.csv", *grid, rho_d);
  save_network(*net, dir / "net.json");

  auto loaded = std::make_shared<const MetricNetwork>(load_network(dir / "net.json"));
  auto [grid2, back_s] = read_snapshot_with_grid(dir / "s.csv", loaded);
  auto back_d = read_snapshot_csv(dir / "d.csv", grid2);
  CHECK(back_s == rho_s);
  CostMatrix cost = cost_matrix(CellGraph(grid2));
  CHECK(wasserstein_grid(back_s, back_d, cost, grid2.dx()) == doctest::Approx(h0).epsilon(1e-12));
  CHECK(l1_discrete(back_s, back_d, grid2.dx()) == doctest::Approx(l0).epsilon(1e-12));
  fs::remove_all(dir);
}

TEST_CASE("demand diagram sweep: a larger parameter error means a larger distance") {
  ExperimentConfig c;
  c.kind = ExperimentKind::FundamentalDiagram;
  c.ells = {5};
  c.t_final = 20.0;
  c.sample_count = 2;
  c.sigma_d_values = {0.2, 0.28};
  c.fmax_d_values = {0.25};
  c.workers = 2;
  auto res = run_fundamental_diagram(c);
  REQUIRE(res.sigma_sweep.size() == 2);
  CHECK(res.sigma_sweep[0].h_hat > res.sigma_sweep[1].h_hat);
  // matching demand diagram in the peak-flux sweep: no distance at all
  CHECK(res.fmax_sweep[0].h_hat == 0.0);
}

TEST_CASE("distances decay once both runs settle to the same constant") {
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(2));
  auto grid = std::make_shared<const CellGrid>(CellGrid::discretize(net, 0.1));
  CostMatrix cost = cost_matrix(CellGraph(*grid));
  ManhattanLayout m(2);
  Scenario s;
  s.grid = grid;
  s.fd = FundamentalDiagram(0.3, 0.25);
  s.t_final = 150.0;
  s.rho0 = density_on_edges(*grid, m.rightward_edges(), 0.5, false);
  Scenario d = s;
  d.fd = FundamentalDiagram(0.2, 0.25);
  auto rows = distance_series(s, d, {5.0, 150.0}, cost);
  CHECK(rows[0].h_hat > 0.0);
  // near-identical late fields cancel to nothing instead of tripping the
  // balance check on their round-off residue
  CHECK(rows[1].h_hat <= 1e-6);
  CHECK(rows[1].h_hat < 0.01 * rows[0].h_hat);
}

TEST_CASE("snapshot rows may arrive in any order") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lwrnet_test_shuffle";
  fs::create_directories(dir);
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(2));
  auto grid = std::make_shared<const CellGrid>(CellGrid::discretize(net, 0.5));
  ManhattanLayout m(2);
  auto rho = density_on_edges(*grid, m.rightward_edges(), 0.4, false);
  write_snapshot_csv(dir / "snap.csv", *grid, rho);

  std::ifstream in(dir / "snap.csv");
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  in.close();
  std::reverse(lines.begin(), lines.end());
  std::ofstream out(dir / "shuffled.csv");
  out << header << "\n";
  for (const auto& l : lines) out << l << "\n";
  out.close();

  CHECK(read_snapshot_csv(dir / "shuffled.csv", *grid) == rho);

  // a tampered coordinate is caught
  lines[0].replace(lines[0].rfind(',') - 1, 1, "9");
  std::ofstream bad(dir / "bad.csv");
  bad << header << "\n";
  for (const auto& l : lines) bad << l << "\n";
  bad.close();
  CHECK_THROWS_AS(read_snapshot_csv(dir / "bad.csv", *grid), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("swapping the scenarios leaves the distances unchanged") {
  ExperimentConfig c = quick_config(ExperimentKind::InitialData);
  c.sample_count = 3;
  auto res = run_initial_data(c);

  // same study with supply and demand roles exchanged
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(2));
  auto grid = std::make_shared<const CellGrid>(CellGrid::discretize(net, 0.25));
  CostMatrix cost = cost_matrix(CellGraph(*grid));
  ManhattanLayout m(2);
  Scenario a, b;
  a.grid = b.grid = grid;
  a.fd = b.fd = FundamentalDiagram(0.3, 0.25);
  a.t_final = b.t_final = 2.0;
  a.rho0 = density_on_edges(*grid, m.leftward_edges(), 0.5, true);   // swapped
  b.rho0 = density_on_edges(*grid, m.rightward_edges(), 0.5, true);
  auto swapped = distance_series(a, b, sample_times(2.0, 3), cost);
  for (std::size_t i = 0; i < swapped.size(); ++i) {
    CHECK(swapped[i].h_hat == doctest::Approx(res.per_ell[0].rows[i].h_hat).epsilon(1e-9));
  }
}
