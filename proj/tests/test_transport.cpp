#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "lwrnet/io.hpp"
#include "lwrnet/transport.hpp"
#include "oracles.hpp"

using namespace lwrnet;

namespace {

CostMatrix path_costs(int cells, double dx) {
  NetworkSpec spec;
  spec.vertices = {1, 2};
  spec.edges = {{1, 1, 2, cells * dx}};
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::build(spec));
  CellGrid grid = CellGrid::discretize(net, dx);
  return cost_matrix(CellGraph(grid));
}

// Random arbitrary instance solved both ways; returns (simplex, brute force).
std::pair<double, double> solve_both(std::mt19937& rng, int max_nodes, int max_mass,
                                     int max_cost) {
  std::uniform_int_distribution<int> node_count(1, max_nodes);
  std::uniform_int_distribution<int> mass(1, max_mass);
  std::uniform_int_distribution<int> cost_pick(0, max_cost);
  const int m = node_count(rng);
  const int n = node_count(rng);

  // embed the m x n instance in a (m+n)-cell matrix: supplies on the first m
  // cells, demands on the rest
  const int J = m + n;
  std::vector<double> data(static_cast<std::size_t>(J) * J, 0.0);
  std::vector<std::vector<double>> sub(m, std::vector<double>(n));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double c = cost_pick(rng);
      sub[i][j] = c;
      data[static_cast<std::size_t>(i) * J + (m + j)] = c;
      data[static_cast<std::size_t>(m + j) * J + i] = c;
    }
  }
  CostMatrix cost(J, std::move(data));

  std::vector<int> si(m), di(n);
  int total_s = 0;
  for (int i = 0; i < m; ++i) total_s += (si[i] = mass(rng));
  // balanced demands: spread the same total
  int left = total_s;
  for (int j = 0; j < n - 1; ++j) {
    std::uniform_int_distribution<int> part(0, left);
    di[j] = part(rng);
    left -= di[j];
  }
  di[n - 1] = left;

  std::vector<double> supply(J, 0.0), demand(J, 0.0);
  for (int i = 0; i < m; ++i) supply[i] = si[i];
  for (int j = 0; j < n; ++j) demand[m + j] = di[j];

  TransportPlan plan = solve_transport(cost, supply, demand);
  double brute = oracles::brute_force_transport(sub, si, di);

  // plan feasibility, exactly as promised
  std::vector<double> row(J, 0.0), col(J, 0.0);
  for (const auto& s : plan.shipments) {
    CHECK(s.amount > 0.0);
    CHECK(s.amount <= std::min(supply[s.from], demand[s.to]) + 1e-9 * total_s);
    row[s.from] += s.amount;
    col[s.to] += s.amount;
  }
  for (int j = 0; j < J; ++j) {
    CHECK(std::abs(row[j] - supply[j]) <= 1e-12 * std::max(1, total_s));
    CHECK(std::abs(col[j] - demand[j]) <= 1e-12 * std::max(1, total_s));
  }
  return {plan.objective, brute};
}

std::vector<double> random_rho(std::mt19937& rng, int cells, double cap) {
  std::uniform_real_distribution<double> level(0.0, cap);
  std::vector<double> rho(cells);
  for (double& r : rho) r = level(rng);
  return rho;
}

// scale a field to carry exactly the given mass
void set_mass(std::vector<double>& rho, double dx, double mass) {
  double current = 0.0;
  for (double r : rho) current += r * dx;
  double factor = mass / current;
  for (double& r : rho) r *= factor;
}

}  // namespace

TEST_CASE("cancellation removes the overlap") {
  auto [s1, d1] = cancel_common_mass({2.0, 0.0}, {1.0, 1.0});
  CHECK(s1 == std::vector<double>{1.0, 0.0});
  CHECK(d1 == std::vector<double>{0.0, 1.0});

  auto [s2, d2] = cancel_common_mass({0.7, 0.3}, {0.7, 0.3});
  for (double v : s2) CHECK(v == 0.0);
  for (double v : d2) CHECK(v == 0.0);

  CHECK_THROWS_AS(cancel_common_mass({1.0}, {2.0}), ValidationError);
}

TEST_CASE("point-to-point shipment costs mass times distance") {
  CostMatrix cost = path_costs(10, 0.5);
  std::vector<double> s(10, 0.0), d(10, 0.0);
  s[1] = 3.25;
  d[8] = 3.25;
  TransportPlan plan = solve_transport(cost, s, d);
  REQUIRE(plan.shipments.size() == 1);
  CHECK(plan.shipments[0].from == 1);
  CHECK(plan.shipments[0].to == 8);
  CHECK(plan.objective == doctest::Approx(3.25 * 3.5).epsilon(1e-12));
}

TEST_CASE("identical masses cost nothing") {
  CostMatrix cost = path_costs(6, 1.0);
  std::vector<double> s{0.1, 0.2, 0.0, 0.4, 0.0, 0.3};
  auto [cs, cd] = cancel_common_mass(s, s);
  CHECK(solve_transport(cost, cs, cd).objective == 0.0);
}

TEST_CASE("mass mismatch is refused") {
  CostMatrix cost = path_costs(4, 1.0);
  std::vector<double> s{1.0, 0.0, 0.0, 0.0};
  std::vector<double> d{0.0, 0.0, 0.0, 2.0};
  CHECK_THROWS_AS(solve_transport(cost, s, d), ValidationError);
}

TEST_CASE("simplex equals exhaustive enumeration on small integer instances") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 40; ++trial) {
    auto [objective, brute] = solve_both(rng, 5, 3, 9);
    CHECK(objective == brute);  // integer data: exact equality
  }
}

TEST_CASE("line instances match the cumulative-sum formula") {
  // on a path graph the optimum is dx * sum_k |S_k - D_k| over the prefix
  // sums, an independent closed form
  std::mt19937 rng(99);
  const int cells = 12;
  const double dx = 0.5;
  CostMatrix cost = path_costs(cells, dx);
  std::uniform_int_distribution<int> mass(0, 4);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> s(cells), d(cells);
    double ts = 0.0, td = 0.0;
    for (int k = 0; k < cells; ++k) {
      ts += (s[k] = mass(rng));
      td += (d[k] = mass(rng));
    }
    if (ts != td) {
      d[cells - 1] += ts - td;
      if (d[cells - 1] < 0) {
        s[cells - 1] -= d[cells - 1];
        d[cells - 1] = 0;
      }
    }
    double expect = 0.0;
    double prefix = 0.0;
    for (int k = 0; k + 1 < cells; ++k) {
      prefix += s[k] - d[k];
      expect += std::abs(prefix) * dx;
    }
    CHECK(solve_transport(cost, s, d).objective == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("cancellation does not change the optimum") {
  std::mt19937 rng(555);
  const int cells = 9;
  CostMatrix cost = path_costs(cells, 1.0);
  std::uniform_real_distribution<double> level(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(cells), d(cells);
    double ts = 0.0, td = 0.0;
    for (int k = 0; k < cells; ++k) {
      ts += (s[k] = level(rng));
      td += (d[k] = level(rng));
    }
    for (double& v : d) v *= ts / td;
    double direct = solve_transport(cost, s, d).objective;
    auto [cs, cd] = cancel_common_mass(s, d);
    double cancelled = solve_transport(cost, cs, cd).objective;
    CHECK(direct == doctest::Approx(cancelled).epsilon(1e-9));
  }
}

TEST_CASE("distance between fields on the grid") {
  CostMatrix cost = path_costs(10, 0.1);
  std::vector<double> a(10, 0.0), b(10, 0.0);
  a[3] = 0.8;
  b[4] = 0.8;
  // same mass one cell away: normalized distance is one cell width
  CHECK(wasserstein_grid(a, b, cost, 0.1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(wasserstein_grid(a, a, cost, 0.1) == 0.0);
  // unnormalized: mass times distance
  CHECK(wasserstein_grid(a, b, cost, 0.1, {.normalized = false, .renormalize = false}) ==
        doctest::Approx(0.08 * 0.1).epsilon(1e-12));

  std::vector<double> heavier(10, 0.0);
  heavier[4] = 1.0;
  CHECK_THROWS_AS(wasserstein_grid(a, heavier, cost, 0.1), ValidationError);
  CHECK(wasserstein_grid(a, heavier, cost, 0.1, {.normalized = true, .renormalize = true}) ==
        doctest::Approx(0.1).epsilon(1e-12));

  std::vector<double> empty(10, 0.0);
  CHECK(wasserstein_grid(empty, empty, cost, 0.1) == 0.0);
}

TEST_CASE("metric axioms on random equal-mass fields") {
  auto net = std::make_shared<const MetricNetwork>(MetricNetwork::manhattan(2));
  CellGrid grid = CellGrid::discretize(net, 0.25);
  CostMatrix cost = cost_matrix(CellGraph(grid));
  std::mt19937 rng(2718);
  const double dx = grid.dx();
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_rho(rng, grid.total_cells(), 0.5);
    auto b = random_rho(rng, grid.total_cells(), 0.5);
    auto c = random_rho(rng, grid.total_cells(), 0.5);
    set_mass(a, dx, 1.0);
    set_mass(b, dx, 1.0);
    set_mass(c, dx, 1.0);
    double ab = wasserstein_grid(a, b, cost, dx);
    double ba = wasserstein_grid(b, a, cost, dx);
    double bc = wasserstein_grid(b, c, cost, dx);
    double ac = wasserstein_grid(a, c, cost, dx);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(wasserstein_grid(a, a, cost, dx) == 0.0);
  }
}

TEST_CASE("scaling both masses scales the cost and keeps the distance") {
  CostMatrix cost = path_costs(8, 0.5);
  std::mt19937 rng(31);
  auto a = random_rho(rng, 8, 0.4);
  auto b = random_rho(rng, 8, 0.4);
  set_mass(a, 0.5, 0.7);
  set_mass(b, 0.5, 0.7);
  double h1 = wasserstein_grid(a, b, cost, 0.5, {.normalized = false, .renormalize = false});
  double d1 = wasserstein_grid(a, b, cost, 0.5);
  for (double& v : a) v *= 2.0;
  for (double& v : b) v *= 2.0;
  double h2 = wasserstein_grid(a, b, cost, 0.5, {.normalized = false, .renormalize = false});
  double d2 = wasserstein_grid(a, b, cost, 0.5);
  CHECK(h2 == doctest::Approx(2.0 * h1).epsilon(1e-12));
  CHECK(d2 == doctest::Approx(d1).epsilon(1e-12));
}

TEST_CASE("plan and cost dumps are well formed") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lwrnet_test_dumps";
  fs::create_directories(dir);
  CostMatrix cost = path_costs(4, 0.5);
  std::vector<double> s{1.0, 0.0, 0.0, 0.0};
  std::vector<double> d{0.0, 0.0, 0.0, 1.0};
  TransportPlan plan = solve_transport(cost, s, d);
  write_plan_csv(dir / "plan.csv", plan);
  write_cost_matrix_csv(dir / "cost.csv", cost, 0.5);

  std::ifstream in(dir / "plan.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "from,to,amount");
  std::getline(in, line);
  CHECK(line == "0,3,1");
  std::getline(in, line);
  CHECK(line.rfind("objective,1.5", 0) == 0);

  std::ifstream cin_(dir / "cost.csv");
  std::getline(cin_, line);
  CHECK(line == "cells,4,dx,0.5");
  fs::remove_all(dir);
}

TEST_CASE("degenerate and heavily tied instances still solve") {
  // equal masses everywhere force many zero pivots
  const int cells = 30;
  CostMatrix cost = path_costs(cells, 1.0);
  std::vector<double> s(cells, 0.0), d(cells, 0.0);
  for (int k = 0; k < cells / 2; ++k) s[k] = 1.0;
  for (int k = cells / 2; k < cells; ++k) d[k] = 1.0;
  TransportPlan plan = solve_transport(cost, s, d);
  // block shift: each unit travels cells/2 on average
  CHECK(plan.objective == doctest::Approx(15.0 * 15.0).epsilon(1e-12));
}
