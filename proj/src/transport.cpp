#include "lwrnet/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace lwrnet {

namespace {

constexpr double kBalanceTol = 1e-9;

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void require_balance(double ms, double md) {
  double scale = std::max(ms, md);
  if (std::abs(ms - md) > kBalanceTol * scale) {
    std::ostringstream os;
    os << "supply mass " << ms << " vs demand mass " << md;
    throw ValidationError(ValidationCode::MassMismatch, os.str());
  }
}

// Primal simplex on the dense bipartite transportation problem. Nodes are
// sources 0..m-1 and sinks m..m+n-1; the basis is a spanning tree of
// m+n-1 arcs. Supplies are perturbed (Charnes style) to keep the ratio test
// nondegenerate; the final flows are re-derived from the optimal tree with
// the unperturbed masses, so the perturbation never reaches the caller.
class TransportationSimplex {
 public:
  TransportationSimplex(int m, int n, std::vector<double> cost, std::vector<double> supply,
                        std::vector<double> demand)
      : m_(m),
        n_(n),
        nodes_(m + n),
        cost_(std::move(cost)),
        supply_(std::move(supply)),
        demand_(std::move(demand)) {
    double total = sum_of(supply_);
    cmax_ = 0.0;
    for (double c : cost_) cmax_ = std::max(cmax_, c);
    enter_tol_ = 1e-12 * (cmax_ + 1.0);

    pert_supply_ = supply_;
    pert_demand_ = demand_;
    double delta = total * 1e-11 / (0.5 * static_cast<double>(m_) * (m_ + 1) + 1.0);
    double added = 0.0;
    for (int i = 0; i < m_; ++i) {
      double d = delta * (i + 1);
      pert_supply_[static_cast<std::size_t>(i)] += d;
      added += d;
    }
    pert_demand_[static_cast<std::size_t>(n_ - 1)] += added;
  }

  void solve() {
    initial_basis();
    const long max_pivots = 200l * nodes_ + 10000;
    long pivots = 0;
    bool bland = false;
    for (;;) {
      rebuild_tree();
      int enter = price(bland);
      if (enter < 0) break;
      pivot(enter, bland);
      if (++pivots > max_pivots) {
        if (!bland) {
          bland = true;
          pivots = 0;
        } else {
          throw InternalError("transportation simplex did not terminate");
        }
      }
    }
    final_flows();
    verify();
  }

  // Basic arcs with their unperturbed flows (may contain zero flows).
  struct Arc {
    int i;
    int j;
    double flow;
  };
  const std::vector<Arc>& basis() const { return basis_; }
  double objective() const { return objective_; }

 private:
  double cost_at(int i, int j) const {
    return cost_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
  }

  // Cheapest-arc-first greedy allocation; forms a forest, completed to a
  // spanning tree with zero-flow arcs.
  void initial_basis() {
    std::vector<int> order(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cost_[static_cast<std::size_t>(a)] < cost_[static_cast<std::size_t>(b)]; });

    std::vector<double> rs = pert_supply_;
    std::vector<double> rd = pert_demand_;
    basis_.clear();
    basis_.reserve(static_cast<std::size_t>(nodes_));
    for (int arc : order) {
      int i = arc / n_;
      int j = arc % n_;
      if (rs[static_cast<std::size_t>(i)] <= 0.0 || rd[static_cast<std::size_t>(j)] <= 0.0) continue;
      double f = std::min(rs[static_cast<std::size_t>(i)], rd[static_cast<std::size_t>(j)]);
      rs[static_cast<std::size_t>(i)] -= f;
      rd[static_cast<std::size_t>(j)] -= f;
      basis_.push_back({i, j, f});
    }

    // Union-find completion across components.
    std::vector<int> root(static_cast<std::size_t>(nodes_));
    std::iota(root.begin(), root.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (root[static_cast<std::size_t>(x)] != x) {
        root[static_cast<std::size_t>(x)] = root[static_cast<std::size_t>(root[static_cast<std::size_t>(x)])];
        x = root[static_cast<std::size_t>(x)];
      }
      return x;
    };
    int components = nodes_;
    for (const Arc& a : basis_) {
      int ra = find(a.i);
      int rb = find(m_ + a.j);
      if (ra != rb) {
        root[static_cast<std::size_t>(ra)] = rb;
        --components;
      }
    }
    for (int arc : order) {
      if (components == 1) break;
      int i = arc / n_;
      int j = arc % n_;
      int ra = find(i);
      int rb = find(m_ + j);
      if (ra != rb) {
        root[static_cast<std::size_t>(ra)] = rb;
        basis_.push_back({i, j, 0.0});
        --components;
      }
    }
    if (components != 1) {
      throw InternalError("transportation basis is not spanning");
    }
  }

  // Parent pointers, depths and duals from a BFS over the current basis.
  void rebuild_tree() {
    incidence_.assign(static_cast<std::size_t>(nodes_), {});
    for (int a = 0; a < static_cast<int>(basis_.size()); ++a) {
      incidence_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(a)].i)].push_back(a);
      incidence_[static_cast<std::size_t>(m_ + basis_[static_cast<std::size_t>(a)].j)].push_back(a);
    }
    parent_node_.assign(static_cast<std::size_t>(nodes_), -1);
    parent_arc_.assign(static_cast<std::size_t>(nodes_), -1);
    depth_.assign(static_cast<std::size_t>(nodes_), -1);
    potential_.assign(static_cast<std::size_t>(nodes_), 0.0);

    std::vector<int> queue{0};
    depth_[0] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (int a : incidence_[static_cast<std::size_t>(u)]) {
        const Arc& arc = basis_[static_cast<std::size_t>(a)];
        int w = (u == arc.i) ? m_ + arc.j : arc.i;
        if (depth_[static_cast<std::size_t>(w)] >= 0) continue;
        depth_[static_cast<std::size_t>(w)] = depth_[static_cast<std::size_t>(u)] + 1;
        parent_node_[static_cast<std::size_t>(w)] = u;
        parent_arc_[static_cast<std::size_t>(w)] = a;
        potential_[static_cast<std::size_t>(w)] =
            cost_at(arc.i, arc.j) - potential_[static_cast<std::size_t>(u)];
        queue.push_back(w);
      }
    }
    if (static_cast<int>(queue.size()) != nodes_) {
      throw InternalError("transportation basis lost connectivity");
    }
  }

  // Entering arc below -enter_tol_, or -1 when dual feasible. Dantzig rule
  // within a block in normal mode, first violation in Bland mode.
  int price(bool bland) {
    const long total = static_cast<long>(m_) * n_;
    const long block = std::max<long>(1024, total / 32);
    if (bland) cursor_ = 0;
    long best_arc = -1;
    double best_rc = -enter_tol_;
    long scanned = 0;
    long pos = cursor_;
    while (scanned < total) {
      int i = static_cast<int>(pos / n_);
      int j = static_cast<int>(pos % n_);
      double rc = cost_at(i, j) - potential_[static_cast<std::size_t>(i)] -
                  potential_[static_cast<std::size_t>(m_ + j)];
      if (rc < best_rc) {
        best_rc = rc;
        best_arc = pos;
        if (bland) break;
      }
      ++scanned;
      ++pos;
      if (pos == total) pos = 0;
      if (!bland && best_arc >= 0 && scanned % block == 0) break;
    }
    cursor_ = pos;
    return best_arc < 0 ? -1 : static_cast<int>(best_arc);
  }

  void pivot(int enter, bool bland) {
    const int ei = enter / n_;
    const int ej = enter % n_;

    // Tree path between the entering arc's endpoints. Arcs at even positions
    // along sink -> ... -> source lose flow when the entering arc gains.
    cycle_.clear();
    int a = m_ + ej;
    int b = ei;
    int da = depth_[static_cast<std::size_t>(a)];
    int db = depth_[static_cast<std::size_t>(b)];
    std::vector<int>& from_sink = path_a_;
    std::vector<int>& from_source = path_b_;
    from_sink.clear();
    from_source.clear();
    while (da > db) {
      from_sink.push_back(parent_arc_[static_cast<std::size_t>(a)]);
      a = parent_node_[static_cast<std::size_t>(a)];
      --da;
    }
    while (db > da) {
      from_source.push_back(parent_arc_[static_cast<std::size_t>(b)]);
      b = parent_node_[static_cast<std::size_t>(b)];
      --db;
    }
    while (a != b) {
      from_sink.push_back(parent_arc_[static_cast<std::size_t>(a)]);
      a = parent_node_[static_cast<std::size_t>(a)];
      from_source.push_back(parent_arc_[static_cast<std::size_t>(b)]);
      b = parent_node_[static_cast<std::size_t>(b)];
    }
    cycle_ = from_sink;
    cycle_.insert(cycle_.end(), from_source.rbegin(), from_source.rend());

    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t pos = 0; pos < cycle_.size(); pos += 2) {
      const Arc& arc = basis_[static_cast<std::size_t>(cycle_[pos])];
      bool better;
      if (bland) {
        long id = static_cast<long>(arc.i) * n_ + arc.j;
        long lid = leave < 0 ? -1
                             : static_cast<long>(basis_[static_cast<std::size_t>(leave)].i) * n_ +
                                   basis_[static_cast<std::size_t>(leave)].j;
        better = arc.flow < theta || (arc.flow == theta && id < lid);
      } else {
        better = arc.flow <= theta;  // last minimal arc wins
      }
      if (better) {
        theta = arc.flow;
        leave = cycle_[pos];
      }
    }
    if (leave < 0) {
      throw InternalError("transportation pivot found no leaving arc");
    }

    for (std::size_t pos = 0; pos < cycle_.size(); ++pos) {
      double& f = basis_[static_cast<std::size_t>(cycle_[pos])].flow;
      f += (pos % 2 == 0) ? -theta : theta;
      if (f < 0.0) f = 0.0;  // round-off on the blocking arc
    }
    basis_[static_cast<std::size_t>(leave)] = Arc{ei, ej, theta};
  }

  // Unique flows on the optimal tree for the unperturbed masses, by leaf
  // elimination. Tiny negative flows (perturbation residue) are clamped.
  void final_flows() {
    std::vector<double> residual(static_cast<std::size_t>(nodes_));
    for (int i = 0; i < m_; ++i) residual[static_cast<std::size_t>(i)] = supply_[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_; ++j) residual[static_cast<std::size_t>(m_ + j)] = demand_[static_cast<std::size_t>(j)];

    incidence_.assign(static_cast<std::size_t>(nodes_), {});
    for (int a = 0; a < static_cast<int>(basis_.size()); ++a) {
      incidence_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(a)].i)].push_back(a);
      incidence_[static_cast<std::size_t>(m_ + basis_[static_cast<std::size_t>(a)].j)].push_back(a);
    }
    std::vector<int> degree(static_cast<std::size_t>(nodes_));
    std::vector<char> arc_done(basis_.size(), 0);
    std::vector<int> leaves;
    for (int u = 0; u < nodes_; ++u) {
      degree[static_cast<std::size_t>(u)] = static_cast<int>(incidence_[static_cast<std::size_t>(u)].size());
      if (degree[static_cast<std::size_t>(u)] == 1) leaves.push_back(u);
    }
    std::vector<char> node_done(static_cast<std::size_t>(nodes_), 0);
    for (std::size_t head = 0; head < leaves.size(); ++head) {
      int u = leaves[head];
      if (node_done[static_cast<std::size_t>(u)]) continue;
      int arc = -1;
      for (int a : incidence_[static_cast<std::size_t>(u)]) {
        if (!arc_done[static_cast<std::size_t>(a)]) arc = a;
      }
      if (arc < 0) continue;  // last node standing
      Arc& e = basis_[static_cast<std::size_t>(arc)];
      int other = (u == e.i) ? m_ + e.j : e.i;
      e.flow = residual[static_cast<std::size_t>(u)];
      residual[static_cast<std::size_t>(other)] -= residual[static_cast<std::size_t>(u)];
      residual[static_cast<std::size_t>(u)] = 0.0;
      arc_done[static_cast<std::size_t>(arc)] = 1;
      node_done[static_cast<std::size_t>(u)] = 1;
      if (--degree[static_cast<std::size_t>(other)] == 1 && !node_done[static_cast<std::size_t>(other)]) {
        leaves.push_back(other);
      }
    }

    objective_ = 0.0;
    for (Arc& a : basis_) {
      if (a.flow < 0.0) a.flow = 0.0;
      objective_ += a.flow * cost_at(a.i, a.j);
    }
  }

  // Feasibility of the emitted flows and dual feasibility of the tree.
  void verify() const {
    double total = sum_of(supply_);
    double tol = kBalanceTol * std::max(total, 1e-300);
    std::vector<double> row(static_cast<std::size_t>(m_), 0.0);
    std::vector<double> col(static_cast<std::size_t>(n_), 0.0);
    for (const Arc& a : basis_) {
      row[static_cast<std::size_t>(a.i)] += a.flow;
      col[static_cast<std::size_t>(a.j)] += a.flow;
    }
    for (int i = 0; i < m_; ++i) {
      if (std::abs(row[static_cast<std::size_t>(i)] - supply_[static_cast<std::size_t>(i)]) > tol) {
        throw InternalError("transport plan violates a supply constraint");
      }
    }
    for (int j = 0; j < n_; ++j) {
      if (std::abs(col[static_cast<std::size_t>(j)] - demand_[static_cast<std::size_t>(j)]) > tol) {
        throw InternalError("transport plan violates a demand constraint");
      }
    }
    double opt_tol = 1e-9 * (cmax_ + 1.0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        double rc = cost_at(i, j) - potential_[static_cast<std::size_t>(i)] -
                    potential_[static_cast<std::size_t>(m_ + j)];
        if (rc < -opt_tol) {
          throw InternalError("transport plan failed the optimality check");
        }
      }
    }
  }

  int m_;
  int n_;
  int nodes_;
  std::vector<double> cost_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> pert_supply_;
  std::vector<double> pert_demand_;
  double cmax_ = 0.0;
  double enter_tol_ = 0.0;
  double objective_ = 0.0;
  long cursor_ = 0;

  std::vector<Arc> basis_;
  std::vector<std::vector<int>> incidence_;
  std::vector<int> parent_node_, parent_arc_, depth_;
  std::vector<double> potential_;
  std::vector<int> cycle_, path_a_, path_b_;
};

}  // namespace

std::pair<std::vector<double>, std::vector<double>> cancel_common_mass(
    const std::vector<double>& supply, const std::vector<double>& demand) {
  if (supply.size() != demand.size()) {
    throw ValidationError(ValidationCode::GridMismatch, "mass vectors differ in length");
  }
  require_balance(sum_of(supply), sum_of(demand));
  std::vector<double> s = supply;
  std::vector<double> d = demand;
  for (std::size_t j = 0; j < s.size(); ++j) {
    double common = std::min(s[j], d[j]);
    s[j] -= common;
    d[j] -= common;
  }
  return {std::move(s), std::move(d)};
}

TransportPlan solve_transport(const CostMatrix& cost, const std::vector<double>& supply,
                              const std::vector<double>& demand) {
  const int J = cost.size();
  if (static_cast<int>(supply.size()) != J || static_cast<int>(demand.size()) != J) {
    throw ValidationError(ValidationCode::GridMismatch,
                          "mass vectors do not match the cost matrix");
  }
  for (double v : supply) {
    if (v < 0.0) throw ValidationError(ValidationCode::BadParameter, "negative supply mass");
  }
  for (double v : demand) {
    if (v < 0.0) throw ValidationError(ValidationCode::BadParameter, "negative demand mass");
  }
  require_balance(sum_of(supply), sum_of(demand));

  std::vector<int> sources, sinks;
  for (int j = 0; j < J; ++j) {
    if (supply[static_cast<std::size_t>(j)] > 0.0) sources.push_back(j);
  }
  for (int k = 0; k < J; ++k) {
    if (demand[static_cast<std::size_t>(k)] > 0.0) sinks.push_back(k);
  }

  TransportPlan plan;
  if (sources.empty() || sinks.empty()) {
    return plan;  // nothing to move
  }

  const int m = static_cast<int>(sources.size());
  const int n = static_cast<int>(sinks.size());
  if (static_cast<long>(m) * n > 16'000'000) {
    throw ValidationError(ValidationCode::SizeGuard,
                          std::to_string(m) + " sources x " + std::to_string(n) +
                              " sinks exceeds the dense solver cap (cancel common mass first?)");
  }
  std::vector<double> sub_cost(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  for (int a = 0; a < m; ++a) {
    auto row = cost.row(sources[static_cast<std::size_t>(a)]);
    for (int b = 0; b < n; ++b) {
      sub_cost[static_cast<std::size_t>(a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b)] =
          row[static_cast<std::size_t>(sinks[static_cast<std::size_t>(b)])];
    }
  }
  std::vector<double> s(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(n));
  for (int a = 0; a < m; ++a) s[static_cast<std::size_t>(a)] = supply[static_cast<std::size_t>(sources[static_cast<std::size_t>(a)])];
  for (int b = 0; b < n; ++b) d[static_cast<std::size_t>(b)] = demand[static_cast<std::size_t>(sinks[static_cast<std::size_t>(b)])];

  TransportationSimplex simplex(m, n, std::move(sub_cost), std::move(s), std::move(d));
  simplex.solve();

  plan.objective = simplex.objective();
  plan.shipments.reserve(simplex.basis().size());
  for (const auto& arc : simplex.basis()) {
    if (arc.flow > 0.0) {
      plan.shipments.push_back({sources[static_cast<std::size_t>(arc.i)],
                                sinks[static_cast<std::size_t>(arc.j)], arc.flow});
    }
  }
  return plan;
}

TransportPlan transport_between(const std::vector<double>& rho_s, const std::vector<double>& rho_d,
                                const CostMatrix& cost, double dx, const DistanceOptions& options) {
  const int J = cost.size();
  if (static_cast<int>(rho_s.size()) != J || static_cast<int>(rho_d.size()) != J) {
    throw ValidationError(ValidationCode::GridMismatch,
                          "density fields do not match the cost matrix");
  }
  if (!(dx > 0.0)) {
    throw ValidationError(ValidationCode::BadParameter, "dx must be > 0");
  }
  std::vector<double> supply(rho_s.size()), demand(rho_d.size());
  for (std::size_t j = 0; j < rho_s.size(); ++j) supply[j] = rho_s[j] * dx;
  for (std::size_t j = 0; j < rho_d.size(); ++j) demand[j] = rho_d[j] * dx;

  double ms = sum_of(supply);
  double md = sum_of(demand);
  if (ms == 0.0 && md == 0.0) {
    std::fprintf(stderr, "lwrnet: warning: both fields carry zero mass, distance is 0\n");
    return {};
  }
  if (options.renormalize && md > 0.0) {
    double scale = ms / md;
    for (double& v : demand) v *= scale;
  } else {
    require_balance(ms, md);
  }

  auto [s, d] = cancel_common_mass(supply, demand);
  double rs = sum_of(s);
  double rd = sum_of(d);
  // Fields that agree within the balance tolerance cancel almost completely;
  // the leftover is indistinguishable from zero distance.
  if (std::max(rs, rd) <= kBalanceTol * std::max(ms, md)) {
    return {};
  }
  // The inputs' tiny imbalance survives cancellation undiminished and can be
  // large relative to what is left, so square it up on the demand side. The
  // objective moves by at most the imbalance times the largest cost.
  if (rd > 0.0 && rs != rd) {
    double scale = rs / rd;
    for (double& v : d) v *= scale;
  }
  TransportPlan plan = solve_transport(cost, s, d);
  return plan;
}

double wasserstein_grid(const std::vector<double>& rho_s, const std::vector<double>& rho_d,
                        const CostMatrix& cost, double dx, const DistanceOptions& options) {
  double ms = 0.0;
  for (double r : rho_s) ms += r * dx;
  TransportPlan plan = transport_between(rho_s, rho_d, cost, dx, options);
  if (!options.normalized) return plan.objective;
  if (ms == 0.0) return 0.0;
  return plan.objective / ms;
}

}  // namespace lwrnet
