#include "lwrnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lwrnet {

namespace {

constexpr double kBoxTol = 1e-12;
// Densities below this are flushed to exact zero, keeping long-draining
// roads out of the denormal range (the ratio rule then applies verbatim).
constexpr double kFlushTol = 1e-300;

const CellGrid& require_grid(const Scenario& scenario) {
  if (!scenario.grid) {
    throw ValidationError(ValidationCode::BadParameter, "scenario without a grid");
  }
  return *scenario.grid;
}

}  // namespace

JunctionLayout::JunctionLayout(const CellGrid& grid) {
  const MetricNetwork& net = grid.network();
  offsets_.reserve(static_cast<std::size_t>(net.vertex_count()) + 1);
  int total = 0;
  for (const auto& v : net.vertices()) {
    offsets_.push_back(total);
    total += v.n_in() * v.n_out();
  }
  offsets_.push_back(total);
}

DensityField init_subdensities(const std::vector<double>& rho0, const CellGrid& grid) {
  return init_subdensities(rho0, grid, grid.network());
}

DensityField init_subdensities(const std::vector<double>& rho0, const CellGrid& grid,
                               const MetricNetwork& net) {
  if (static_cast<int>(rho0.size()) != grid.total_cells()) {
    throw ValidationError(ValidationCode::GridMismatch,
                          "initial density has " + std::to_string(rho0.size()) + " cells, grid has " +
                              std::to_string(grid.total_cells()));
  }
  JunctionLayout layout(grid);
  DensityField f;
  f.rho = rho0;
  f.sub_in.assign(static_cast<std::size_t>(layout.total_paths()), 0.0);
  f.sub_out.assign(static_cast<std::size_t>(layout.total_paths()), 0.0);
  for (int vi = 0; vi < net.vertex_count(); ++vi) {
    const VertexTopology& v = net.vertex_by_index(vi);
    const int n_in = v.n_in();
    const int n_out = v.n_out();
    for (int r = 0; r < n_in; ++r) {
      double rho_last = rho0[static_cast<std::size_t>(grid.last_cell(v.in_edges[static_cast<std::size_t>(r)]))];
      for (int s = 0; s < n_out; ++s) {
        f.sub_in[static_cast<std::size_t>(layout.path_index(vi, r, s, n_out))] = v.alpha_at(r, s) * rho_last;
      }
    }
    for (int s = 0; s < n_out; ++s) {
      double rho_first = rho0[static_cast<std::size_t>(grid.first_cell(v.out_edges[static_cast<std::size_t>(s)]))];
      double share = rho_first / static_cast<double>(n_in);
      for (int r = 0; r < n_in; ++r) {
        f.sub_out[static_cast<std::size_t>(layout.path_index(vi, r, s, n_out))] = share;
      }
    }
  }
  return f;
}

Simulator::Simulator(const Scenario& scenario)
    : grid_(scenario.grid), layout_(require_grid(scenario)) {
  const MetricNetwork& base = grid_->network();

  if (!scenario.per_edge_fd.empty() &&
      static_cast<int>(scenario.per_edge_fd.size()) != base.edge_count()) {
    throw ValidationError(ValidationCode::BadParameter,
                          "per-edge diagrams must cover every edge");
  }
  edge_fd_ = scenario.per_edge_fd.empty()
                 ? std::vector<FundamentalDiagram>(static_cast<std::size_t>(base.edge_count()), scenario.fd)
                 : scenario.per_edge_fd;

  // Closures only reshape distribution matrices; topology and grid stay put.
  if (scenario.closures.empty()) {
    net_ = grid_->network_ptr();
  } else {
    MetricNetwork closed = base;
    for (EdgeId e : scenario.closures) closed = closed.with_closed_edge(e);
    net_ = std::make_shared<const MetricNetwork>(std::move(closed));
  }

  if (!net_->closed_flow_network()) {
    throw ValidationError(ValidationCode::SourceOrSinkVertex,
                          "simulation needs every junction to have incoming and outgoing roads");
  }
  for (int e = 0; e < net_->edge_count(); ++e) {
    if (grid_->cells_on_edge(e) < 2) {
      throw ValidationError(ValidationCode::EdgeTooShort,
                            "edge " + std::to_string(net_->edge_by_index(e).id) +
                                " needs at least 2 cells for simulation");
    }
  }

  if (!(scenario.t_final >= 0.0)) {
    throw ValidationError(ValidationCode::BadParameter, "t_final must be >= 0");
  }

  double max_speed = 0.0;
  for (const auto& fd : edge_fd_) max_speed = std::max(max_speed, fd.max_wave_speed());
  double dt_limit = grid_->dx() / max_speed;
  if (scenario.dt > 0.0) {
    dt_ = scenario.dt;
    if (dt_ > dt_limit * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt " << dt_ << " exceeds the CFL bound " << dt_limit;
      throw ValidationError(ValidationCode::BadParameter, os.str());
    }
  } else {
    if (!(scenario.dt_safety > 0.0) || scenario.dt_safety > 1.0) {
      throw ValidationError(ValidationCode::BadParameter, "CFL safety factor must lie in (0,1]");
    }
    dt_ = scenario.dt_safety * dt_limit;
  }

  if (scenario.initial) {
    state_ = *scenario.initial;
    state_.time = 0.0;
    state_.step = 0;
  } else {
    state_ = init_subdensities(scenario.rho0, *grid_, *net_);
  }
  validate_field(state_);
  next_ = state_;

  int max_in = 0;
  int max_out = 0;
  for (const auto& v : net_->vertices()) {
    max_in = std::max(max_in, v.n_in());
    max_out = std::max(max_out, v.n_out());
  }
  in_flux_.resize(static_cast<std::size_t>(max_in));
  rho_last_.resize(static_cast<std::size_t>(max_in));
  last_cell_.resize(static_cast<std::size_t>(max_in));
  out_flux_.resize(static_cast<std::size_t>(max_out));
  rho_first_.resize(static_cast<std::size_t>(max_out));
  first_cell_.resize(static_cast<std::size_t>(max_out));
}

void Simulator::validate_field(const DensityField& f) const {
  const MetricNetwork& net = *net_;
  if (static_cast<int>(f.rho.size()) != grid_->total_cells() ||
      static_cast<int>(f.sub_in.size()) != layout_.total_paths() ||
      static_cast<int>(f.sub_out.size()) != layout_.total_paths()) {
    throw ValidationError(ValidationCode::GridMismatch, "density field does not match the grid");
  }
  for (double r : f.rho) {
    if (r < -kBoxTol || r > 1.0 + kBoxTol) {
      throw ValidationError(ValidationCode::BadParameter, "density outside [0,1]");
    }
  }
  for (int vi = 0; vi < net.vertex_count(); ++vi) {
    const VertexTopology& v = net.vertex_by_index(vi);
    const int n_in = v.n_in();
    const int n_out = v.n_out();
    for (int r = 0; r < n_in; ++r) {
      double sum = 0.0;
      for (int s = 0; s < n_out; ++s) {
        double mu = f.sub_in[static_cast<std::size_t>(layout_.path_index(vi, r, s, n_out))];
        if (mu < -kBoxTol) {
          throw ValidationError(ValidationCode::BadParameter, "negative sub-density");
        }
        sum += mu;
      }
      double rho = f.rho[static_cast<std::size_t>(grid_->last_cell(v.in_edges[static_cast<std::size_t>(r)]))];
      if (std::abs(sum - rho) > 1e-12) {
        throw ValidationError(ValidationCode::BadParameter,
                              "sub-densities do not sum to the cell total");
      }
    }
    for (int s = 0; s < n_out; ++s) {
      double sum = 0.0;
      for (int r = 0; r < n_in; ++r) {
        double mu = f.sub_out[static_cast<std::size_t>(layout_.path_index(vi, r, s, n_out))];
        if (mu < -kBoxTol) {
          throw ValidationError(ValidationCode::BadParameter, "negative sub-density");
        }
        sum += mu;
      }
      double rho = f.rho[static_cast<std::size_t>(grid_->first_cell(v.out_edges[static_cast<std::size_t>(s)]))];
      if (std::abs(sum - rho) > 1e-12) {
        throw ValidationError(ValidationCode::BadParameter,
                              "sub-densities do not sum to the cell total");
      }
    }
  }
}

void Simulator::advance() {
  const CellGrid& grid = *grid_;
  const MetricNetwork& net = *net_;
  const double lam = dt_ / grid.dx();
  const std::vector<double>& rho = state_.rho;

  // Interior cells: three-point Godunov update.
  for (int e = 0; e < net.edge_count(); ++e) {
    const FundamentalDiagram& fd = edge_fd_[static_cast<std::size_t>(e)];
    const int first = grid.first_cell(e);
    const int count = grid.cells_on_edge(e);
    double flux_left = fd.godunov_flux(rho[static_cast<std::size_t>(first)],
                                       rho[static_cast<std::size_t>(first) + 1]);
    for (int j = 2; j <= count - 1; ++j) {
      const std::size_t c = static_cast<std::size_t>(first + j - 1);
      double flux_right = fd.godunov_flux(rho[c], rho[c + 1]);
      next_.rho[c] = rho[c] - lam * (flux_right - flux_left);
      flux_left = flux_right;
    }
  }

  // Junction-owned cells: per-path systems, then totals by summation.
  for (int vi = 0; vi < net.vertex_count(); ++vi) {
    const VertexTopology& v = net.vertex_by_index(vi);
    const int n_in = v.n_in();
    const int n_out = v.n_out();
    const int off = layout_.path_offset(vi);

    // Per incoming edge: last cell and the flux arriving from its neighbor.
    for (int r = 0; r < n_in; ++r) {
      const int e = v.in_edges[static_cast<std::size_t>(r)];
      const int lc = grid.last_cell(e);
      last_cell_[static_cast<std::size_t>(r)] = lc;
      rho_last_[static_cast<std::size_t>(r)] = rho[static_cast<std::size_t>(lc)];
      in_flux_[static_cast<std::size_t>(r)] = edge_fd_[static_cast<std::size_t>(e)].godunov_flux(
          rho[static_cast<std::size_t>(lc) - 1], rho[static_cast<std::size_t>(lc)]);
    }
    // Per outgoing edge: first cell and the flux leaving toward its neighbor.
    for (int s = 0; s < n_out; ++s) {
      const int e = v.out_edges[static_cast<std::size_t>(s)];
      const int fc = grid.first_cell(e);
      first_cell_[static_cast<std::size_t>(s)] = fc;
      rho_first_[static_cast<std::size_t>(s)] = rho[static_cast<std::size_t>(fc)];
      out_flux_[static_cast<std::size_t>(s)] = edge_fd_[static_cast<std::size_t>(e)].godunov_flux(
          rho[static_cast<std::size_t>(fc)], rho[static_cast<std::size_t>(fc) + 1]);
    }

    for (int r = 0; r < n_in; ++r) {
      const int e_in = v.in_edges[static_cast<std::size_t>(r)];
      const FundamentalDiagram& fd_up = edge_fd_[static_cast<std::size_t>(e_in)];
      const double rho_last = rho_last_[static_cast<std::size_t>(r)];
      for (int s = 0; s < n_out; ++s) {
        const std::size_t idx = static_cast<std::size_t>(off + r * n_out + s);
        // Flux from the incoming edge toward outgoing edge s, evaluated on
        // cell totals with the upstream diagram. Ratios mu/rho are taken as
        // 0 on empty cells and stay bounded by 1 even for tiny totals.
        const double rho_first = rho_first_[static_cast<std::size_t>(s)];
        const double cross = fd_up.godunov_flux(rho_last, rho_first);
        const double ratio_in = rho_last > 0.0 ? state_.sub_in[idx] / rho_last : 0.0;
        const double ratio_out = rho_first > 0.0 ? state_.sub_out[idx] / rho_first : 0.0;
        next_.sub_in[idx] = state_.sub_in[idx] -
                            lam * (ratio_in * cross - v.alpha_at(r, s) * in_flux_[static_cast<std::size_t>(r)]);
        next_.sub_out[idx] =
            state_.sub_out[idx] -
            lam * (ratio_out * out_flux_[static_cast<std::size_t>(s)] - ratio_in * cross);
      }
    }

    // Clamp round-off and rebuild the owned cell totals from the paths.
    auto report_negative = [&](int r, int s, const char* side, double mu) {
      std::ostringstream os;
      os << "sub-density " << mu << " on the " << side << " side of vertex " << v.id << " path ("
         << net.edge_by_index(v.in_edges[static_cast<std::size_t>(r)]).id << " -> "
         << net.edge_by_index(v.out_edges[static_cast<std::size_t>(s)]).id << ") at step "
         << state_.step + 1;
      throw CflError(os.str());
    };
    for (int r = 0; r < n_in; ++r) {
      double sum = 0.0;
      for (int s = 0; s < n_out; ++s) {
        double& mu = next_.sub_in[static_cast<std::size_t>(off + r * n_out + s)];
        if (mu < kFlushTol) {
          if (mu < -kBoxTol) report_negative(r, s, "incoming", mu);
          mu = 0.0;
        }
        sum += mu;
      }
      next_.rho[static_cast<std::size_t>(last_cell_[static_cast<std::size_t>(r)])] = sum;
    }
    for (int s = 0; s < n_out; ++s) {
      double sum = 0.0;
      for (int r = 0; r < n_in; ++r) {
        double& mu = next_.sub_out[static_cast<std::size_t>(off + r * n_out + s)];
        if (mu < kFlushTol) {
          if (mu < -kBoxTol) report_negative(r, s, "outgoing", mu);
          mu = 0.0;
        }
        sum += mu;
      }
      next_.rho[static_cast<std::size_t>(first_cell_[static_cast<std::size_t>(s)])] = sum;
    }
  }

  // Box check over all cells.
  for (int c = 0; c < grid.total_cells(); ++c) {
    double& r = next_.rho[static_cast<std::size_t>(c)];
    if (r < -kBoxTol || r > 1.0 + kBoxTol) {
      auto [e, j] = grid.locate(c);
      std::ostringstream os;
      os << "density " << r << " outside [0,1] on edge " << net.edge_by_index(e).id << " cell " << j
         << " at step " << state_.step + 1 << " (time step too large?)";
      throw CflError(os.str());
    }
    if (r < kFlushTol) r = 0.0;
    if (r > 1.0) r = 1.0;
  }

  next_.time = state_.time + dt_;
  next_.step = state_.step + 1;
  std::swap(state_, next_);
}

void Simulator::advance_to_step(std::int64_t n) {
  while (state_.step < n) advance();
}

std::int64_t Simulator::step_for_time(double t) const {
  if (t < 0.0) {
    throw ValidationError(ValidationCode::BadParameter, "negative snapshot time");
  }
  return static_cast<std::int64_t>(std::floor(t / dt_ + 1e-9));
}

DensityField step(const DensityField& state, const Scenario& scenario) {
  Scenario one = scenario;
  one.initial = state;
  Simulator sim(one);
  sim.advance();
  return sim.state();
}

Trajectory simulate(const Scenario& scenario, const std::vector<double>& snapshot_times) {
  Simulator sim(scenario);
  const std::int64_t n_steps = sim.step_for_time(scenario.t_final);

  struct Request {
    std::int64_t step;
    double time;
    std::size_t order;
  };
  std::vector<Request> requests;
  requests.reserve(snapshot_times.size());
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    double t = snapshot_times[i];
    requests.push_back({std::min(sim.step_for_time(t), n_steps), t, i});
  }
  std::sort(requests.begin(), requests.end(),
            [](const Request& a, const Request& b) { return a.step < b.step; });

  Trajectory out(snapshot_times.size());
  for (const Request& req : requests) {
    sim.advance_to_step(req.step);
    out[req.order] = Snapshot{req.time, sim.state()};
  }
  // Finish the run even when no snapshot asks for the final time.
  sim.advance_to_step(n_steps);
  return out;
}

double total_mass(const std::vector<double>& rho, double dx) {
  double sum = 0.0;
  for (double r : rho) sum += r;
  return sum * dx;
}

}  // namespace lwrnet
