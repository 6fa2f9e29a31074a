#pragma once

// Closed-form distances on a single interval: the exact 1D transport
// distance through cumulative functions, and the mass-normalized discrete L1
// distance between two fields on the same grid. Both double as oracles for
// the graph-based solver.

#include <cstdint>
#include <functional>
#include <vector>

#include "lwrnet/errors.hpp"

namespace lwrnet {

// Nonnegative density on an interval [a, b], either a callable or a
// piecewise-constant vector on a uniform grid.
class LineDensity {
 public:
  static LineDensity from_function(double a, double b, std::function<double(double)> f);
  static LineDensity piecewise_constant(double a, double b, std::vector<double> values);
  // Uniform bump of the given mass centered at `center`, for concentrated
  // (delta-like) test masses; must fit inside [a, b].
  static LineDensity bump(double a, double b, double center, double width, double mass);

  double a() const { return a_; }
  double b() const { return b_; }
  double operator()(double x) const;

 private:
  LineDensity(double a, double b) : a_(a), b_(b) {}

  double a_ = 0.0;
  double b_ = 0.0;
  std::function<double(double)> f_;
  std::vector<double> values_;  // used when f_ is empty
};

// Exact 1D transport distance: the integral of |F_s - F_d| between the
// cumulative functions, by the midpoint rule on `quadrature_cells` cells.
// Requires a common interval and equal masses (1e-9 relative, measured with
// the same quadrature).
double w1_line(const LineDensity& rho_s, const LineDensity& rho_d, std::int64_t quadrature_cells);

// Mass-normalized discrete L1 distance: dx / M * sum |rho_s - rho_d| with
// M the supply mass. Fields must share the grid and carry positive mass.
double l1_discrete(const std::vector<double>& rho_s, const std::vector<double>& rho_d, double dx);

}  // namespace lwrnet
