#pragma once

// Piecewise-linear (triangular) fundamental diagram on normalized densities:
// flux rises linearly to max_flux at the critical density and falls linearly
// to zero at density 1.

#include "lwrnet/errors.hpp"

namespace lwrnet {

class FundamentalDiagram {
 public:
  FundamentalDiagram(double critical_density, double max_flux)
      : sigma_(critical_density), f_max_(max_flux) {
    if (!(sigma_ > 0.0) || !(sigma_ < 1.0)) {
      throw ValidationError(ValidationCode::BadParameter, "critical density must lie in (0,1)");
    }
    if (!(f_max_ > 0.0)) {
      throw ValidationError(ValidationCode::BadParameter, "max flux must be > 0");
    }
  }

  double critical_density() const { return sigma_; }
  double max_flux() const { return f_max_; }

  // Flux at density rho; rho must lie in [0,1] up to 1e-12.
  double flux(double rho) const {
    rho = checked(rho);
    if (rho <= sigma_) return f_max_ / sigma_ * rho;
    return f_max_ / (sigma_ - 1.0) * (rho - 1.0);
  }

  // Godunov numerical flux across an interface with upstream density
  // `left` and downstream density `right`.
  double godunov_flux(double left, double right) const {
    left = checked(left);
    right = checked(right);
    if (left <= right) {
      double fl = flux_unchecked(left);
      double fr = flux_unchecked(right);
      return fl < fr ? fl : fr;
    }
    if (left < sigma_) return flux_unchecked(left);
    if (right <= sigma_) return f_max_;  // left >= sigma >= right
    return flux_unchecked(right);
  }

  // Fastest characteristic speed of the diagram (used for the CFL bound).
  double max_wave_speed() const {
    double forward = f_max_ / sigma_;
    double backward = f_max_ / (1.0 - sigma_);
    return forward > backward ? forward : backward;
  }

  friend bool operator==(const FundamentalDiagram&, const FundamentalDiagram&) = default;

 private:
  double checked(double rho) const {
    if (rho < -1e-12 || rho > 1.0 + 1e-12) {
      throw ValidationError(ValidationCode::BadParameter, "density outside [0,1]");
    }
    if (rho < 0.0) return 0.0;
    if (rho > 1.0) return 1.0;
    return rho;
  }

  double flux_unchecked(double rho) const {
    if (rho <= sigma_) return f_max_ / sigma_ * rho;
    return f_max_ / (sigma_ - 1.0) * (rho - 1.0);
  }

  double sigma_;
  double f_max_;
};

// Largest stable time step scaled by a safety factor in (0,1]:
// dt = safety * dx / max wave speed.
inline double cfl_dt(const FundamentalDiagram& fd, double dx, double safety = 0.9) {
  if (!(dx > 0.0)) {
    throw ValidationError(ValidationCode::BadParameter, "dx must be > 0");
  }
  if (!(safety > 0.0) || safety > 1.0) {
    throw ValidationError(ValidationCode::BadParameter, "CFL safety factor must lie in (0,1]");
  }
  return safety * dx / fd.max_wave_speed();
}

}  // namespace lwrnet
