#pragma once

#include <utility>
#include <vector>

#include "scatterdensity/geometry.hpp"
#include "scatterdensity/potential.hpp"

namespace scatterdensity {

/// Smooth test function supported in [center - half_width, center + half_width]:
///   psi(t) = height * exp(-1 / (1 - ((t - center)/half_width)^2)).
/// The support must exclude 0.
struct BumpSpec {
  double center = -0.5;
  double half_width = 0.2;
  double height = 1.0;

  double operator()(double t) const;
  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
  /// Throws InvalidArgument for w <= 0 and IntervalContainsZero when 0 is in the support.
  void validate() const;
};

/// Closed interval [lo, hi]; either end may be infinite. Must not contain 0.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

void validate_interval(const Interval& iv);

struct MeasureOptions {
  /// Outer quadrature over omega, only used for non-radial potentials.
  GridResolution outer_2d{128, 0};
  GridResolution outer_3d{24, 48};
  /// Number of polar angles on each 2-D hyperplane (d = 3, non-radial).
  int inner_angles = 64;
  /// Target for the truncated tail of moment integrals.
  double tail_eps = 1e-13;
  /// Gauss-Legendre order per radial panel.
  int order = 16;
  /// Radial panels per feature length for smooth integrands.
  int panels_per_length = 4;
  /// Crossing resolution for indicator integrals.
  double crossing_tol = 1e-11;
};

/// Quadrature value plus an error estimate (refinement difference + tail bound).
struct MeasureValue {
  double value = 0.0;
  double error = 0.0;
};

/// \int t^ell dmu(t) = (2 pi)^{1-d} \int_{S^{d-1}} \int_{Lambda_omega} X(omega, eta)^ell deta domega.
/// Throws MomentMayDiverge when ell <= (d-1)/(rho-1).
MeasureValue mu_moment(const PotentialSpec& p, int ell, const MeasureOptions& opts = {});

/// mu([lo, hi]) = (2 pi)^{1-d} meas{(omega, eta) : lo <= X <= hi}.
MeasureValue mu_interval(const PotentialSpec& p, const Interval& iv, const MeasureOptions& opts = {});

/// \int psi dmu.
MeasureValue mu_psi(const PotentialSpec& p, const BumpSpec& psi, const MeasureOptions& opts = {});

/// (b, X(b)) samples for radial potentials, b in [0, b_max].
std::vector<std::pair<double, double>> radial_profile(const PotentialSpec& p, int samples,
                                                      double b_max);

}  // namespace scatterdensity
