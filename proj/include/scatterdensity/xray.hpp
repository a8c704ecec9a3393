#pragma once

#include <array>
#include <cstdint>

#include "scatterdensity/geometry.hpp"
#include "scatterdensity/potential.hpp"

namespace scatterdensity {

/// A point (omega, eta) of phase space, eta given by coordinates in the
/// frame basis so that it lies in the hyperplane orthogonal to omega.
struct XrayQuery {
  Frame frame;
  std::array<double, 2> eta_coords{0.0, 0.0};

  Vec3 eta() const { return frame.point(eta_coords); }
};

/// Default absolute error target for quadrature-based line integrals.
inline constexpr double kXrayTolerance = 1e-10;

/// X(omega, eta) = -1/2 \int V(t omega + eta) dt.
/// Closed forms for gaussian families and power_decay; smooth_bump integrates
/// over the chord through its support.
double xray(const PotentialSpec& p, const XrayQuery& q);
double xray(const PotentialSpec& p, const Vec3& omega, const Vec3& eta);

/// Generic path: adaptive line quadrature with a certified truncation
/// |t| <= T derived from ||V||_{X_rho}. Works for every family; used to
/// cross-check the closed forms.
double xray_quadrature(const PotentialSpec& p, const Vec3& omega, const Vec3& eta,
                       double abs_tol = kXrayTolerance);

/// X for a radial potential at impact parameter b = |eta|, by 1-D quadrature
/// along the line. Throws NotRadial for off-center potentials.
double xray_radial(const PotentialSpec& p, double b, double abs_tol = kXrayTolerance);

/// Certified envelope |X(omega, eta)| <= constant * <eta>^{1-rho}, from
/// |V(x)| <= ||V||_{X_rho} <x>^{-rho} integrated along the line.
struct XrayBound {
  double rho = 2.0;
  double constant = 0.0;

  double at(double eta_norm) const;
  /// Smallest R with at(R) <= threshold.
  double radius_below(double threshold) const;
};

XrayBound certified_bound(const PotentialSpec& p, double rho);

/// The bound (over a few admissible rho) whose envelope drops below
/// `threshold` soonest. `min_rho` restricts the candidates, e.g. to keep
/// moment tails integrable.
XrayBound tightest_bound(const PotentialSpec& p, double threshold, double min_rho = 1.0);

struct DecayReport {
  double max_ratio = 0.0;          // max |X| (1+|eta|)^{rho-1} over n samples
  double max_ratio_doubled = 0.0;  // same over 2n samples (superset)
  Vec3 worst_omega = Vec3::UnitX();
  Vec3 worst_eta = Vec3::Zero();
  bool stable = true;              // finite and doubled/original <= 1.05
};

DecayReport decay_check(const PotentialSpec& p, double rho, int samples, std::uint64_t seed = 1);

}  // namespace scatterdensity
