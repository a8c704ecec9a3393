#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatterdensity/geometry.hpp"

namespace scatterdensity {

enum class Family { gaussian, gaussian_sum, smooth_bump, power_decay };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// One term A * exp(-|x - c|^2 / a^2).
struct GaussianTerm {
  double amplitude = 1.0;
  double width = 1.0;
  Vec3 center = Vec3::Zero();
};

/// Immutable description of a real, continuous potential on R^d, d in {2, 3}.
///
/// Families:
///   gaussian      A exp(-|x-c|^2/a^2)
///   gaussian_sum  sum of gaussian terms
///   smooth_bump   A exp(-1/(1-|(x-c)/R|^2)) inside the ball of radius R, 0 outside
///   power_decay   A <x>^{-rho},  <x> = (1+|x|^2)^{1/2}
///
/// Fourier transforms use the non-unitary convention
///   V^(xi) = \int e^{-i<xi,x>} V(x) dx
/// throughout the library.
class PotentialSpec {
 public:
  static PotentialSpec gaussian(int dim, double amplitude, double width, Vec3 center = Vec3::Zero());
  static PotentialSpec gaussian_sum(int dim, std::vector<GaussianTerm> terms);
  static PotentialSpec smooth_bump(int dim, double amplitude, double radius,
                                   Vec3 center = Vec3::Zero());
  static PotentialSpec power_decay(int dim, double amplitude, double rho);
  static PotentialSpec zero(int dim) { return gaussian(dim, 0.0, 1.0); }

  static PotentialSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Family family() const { return family_; }
  int dim() const { return dim_; }

  /// Gaussian terms (gaussian / gaussian_sum only).
  const std::vector<GaussianTerm>& terms() const { return terms_; }
  /// Amplitude for single-amplitude families (smooth_bump, power_decay, gaussian).
  double amplitude() const;
  double radius() const { return radius_; }
  const Vec3& center() const { return center_; }

  /// Decay exponent rho in |V(x)| <= C <x>^{-rho}. Infinite for the
  /// gaussian and compactly supported families.
  double decay_exponent() const;

  bool is_zero() const;
  bool is_radial() const;

  /// c * V.
  PotentialSpec scaled(double c) const;

 private:
  Family family_ = Family::gaussian;
  int dim_ = 2;
  std::vector<GaussianTerm> terms_;
  double amplitude_ = 0.0;
  double radius_ = 0.0;
  double rho_ = std::numeric_limits<double>::infinity();
  Vec3 center_ = Vec3::Zero();
};

/// V(x).
double eval(const PotentialSpec& p, const Vec3& x);

/// V as a function of |x - c| for radial families (no radial check).
double eval_radial(const PotentialSpec& p, double r);

/// Absolute-error target of the numerical transform path (smooth_bump).
inline constexpr double kFourierTolerance = 1e-10;

/// V^(xi). Closed form for the gaussian families and power_decay (Bessel K),
/// adaptive radial quadrature for smooth_bump. Throws NumericalFailure if
/// the transform is unbounded (power_decay with rho <= d at xi = 0) or the
/// quadrature misses its target.
std::complex<double> fourier(const PotentialSpec& p, const Vec3& xi);

/// Radial part of V^ for families centered at the origin: V^(xi) = profile(|xi|).
double fourier_radial(const PotentialSpec& p, double xi_norm);

struct XrhoNorm {
  double value = 0.0;
  double argmax_radius = 0.0;
};

/// sup_x |V(x)| <x>^rho by ray sampling plus Brent refinement.
/// Throws UnboundedNorm when the product is still increasing at the search cutoff.
XrhoNorm xrho_norm(const PotentialSpec& p, double rho);

}  // namespace scatterdensity
