#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace scatterdensity {

/// Points and directions are stored as 3-vectors in both supported
/// dimensions; for d = 2 the third component is always zero.
using Vec3 = Eigen::Vector3d;

/// Anti-diagonal guard: |omega + omega'| below this is treated as omega' = -omega.
inline constexpr double kAntiDiagonalGuard = 1e-6;

/// A unit direction together with an orthonormal basis of the hyperplane
/// orthogonal to it. Coordinates of a point eta in that hyperplane are taken
/// with respect to `basis`.
struct Frame {
  int dim = 2;
  Vec3 omega = Vec3::UnitX();
  std::array<Vec3, 2> basis{Vec3::UnitY(), Vec3::Zero()};

  int codim() const { return dim - 1; }

  /// eta = sum_i coords[i] * basis[i].
  Vec3 point(std::span<const double> coords) const;
  /// Coordinates of a vector already lying in the hyperplane.
  std::array<double, 2> coords(const Vec3& eta) const;
};

/// Deterministic frame for `omega` (renormalized). d = 2 uses the
/// counter-clockwise perpendicular; d = 3 completes with the x axis, falling
/// back to the y axis when omega is within ~25 degrees of x.
Frame frame(const Vec3& omega, int dim);

/// Unit bisector of omega and omega_prime. Throws AntiDiagonal when
/// |omega + omega_prime| < guard.
Vec3 kappa(const Vec3& omega, const Vec3& omega_prime, double guard = kAntiDiagonalGuard);

/// Angular resolution: d = 2 uses only `n_polar` (the number of uniform
/// angles), d = 3 uses Gauss-Legendre in cos(polar) times uniform azimuth.
struct GridResolution {
  int n_polar = 0;
  int n_azimuth = 0;
};

/// Quadrature on S^{d-1}.
struct SphereGrid {
  int dim = 2;
  GridResolution resolution;
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

SphereGrid make_grid(int dim, GridResolution n);
inline SphereGrid make_circle_grid(int n) { return make_grid(2, {n, 0}); }
inline SphereGrid make_sphere_grid(int n_polar, int n_azimuth) {
  return make_grid(3, {n_polar, n_azimuth});
}

/// Same weights, nodes mapped through `rotation`.
SphereGrid rotated(const SphereGrid& grid, const Eigen::Matrix3d& rotation);

/// |S^{d-1}|: 2*pi or 4*pi.
double sphere_area(int dim);

/// Unit vector with polar angle theta (d = 2: the angle itself).
Vec3 direction(int dim, double theta, double phi = 0.0);

}  // namespace scatterdensity
