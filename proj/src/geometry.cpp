#include "scatterdensity/geometry.hpp"

#include <cmath>
#include <numbers>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"

namespace scatterdensity {

Vec3 Frame::point(std::span<const double> coords) const {
  Vec3 eta = Vec3::Zero();
  for (int i = 0; i < codim(); ++i) eta += coords[i] * basis[i];
  return eta;
}

std::array<double, 2> Frame::coords(const Vec3& eta) const {
  std::array<double, 2> c{0.0, 0.0};
  for (int i = 0; i < codim(); ++i) c[i] = basis[i].dot(eta);
  return c;
}

Frame frame(const Vec3& omega, int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::invalid_argument, "dimension must be 2 or 3");
  Vec3 w = omega;
  if (dim == 2) w.z() = 0.0;
  const double len = w.norm();
  if (len < 1e-10) throw Error(ErrorKind::zero_vector, "frame direction has (near-)zero length");
  w /= len;

  Frame f;
  f.dim = dim;
  f.omega = w;
  if (dim == 2) {
    f.basis[0] = Vec3(-w.y(), w.x(), 0.0);
    f.basis[1] = Vec3::Zero();
    return f;
  }
  const Vec3 ref = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 b1 = ref - ref.dot(w) * w;
  b1.normalize();
  Vec3 b2 = w.cross(b1);
  b2.normalize();
  f.basis[0] = b1;
  f.basis[1] = b2;
  return f;
}

Vec3 kappa(const Vec3& omega, const Vec3& omega_prime, double guard) {
  const Vec3 s = omega + omega_prime;
  const double len = s.norm();
  if (len < guard) throw Error(ErrorKind::anti_diagonal, "kappa undefined near omega' = -omega");
  if (omega == omega_prime) return omega;
  return s / len;
}

double SphereGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double sphere_area(int dim) { return dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

Vec3 direction(int dim, double theta, double phi) {
  if (dim == 2) return Vec3(std::cos(theta), std::sin(theta), 0.0);
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

SphereGrid make_grid(int dim, GridResolution n) {
  constexpr double pi = std::numbers::pi;
  SphereGrid g;
  g.dim = dim;
  g.resolution = n;
  if (dim == 2) {
    if (n.n_polar < 8) throw Error(ErrorKind::resolution_too_small, "circle grid needs n >= 8");
    g.resolution.n_azimuth = 0;
    g.nodes.reserve(n.n_polar);
    for (int i = 0; i < n.n_polar; ++i) {
      g.nodes.push_back(direction(2, 2.0 * pi * i / n.n_polar));
      g.weights.push_back(2.0 * pi / n.n_polar);
    }
    return g;
  }
  if (dim != 3) throw Error(ErrorKind::invalid_argument, "dimension must be 2 or 3");
  if (n.n_polar < 2 || n.n_azimuth < 4) {
    throw Error(ErrorKind::resolution_too_small, "sphere grid needs n_polar >= 2, n_azimuth >= 4");
  }
  const QuadratureRule gl = gauss_legendre(n.n_polar);
  const double dphi = 2.0 * pi / n.n_azimuth;
  g.nodes.reserve(static_cast<std::size_t>(n.n_polar) * n.n_azimuth);
  for (int i = 0; i < n.n_polar; ++i) {
    const double z = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n.n_azimuth; ++j) {
      const double phi = dphi * j;
      g.nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
      g.weights.push_back(gl.weights[i] * dphi);
    }
  }
  return g;
}

SphereGrid rotated(const SphereGrid& grid, const Eigen::Matrix3d& rotation) {
  SphereGrid out = grid;
  for (auto& v : out.nodes) v = rotation * v;
  return out;
}

}  // namespace scatterdensity
