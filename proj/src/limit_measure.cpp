#include "scatterdensity/limit_measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"
#include "scatterdensity/xray.hpp"

namespace scatterdensity {

namespace {

constexpr double pi = std::numbers::pi;

// A half-line {r * dir : r >= 0} in Lambda_omega with its combined
// outer (omega) and inner (angular) quadrature weight.
struct Ray {
  Vec3 omega;
  Vec3 dir;
  double weight;
};

std::vector<Ray> make_rays(const PotentialSpec& p, const MeasureOptions& opts, bool coarse_outer) {
  const int d = p.dim();
  std::vector<Ray> rays;
  if (p.is_radial()) {
    const Frame f = frame(Vec3::UnitX(), d);
    rays.push_back({f.omega, f.basis[0], sphere_area(d) * (d == 2 ? 2.0 : 2.0 * pi)});
    return rays;
  }
  GridResolution res = d == 2 ? opts.outer_2d : opts.outer_3d;
  if (coarse_outer) {
    res.n_polar = std::max(d == 2 ? 8 : 2, res.n_polar / 2);
    res.n_azimuth = std::max(d == 2 ? 0 : 4, res.n_azimuth / 2);
  }
  const SphereGrid grid = make_grid(d, res);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Frame f = frame(grid.nodes[i], d);
    if (d == 2) {
      rays.push_back({f.omega, f.basis[0], grid.weights[i]});
      rays.push_back({f.omega, -f.basis[0], grid.weights[i]});
    } else {
      const int n = opts.inner_angles;
      for (int j = 0; j < n; ++j) {
        const double phi = 2.0 * pi * j / n;
        rays.push_back({f.omega, std::cos(phi) * f.basis[0] + std::sin(phi) * f.basis[1],
                        grid.weights[i] * 2.0 * pi / n});
      }
    }
  }
  return rays;
}

// Length scale of the potential's features and the extent beyond which the
// integrands are smooth tails.
std::pair<double, double> feature_scales(const PotentialSpec& p) {
  switch (p.family()) {
    case Family::gaussian:
    case Family::gaussian_sum: {
      double len = std::numeric_limits<double>::infinity(), extent = 0.0;
      for (const auto& t : p.terms()) {
        len = std::min(len, t.width);
        extent = std::max(extent, t.center.norm() + 8.0 * t.width);
      }
      return {len, extent};
    }
    case Family::smooth_bump: return {0.25 * p.radius(), p.center().norm() + p.radius()};
    case Family::power_decay: return {1.0, 16.0};
  }
  return {1.0, 8.0};
}

std::vector<double> radial_breaks(const PotentialSpec& p, double T, int panels_per_length) {
  const auto [len, extent] = feature_scales(p);
  const double h = len / panels_per_length;
  std::vector<double> b{0.0};
  const double uniform_end = std::min(T, extent);
  const int n = std::max(1, static_cast<int>(std::ceil(uniform_end / h)));
  for (int i = 1; i <= n; ++i) b.push_back(uniform_end * i / n);
  double x = uniform_end;
  while (x < T) {
    x = std::min(T, 2.0 * x);
    b.push_back(x);
  }
  return b;
}

double sum_over_rays(const PotentialSpec& p, const std::vector<Ray>& rays, const QuadratureRule& rule,
                     const std::function<double(double)>& g) {
  const int d = p.dim();
  double total = 0.0;
  for (const Ray& ray : rays) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double r = rule.nodes[i];
      const double jac = d == 2 ? 1.0 : r;
      s += rule.weights[i] * jac * g(xray(p, ray.omega, r * ray.dir));
    }
    total += ray.weight * s;
  }
  return std::pow(2.0 * pi, 1 - d) * total;
}

// Nested quadrature of g(X) over {|eta| <= T}, with refinement-based error.
MeasureValue smooth_functional(const PotentialSpec& p, double T, double tail,
                               const MeasureOptions& opts, int panels_per_length,
                               const std::function<double(double)>& g) {
  const auto rays = make_rays(p, opts, false);
  const auto coarse = composite_gauss_legendre(radial_breaks(p, T, panels_per_length), opts.order);
  const auto fine = composite_gauss_legendre(radial_breaks(p, T, 2 * panels_per_length), opts.order);
  MeasureValue out;
  const double v_coarse = sum_over_rays(p, rays, coarse, g);
  out.value = sum_over_rays(p, rays, fine, g);
  out.error = std::abs(out.value - v_coarse) + tail;
  if (!p.is_radial()) {
    out.error += std::abs(out.value - sum_over_rays(p, make_rays(p, opts, true), fine, g));
  }
  return out;
}

}  // namespace

double BumpSpec::operator()(double t) const {
  const double s = (t - center) / half_width;
  if (std::abs(s) >= 1.0) return 0.0;
  return height * std::exp(-1.0 / (1.0 - s * s));
}

void BumpSpec::validate() const {
  if (!(half_width > 0.0)) throw Error(ErrorKind::invalid_argument, "bump half-width must be > 0");
  if (lo() <= 0.0 && hi() >= 0.0) {
    throw Error(ErrorKind::interval_contains_zero, "bump support must exclude 0");
  }
}

void validate_interval(const Interval& iv) {
  if (!(iv.lo <= iv.hi)) throw Error(ErrorKind::invalid_argument, "interval needs lo <= hi");
  if (iv.lo <= 0.0 && iv.hi >= 0.0) {
    throw Error(ErrorKind::interval_contains_zero, "interval must exclude 0");
  }
}

MeasureValue mu_moment(const PotentialSpec& p, int ell, const MeasureOptions& opts) {
  if (ell < 1) throw Error(ErrorKind::invalid_argument, "moment order must be >= 1");
  const int d = p.dim();
  const double native = p.decay_exponent();
  if (std::isfinite(native) && ell * (native - 1.0) <= d - 1.0) {
    throw Error(ErrorKind::moment_may_diverge,
                "moment " + std::to_string(ell) + " needs ell > (d-1)/(rho-1)");
  }
  if (p.is_zero()) return {};

  // Tail beyond T: A C^ell \int_T^inf r^{ell(1-rho)+d-2} dr = A C^ell T^{-q}/q,
  // q = ell(rho-1)-(d-1), A = (2pi)^{1-d} |S^{d-1}| |S^{d-2}|.
  const double angular = std::pow(2.0 * pi, 1 - d) * sphere_area(d) * (d == 2 ? 2.0 : 2.0 * pi);
  auto radius_for = [&](const XrayBound& b) {
    const double q = ell * (b.rho - 1.0) - (d - 1.0);
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(1.0, std::pow(angular * std::pow(b.constant, ell) / (q * opts.tail_eps), 1.0 / q));
  };
  XrayBound bound;
  double T = std::numeric_limits<double>::infinity();
  if (std::isfinite(native)) {
    bound = certified_bound(p, native);
    T = radius_for(bound);
  } else {
    for (double rho : {3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0}) {
      const XrayBound b = certified_bound(p, rho);
      const double r = radius_for(b);
      if (r < T) {
        T = r;
        bound = b;
      }
    }
  }
  const double q = ell * (bound.rho - 1.0) - (d - 1.0);
  const double tail = angular * std::pow(bound.constant, ell) * std::pow(T, -q) / q;
  return smooth_functional(p, T, tail, opts, opts.panels_per_length,
                           [ell](double x) { return std::pow(x, ell); });
}

MeasureValue mu_psi(const PotentialSpec& p, const BumpSpec& psi, const MeasureOptions& opts) {
  psi.validate();
  if (p.is_zero()) return {};
  const double threshold = std::min(std::abs(psi.lo()), std::abs(psi.hi()));
  const XrayBound bound = tightest_bound(p, threshold);
  const double T = bound.radius_below(threshold);
  if (T == 0.0) return {};
  // psi(X) has sharper structure than X itself: refine the radial panels.
  return smooth_functional(p, T, 0.0, opts, 8 * opts.panels_per_length,
                           [&psi](double x) { return psi(x); });
}

MeasureValue mu_interval(const PotentialSpec& p, const Interval& iv, const MeasureOptions& opts) {
  validate_interval(iv);
  if (p.is_zero()) return {};
  const int d = p.dim();
  const double threshold = std::min(std::abs(iv.lo), std::abs(iv.hi));
  const XrayBound bound = tightest_bound(p, threshold);
  const double T = bound.radius_below(threshold);
  if (T == 0.0) return {};

  auto inside = [&](const Ray& ray, double r) {
    const double x = xray(p, ray.omega, r * ray.dir);
    return x >= iv.lo && x <= iv.hi;
  };
  // \int r^{d-2} dr over [a, b]
  auto length = [d](double a, double b) { return d == 2 ? b - a : 0.5 * (b * b - a * a); };

  // Measure of the set along one ray, scanning cells of width h and
  // bisecting the ones whose membership changes.
  std::function<double(const Ray&, double, double, bool, bool)> cell;
  cell = [&](const Ray& ray, double a, double b, bool in_a, bool in_b) -> double {
    const double m = 0.5 * (a + b);
    const bool in_m = inside(ray, m);
    if (in_a == in_b && in_m == in_a) return in_a ? length(a, b) : 0.0;
    if (b - a < opts.crossing_tol) return 0.5 * length(a, b) * (int(in_a) + int(in_b));
    return cell(ray, a, m, in_a, in_m) + cell(ray, m, b, in_m, in_b);
  };

  auto scan = [&](const std::vector<Ray>& rays, int cells) {
    double total = 0.0;
    for (const Ray& ray : rays) {
      double s = 0.0;
      bool prev = inside(ray, 0.0);
      for (int i = 0; i < cells; ++i) {
        const double a = T * i / cells, b = T * (i + 1) / cells;
        const bool next = inside(ray, b);
        s += cell(ray, a, b, prev, next);
        prev = next;
      }
      total += ray.weight * s;
    }
    return std::pow(2.0 * pi, 1 - d) * total;
  };

  const auto [len, extent] = feature_scales(p);
  const int cells = std::max(64, static_cast<int>(std::ceil(T / (len / 32.0))));
  const auto rays = make_rays(p, opts, false);
  MeasureValue out;
  out.value = scan(rays, cells);
  out.error = std::abs(out.value - scan(rays, cells / 2));
  if (!p.is_radial()) out.error += std::abs(out.value - scan(make_rays(p, opts, true), cells));
  return out;
}

std::vector<std::pair<double, double>> radial_profile(const PotentialSpec& p, int samples,
                                                      double b_max) {
  if (!p.is_radial()) throw Error(ErrorKind::not_radial, "radial profile needs a centered potential");
  std::vector<std::pair<double, double>> out;
  const Frame f = frame(Vec3::UnitX(), p.dim());
  for (int i = 0; i < samples; ++i) {
    const double b = samples == 1 ? 0.0 : b_max * i / (samples - 1);
    out.emplace_back(b, xray(p, f.omega, b * f.basis[0]));
  }
  return out;
}

}  // namespace scatterdensity
