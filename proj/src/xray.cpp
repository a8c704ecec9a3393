#include "scatterdensity/xray.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"

namespace scatterdensity {

namespace {

constexpr double pi = std::numbers::pi;

// \int_R <s>^{-rho} ds = sqrt(pi) Gamma((rho-1)/2) / Gamma(rho/2)
double line_integral_of_japanese(double rho) {
  return std::sqrt(pi) * boost::math::tgamma(0.5 * (rho - 1.0)) / boost::math::tgamma(0.5 * rho);
}

// Breakpoints 0, 1, 2, 4, ... up to (and including) T.
std::vector<double> geometric_breaks(double T) {
  std::vector<double> b{0.0};
  double x = 1.0;
  while (x < T) {
    b.push_back(x);
    x *= 2.0;
  }
  b.push_back(T);
  return b;
}

double integrate_halfline(const std::function<double(double)>& f, double T, double abs_tol) {
  const auto breaks = geometric_breaks(T);
  const double share = abs_tol / static_cast<double>(breaks.size());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    sum += integrate_adaptive(f, breaks[i], breaks[i + 1], share).value;
  }
  return sum;
}

}  // namespace

double xray(const PotentialSpec& p, const Vec3& omega, const Vec3& eta) {
  switch (p.family()) {
    case Family::gaussian:
    case Family::gaussian_sum: {
      double v = 0.0;
      for (const auto& t : p.terms()) {
        const Vec3 c_perp = t.center - t.center.dot(omega) * omega;
        v += t.amplitude * t.width * std::sqrt(pi) *
             std::exp(-(eta - c_perp).squaredNorm() / (t.width * t.width));
      }
      return -0.5 * v;
    }
    case Family::power_decay: {
      if (p.amplitude() == 0.0) return 0.0;
      const double rho = p.decay_exponent();
      return -0.5 * p.amplitude() * line_integral_of_japanese(rho) *
             std::pow(1.0 + eta.squaredNorm(), 0.5 * (1.0 - rho));
    }
    case Family::smooth_bump: {
      if (p.amplitude() == 0.0) return 0.0;
      const Vec3& c = p.center();
      const Vec3 c_perp = c - c.dot(omega) * omega;
      const double R = p.radius();
      const double h2 = R * R - (eta - c_perp).squaredNorm();
      if (h2 <= 0.0) return 0.0;
      const double h = std::sqrt(h2);
      const double t0 = c.dot(omega);
      auto f = [&](double t) { return eval(p, (t0 + t) * omega + eta); };
      const double tol = kXrayTolerance / std::abs(p.amplitude());
      return -0.5 * p.amplitude() *
             integrate_adaptive([&](double t) { return f(t) / p.amplitude(); }, -h, h, tol).value;
    }
  }
  return 0.0;
}

double xray(const PotentialSpec& p, const XrayQuery& q) { return xray(p, q.frame.omega, q.eta()); }

double xray_quadrature(const PotentialSpec& p, const Vec3& omega, const Vec3& eta, double abs_tol) {
  if (p.is_zero()) return 0.0;
  const double rho = std::isfinite(p.decay_exponent()) ? p.decay_exponent() : 4.0;
  const double norm = xrho_norm(p, rho).value;
  // Two tails, each \int_T^inf ||V|| s^{-rho} ds, times the prefactor 1/2.
  const double T = std::pow(2.0 * norm / ((rho - 1.0) * abs_tol), 1.0 / (rho - 1.0));
  auto f_plus = [&](double t) { return eval(p, t * omega + eta); };
  auto f_minus = [&](double t) { return eval(p, -t * omega + eta); };
  const double quad_tol = abs_tol;  // the 1/2 prefactor absorbs the tail share
  return -0.5 * (integrate_halfline(f_plus, T, 0.5 * quad_tol) +
                 integrate_halfline(f_minus, T, 0.5 * quad_tol));
}

double xray_radial(const PotentialSpec& p, double b, double abs_tol) {
  if (!p.is_radial()) throw Error(ErrorKind::not_radial, "xray_radial needs a centered potential");
  if (p.is_zero()) return 0.0;
  b = std::abs(b);
  auto f = [&](double t) { return eval_radial(p, std::hypot(b, t)); };
  if (p.family() == Family::smooth_bump) {
    const double R = p.radius();
    if (b >= R) return 0.0;
    const double h = std::sqrt(R * R - b * b);
    return -integrate_adaptive(f, 0.0, h, abs_tol).value;
  }
  const double rho = std::isfinite(p.decay_exponent()) ? p.decay_exponent() : 4.0;
  const double norm = xrho_norm(p, rho).value;
  const double T = std::pow(2.0 * norm / ((rho - 1.0) * abs_tol), 1.0 / (rho - 1.0));
  return -integrate_halfline(f, T, 0.5 * abs_tol);
}

double XrayBound::at(double eta_norm) const {
  return constant * std::pow(1.0 + eta_norm * eta_norm, 0.5 * (1.0 - rho));
}

double XrayBound::radius_below(double threshold) const {
  if (constant <= threshold) return 0.0;
  const double q = std::pow(constant / threshold, 1.0 / (rho - 1.0));
  return std::sqrt(std::max(0.0, q * q - 1.0));
}

XrayBound certified_bound(const PotentialSpec& p, double rho) {
  XrayBound b;
  b.rho = rho;
  b.constant = 0.5 * xrho_norm(p, rho).value * line_integral_of_japanese(rho);
  return b;
}

XrayBound tightest_bound(const PotentialSpec& p, double threshold, double min_rho) {
  const double native = p.decay_exponent();
  if (std::isfinite(native)) {
    if (native <= min_rho) {
      throw Error(ErrorKind::moment_may_diverge, "decay exponent too small for requested tail");
    }
    return certified_bound(p, native);
  }
  XrayBound best;
  double best_radius = std::numeric_limits<double>::infinity();
  for (double rho : {2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0}) {
    if (rho <= min_rho) continue;
    const XrayBound b = certified_bound(p, rho);
    const double r = b.radius_below(threshold);
    if (r < best_radius) {
      best_radius = r;
      best = b;
    }
  }
  return best;
}

DecayReport decay_check(const PotentialSpec& p, double rho, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::invalid_argument, "decay_check needs samples >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = p.dim();

  DecayReport rep;
  auto sample = [&](double& best, bool track) {
    Vec3 omega(normal(rng), normal(rng), d == 3 ? normal(rng) : 0.0);
    const Frame f = frame(omega, d);
    const double r = std::pow(10.0, -2.0 + 4.0 * unit(rng));  // |eta| in [1e-2, 1e2]
    const double phi = 2.0 * pi * unit(rng);
    std::array<double, 2> c{r, 0.0};
    if (d == 3) c = {r * std::cos(phi), r * std::sin(phi)};
    else if (unit(rng) < 0.5) c[0] = -r;
    const Vec3 eta = f.point(c);
    const double ratio = std::abs(xray(p, f.omega, eta)) * std::pow(1.0 + r, rho - 1.0);
    if (ratio > best) {
      best = ratio;
      if (track) {
        rep.worst_omega = f.omega;
        rep.worst_eta = eta;
      }
    }
  };
  for (int i = 0; i < samples; ++i) sample(rep.max_ratio, true);
  rep.max_ratio_doubled = rep.max_ratio;
  for (int i = 0; i < samples; ++i) sample(rep.max_ratio_doubled, false);
  rep.stable = std::isfinite(rep.max_ratio_doubled) &&
               rep.max_ratio_doubled <= 1.05 * rep.max_ratio + 1e-300;
  if (rep.max_ratio == 0.0) rep.stable = rep.max_ratio_doubled == 0.0;
  return rep;
}

}  // namespace scatterdensity
