#include "scatterdensity/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "scatterdensity/errors.hpp"

namespace scatterdensity {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::numerical_failure: return "NumericalFailure";
    case ErrorKind::unbounded_norm: return "UnboundedNorm";
    case ErrorKind::zero_vector: return "ZeroVector";
    case ErrorKind::anti_diagonal: return "AntiDiagonal";
    case ErrorKind::resolution_too_small: return "ResolutionTooSmall";
    case ErrorKind::not_radial: return "NotRadial";
    case ErrorKind::interval_contains_zero: return "IntervalContainsZero";
    case ErrorKind::moment_may_diverge: return "MomentMayDiverge";
    case ErrorKind::eig_failure: return "EigFailure";
    case ErrorKind::exponent_too_small: return "ExponentTooSmall";
    case ErrorKind::match_radius_too_small: return "MatchRadiusTooSmall";
    case ErrorKind::integrator_failure: return "IntegratorFailure";
    case ErrorKind::channel_truncation: return "ChannelTruncation";
    case ErrorKind::config_error: return "ConfigError";
  }
  return "Unknown";
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "Gauss-Legendre order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest root; store ascending.
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.nodes[i] = mid - half * x;
    rule.weights[n - 1 - i] = half * w;
    rule.weights[i] = half * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw Error(ErrorKind::invalid_argument, "composite rule needs >= 1 panel");
  std::vector<double> breaks(panels + 1);
  for (int p = 0; p <= panels; ++p) breaks[p] = a + (b - a) * p / panels;
  return composite_gauss_legendre(breaks, order);
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& breakpoints, int order) {
  const QuadratureRule ref = gauss_legendre(order);
  QuadratureRule rule;
  if (breakpoints.size() < 2) return rule;
  rule.nodes.reserve((breakpoints.size() - 1) * order);
  rule.weights.reserve((breakpoints.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double lo = breakpoints[p], hi = breakpoints[p + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int i = 0; i < order; ++i) {
      rule.nodes.push_back(mid + half * ref.nodes[i]);
      rule.weights.push_back(half * ref.weights[i]);
    }
  }
  return rule;
}

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, unsigned max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  AdaptiveResult out;
  if (a == b) return out;
  double err = 0.0, l1 = 0.0;
  // A single panel first to size the relative tolerance boost expects.
  out.value = gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &err, &l1);
  if (err > abs_tol) {
    const double rel = abs_tol / std::max(l1, 1e-300);
    out.value = gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, rel, &err, &l1);
  }
  out.error = err;
  if (!std::isfinite(out.value) || err > abs_tol) {
    throw Error(ErrorKind::numerical_failure,
                "adaptive quadrature missed target " + std::to_string(abs_tol) +
                    " (estimate " + std::to_string(err) + ")");
  }
  return out;
}

}  // namespace scatterdensity
