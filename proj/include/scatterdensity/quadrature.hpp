#pragma once

#include <functional>
#include <vector>

namespace scatterdensity {

/// A one-dimensional quadrature rule: sum_i weights[i] * f(nodes[i]).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [a, b]. Nodes ascending. Computed by
/// Newton iteration on the three-term recurrence, accurate to ~1e-15 for
/// n up to a few thousand.
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite rule: `panels` equal panels on [a, b], each with an
/// `order`-point Gauss-Legendre rule.
QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order = 16);

/// Composite rule over explicit panel breakpoints (ascending).
QuadratureRule composite_gauss_legendre(const std::vector<double>& breakpoints, int order = 16);

/// Value and error estimate from an adaptive integration.
struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (61-point) on [a, b]. Throws NumericalFailure if
/// the estimated absolute error exceeds `abs_tol` after `max_depth` levels.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, unsigned max_depth = 18);

}  // namespace scatterdensity
