#include "scatterdensity/radial_oracle.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"

namespace scatterdensity {

namespace {

constexpr double pi = std::numbers::pi;

using State = std::array<double, 4>;  // u, u', f, f' (f: free regular solution)

double centrifugal(int dim, int index) {
  return dim == 2 ? index * static_cast<double>(index) - 0.25 : index * (index + 1.0);
}

double regular_power(int dim, int index) { return dim == 2 ? index + 0.5 : index + 1.0; }

struct RadialSystem {
  const PotentialSpec* p;
  double k2;
  double c;
  void operator()(const State& x, State& dxdt, double r) const {
    const double cent = c / (r * r);
    dxdt[0] = x[1];
    dxdt[1] = (eval_radial(*p, r) + cent - k2) * x[0];
    dxdt[2] = x[3];
    dxdt[3] = (cent - k2) * x[2];
  }
};

struct Integrated {
  State x;
  double angle_u = 0.0;
  double angle_f = 0.0;
};

// Free-equation (Bessel) values at R: F regular, G irregular, with derivatives.
struct FreeValues {
  double F, dF, G, dG;
};

FreeValues free_values(int dim, int index, double k, double R) {
  const double x = k * R;
  if (dim == 2) {
    const double sr = std::sqrt(R);
    const double J = boost::math::cyl_bessel_j(index, x);
    const double Jp = boost::math::cyl_bessel_j_prime(index, x);
    const double Y = boost::math::cyl_neumann(index, x);
    const double Yp = boost::math::cyl_neumann_prime(index, x);
    return {sr * J, J / (2.0 * sr) + sr * k * Jp, sr * Y, Y / (2.0 * sr) + sr * k * Yp};
  }
  const unsigned l = static_cast<unsigned>(index);
  const double j = boost::math::sph_bessel(l, x);
  const double jp = boost::math::sph_bessel_prime(l, x);
  const double y = boost::math::sph_neumann(l, x);
  const double yp = boost::math::sph_neumann_prime(l, x);
  return {R * j, j + x * jp, R * y, y + x * yp};
}

class ChannelSolver {
 public:
  ChannelSolver(const PotentialSpec& p, double k, int index, double R, const OracleOptions& opts)
      : p_(p), k_(k), index_(index), R_(R), opts_(opts), c_(centrifugal(p.dim(), index)) {
    double vmax = 0.0;
    for (int i = 0; i <= 200; ++i) vmax = std::max(vmax, std::abs(eval_radial(p, R * i / 200.0)));
    max_dt_ = 0.5 / std::sqrt(k * k + vmax);
  }

  Integrated run(double eps) const {
    using namespace boost::numeric::odeint;
    const double r0 = start_radius();
    Integrated out;
    State& x = out.x;
    const double p_reg = regular_power(p_.dim(), index_);
    if (r0 <= opts_.r_min) {
      x = {1.0, p_reg / r0, 1.0, p_reg / r0};
    } else {
      x = {1.0, wkb_log_derivative(r0, true), 1.0, wkb_log_derivative(r0, false)};
    }
    out.angle_u = std::atan2(x[0], x[1] / k_);
    out.angle_f = std::atan2(x[2], x[3] / k_);

    RadialSystem sys{&p_, k_ * k_, c_};
    auto stepper = make_controlled(eps, eps, max_dt_, runge_kutta_fehlberg78<State>());
    double r = r0;
    double dt = std::min(max_dt_, 0.1 * r0 + 1e-3 * max_dt_);
    long steps = 0;
    while (R_ - r > 1e-14 * R_) {
      dt = std::min(dt, R_ - r);
      const State before = x;
      if (stepper.try_step(sys, x, r, dt) == success) {
        normalize(x);
        out.angle_u += unwrap_step(before[0], before[1], x[0], x[1]);
        out.angle_f += unwrap_step(before[2], before[3], x[2], x[3]);
      }
      if (++steps > opts_.max_steps || !std::isfinite(x[0]) || !std::isfinite(x[2])) {
        throw Error(ErrorKind::integrator_failure,
                    "radial integration failed for channel " + std::to_string(index_));
      }
    }
    return out;
  }

  double phase(const Integrated& s) const {
    FreeValues fv;
    try {
      fv = free_values(p_.dim(), index_, k_, R_);
    } catch (const std::overflow_error&) {
      // Deep under the barrier at R: the channel is first-order small.
      return born_phase_shift(p_, k_, index_);
    }
    const double u = s.x[0], du = s.x[1];
    const double num = u * fv.dF - du * fv.F;
    const double den = u * fv.dG - du * fv.G;
    const double principal = den == 0.0 ? 0.5 * pi : std::atan(num / den);
    const double wraps = std::round((s.angle_u - s.angle_f - principal) / pi);
    return principal + wraps * pi;
  }

 private:
  double kappa_sq(double r, bool with_potential) const {
    return c_ / (r * r) - k_ * k_ + (with_potential ? eval_radial(p_, r) : 0.0);
  }

  // Inward from the (free) turning point until the WKB growth reaches opts.growth.
  double start_radius() const {
    if (c_ <= 0.0) return opts_.r_min;
    const double r_hi = std::min(R_, std::sqrt(c_) / k_);
    double r = r_hi, integral = 0.0;
    while (r > opts_.r_min) {
      const double next = 0.99 * r;
      const double a = std::sqrt(std::max(0.0, kappa_sq(r, true)));
      const double b = std::sqrt(std::max(0.0, kappa_sq(next, true)));
      integral += 0.5 * (a + b) * (r - next);
      r = next;
      if (integral >= opts_.growth) return r;
    }
    return opts_.r_min;
  }

  // u'/u of the growing WKB solution kappa^{-1/2} exp(\int kappa).
  double wkb_log_derivative(double r, bool with_potential) const {
    const double h = 1e-6 * r;
    const double kap = std::sqrt(std::max(kappa_sq(r, with_potential), 1e-300));
    const double kp = (std::sqrt(std::max(kappa_sq(r + h, with_potential), 1e-300)) -
                       std::sqrt(std::max(kappa_sq(r - h, with_potential), 1e-300))) /
                      (2.0 * h);
    return kap - kp / (2.0 * kap);
  }

  void normalize(State& x) const {
    const double su = std::max(std::abs(x[0]), std::abs(x[1]) / k_);
    const double sf = std::max(std::abs(x[2]), std::abs(x[3]) / k_);
    if (su > 0.0) {
      x[0] /= su;
      x[1] /= su;
    }
    if (sf > 0.0) {
      x[2] /= sf;
      x[3] /= sf;
    }
  }

  double unwrap_step(double u0, double du0, double u1, double du1) const {
    const double a0 = std::atan2(u0, du0 / k_);
    const double a1 = std::atan2(u1, du1 / k_);
    return std::remainder(a1 - a0, 2.0 * pi);
  }

  const PotentialSpec& p_;
  double k_;
  int index_;
  double R_;
  OracleOptions opts_;
  double c_;
  double max_dt_ = 0.01;
};

}  // namespace

int channel_multiplicity(int dim, int index) {
  if (dim == 2) return index == 0 ? 1 : 2;
  return 2 * index + 1;
}

double wrap_phase(double theta) {
  return theta - 2.0 * pi * std::floor((theta + pi) / (2.0 * pi));
}

double match_radius(const PotentialSpec& p, double tol, double max_radius) {
  if (!p.is_radial()) throw Error(ErrorKind::not_radial, "match radius needs a centered potential");
  if (p.is_zero()) return 0.0;
  const double step = 0.01;
  double last_violation = -1.0;
  const int n = static_cast<int>(std::ceil(max_radius / step));
  for (int i = 0; i <= n; ++i) {
    const double r = i * step;
    if (std::abs(eval_radial(p, r)) * std::sqrt(1.0 + r * r) > tol) last_violation = r;
  }
  if (last_violation >= max_radius - step) {
    throw Error(ErrorKind::match_radius_too_small,
                "|V(r)|<r> exceeds tol up to r = " + std::to_string(max_radius));
  }
  return std::max(step, last_violation + step);
}

Channel channel_phase_shift(const PotentialSpec& p, double k, int index, double tol, double R,
                            const OracleOptions& opts) {
  Channel ch;
  ch.index = index;
  if (p.is_zero()) return ch;
  const ChannelSolver solver(p, k, index, R, opts);
  const double eps1 = std::clamp(1e-3 * tol, 1e-13, 1e-8);
  const double eps2 = std::max(eps1 / 64.0, 2e-15);
  const double coarse = solver.phase(solver.run(eps1));
  ch.delta = solver.phase(solver.run(eps2));
  ch.est_error = std::abs(ch.delta - coarse);
  return ch;
}

PhaseShiftTable phase_shifts(const PotentialSpec& p, double k, int m_max, double tol,
                             const OracleOptions& opts) {
  if (!p.is_radial()) throw Error(ErrorKind::not_radial, "phase shifts need a centered potential");
  if (!(k > 0.0)) throw Error(ErrorKind::invalid_argument, "k must be > 0");
  if (m_max < 0) throw Error(ErrorKind::invalid_argument, "m_max must be >= 0");
  PhaseShiftTable t;
  t.k = k;
  t.dim = p.dim();
  t.tol = tol;
  t.match_radius = match_radius(p, tol, opts.max_radius);
  t.channels.reserve(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    Channel ch = channel_phase_shift(p, k, m, tol, t.match_radius, opts);
    if (ch.est_error > tol) {
      throw Error(ErrorKind::integrator_failure,
                  "channel " + std::to_string(m) + " error estimate " + std::to_string(ch.est_error) +
                      " exceeds tol");
    }
    t.channels.push_back(ch);
  }
  return t;
}

int default_channel_limit(const PotentialSpec& p, double k, double tol) {
  if (p.is_zero()) return 0;
  const double R = match_radius(p, tol);
  return static_cast<int>(std::ceil(k * R + 8.0 * std::cbrt(k) + 8.0));
}

PhaseSpectrum full_s_spectrum(const PhaseShiftTable& t, const SpectrumOptions& opts) {
  if (!t.channels.empty() && std::abs(t.channels.back().delta) >= t.tol) {
    throw Error(ErrorKind::channel_truncation,
                "last channel " + std::to_string(t.channels.back().index) +
                    " still has |delta| >= tol; raise m_max");
  }
  std::vector<double> values, unwrapped;
  std::vector<int> mults;
  for (const Channel& ch : t.channels) {
    values.push_back(t.k * wrap_phase(2.0 * ch.delta));
    unwrapped.push_back(t.k * 2.0 * ch.delta);
    mults.push_back(channel_multiplicity(t.dim, ch.index));
  }
  return make_spectrum(values, mults, t.k, t.dim, SpectrumSource::radial_oracle, opts, unwrapped);
}

double born_phase_shift(const PotentialSpec& p, double k, int index) {
  if (!p.is_radial()) throw Error(ErrorKind::not_radial, "born phase shift needs a centered potential");
  if (p.is_zero()) return 0.0;
  const int d = p.dim();
  const double R = match_radius(p, 1e-15, 1e4);
  // Panels of at most a quarter wavelength keep 16-point rules exact to ~1e-15.
  const int panels = std::max(16, static_cast<int>(std::ceil(R * k / (0.5 * pi))));
  const QuadratureRule rule = composite_gauss_legendre(0.0, R, panels, 16);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double r = rule.nodes[i];
    const double v = eval_radial(p, r);
    if (v == 0.0) continue;
    if (d == 2) {
      const double J = boost::math::cyl_bessel_j(index, k * r);
      s += rule.weights[i] * v * J * J * r;
    } else {
      const double j = boost::math::sph_bessel(static_cast<unsigned>(index), k * r);
      s += rule.weights[i] * v * j * j * r * r;
    }
  }
  return d == 2 ? -0.5 * pi * s : -k * s;
}

}  // namespace scatterdensity
