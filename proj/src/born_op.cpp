#include "scatterdensity/born_op.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"
#include "scatterdensity/xray.hpp"

namespace scatterdensity {

namespace {

constexpr double pi = std::numbers::pi;

double born_prefactor(int d, double k) { return -0.5 * std::pow(k / (2.0 * pi), d - 1); }

bool is_product_grid(const SphereGrid& g) {
  if (g.dim == 2) return g.resolution.n_azimuth == 0 && static_cast<int>(g.size()) == g.resolution.n_polar;
  return static_cast<std::size_t>(g.resolution.n_polar) * g.resolution.n_azimuth == g.size();
}

// C^infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

}  // namespace

double KernelMatrix::hermitian_defect() const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

std::complex<double> born_kernel(const PotentialSpec& p, double k, const Vec3& omega,
                                 const Vec3& omega_prime) {
  return born_prefactor(p.dim(), k) * fourier(p, k * (omega - omega_prime));
}

GridResolution recommended_resolution(int dim, double k, double points_per_k) {
  if (dim == 2) return {std::max(8, static_cast<int>(std::ceil(points_per_k * k))), 0};
  const int np = std::max(2, static_cast<int>(std::ceil(2.0 * k)));
  return {np, 2 * np};
}

bool is_resolved(const SphereGrid& grid, double k, double points_per_k) {
  const GridResolution need = recommended_resolution(grid.dim, k, points_per_k);
  if (grid.dim == 2) return static_cast<int>(grid.size()) >= need.n_polar;
  return grid.resolution.n_polar >= need.n_polar && grid.resolution.n_azimuth >= need.n_azimuth;
}

KernelMatrix born_matrix(const PotentialSpec& p, double k, const SphereGrid& grid) {
  if (grid.dim != p.dim()) throw Error(ErrorKind::invalid_argument, "grid and potential dimensions differ");
  if (!(k > 0.0)) throw Error(ErrorKind::invalid_argument, "k must be > 0");
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  KernelMatrix m;
  m.grid = grid;
  m.k = k;
  m.label = KernelLabel::born;
  m.under_resolved = !is_resolved(grid, k);
  m.entries = Eigen::MatrixXcd::Zero(n, n);
  if (p.is_zero()) return m;

  const double pref = born_prefactor(p.dim(), k);
  std::vector<double> sqw(n);
  for (Eigen::Index i = 0; i < n; ++i) sqw[i] = std::sqrt(grid.weights[i]);

  if (p.is_radial() && is_product_grid(grid)) {
    // V^ depends on |omega_i - omega_j| only, which the grid structure repeats.
    auto profile = [&](Eigen::Index i, Eigen::Index j) {
      return pref * fourier_radial(p, k * (grid.nodes[i] - grid.nodes[j]).norm());
    };
    if (grid.dim == 2) {
      std::vector<double> row(n);
      for (Eigen::Index j = 0; j < n; ++j) row[j] = profile(0, j);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          m.entries(i, j) = sqw[i] * sqw[j] * row[(j - i + n) % n];
        }
      }
    } else {
      const int np = grid.resolution.n_polar, na = grid.resolution.n_azimuth;
      std::vector<double> table(static_cast<std::size_t>(np) * np * na);
      for (int ri = 0; ri < np; ++ri) {
        for (int rj = ri; rj < np; ++rj) {
          for (int a = 0; a < na; ++a) {
            const double v = profile(ri * na, rj * na + a);
            table[(static_cast<std::size_t>(ri) * np + rj) * na + a] = v;
          }
        }
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const int ri = static_cast<int>(i / na), ai = static_cast<int>(i % na);
        for (Eigen::Index j = i; j < n; ++j) {
          const int rj = static_cast<int>(j / na), aj = static_cast<int>(j % na);
          const int da = ((aj - ai) % na + na) % na;
          const double v = table[(static_cast<std::size_t>(ri) * np + rj) * na + da];
          m.entries(i, j) = sqw[i] * sqw[j] * v;
          m.entries(j, i) = m.entries(i, j);
        }
      }
    }
    return m;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const std::complex<double> v = sqw[i] * sqw[j] * pref *
                                     fourier(p, k * (grid.nodes[i] - grid.nodes[j]));
      m.entries(i, j) = v;
      m.entries(j, i) = std::conj(v);
    }
    m.entries(i, i) = m.entries(i, i).real();
  }
  return m;
}

double chi0(const Vec3& omega, const Vec3& omega_prime) {
  const double c = std::clamp(omega.dot(omega_prime), -1.0, 1.0);
  const double theta = std::acos(c);
  return 1.0 - smooth_step((theta - 0.75 * pi) / (0.125 * pi));
}

Amplitude born_amplitude(const PotentialSpec& p) {
  Amplitude a;
  a.name = "born_" + to_string(p.family());
  const int d = p.dim();
  if (p.is_zero()) {
    a.b = [](const Vec3&, const Vec3&, const std::array<double, 2>&) { return 0.0; };
    return a;
  }
  const XrayBound probe = tightest_bound(p, 1e-14);
  a.support_radius = std::max(1.0, probe.radius_below(1e-14));
  a.b = [p, d](const Vec3& w, const Vec3& wp, const std::array<double, 2>& c) {
    const double cut = chi0(w, wp);
    if (cut == 0.0) return 0.0;
    const Frame f = frame(kappa(w, wp), d);
    return cut * xray(p, f.omega, f.point(c));
  };
  return a;
}

Amplitude radial_amplitude(std::string name, std::function<double(double)> g, double radius) {
  Amplitude a;
  a.name = std::move(name);
  a.support_radius = radius;
  a.b = [g = std::move(g), radius](const Vec3& w, const Vec3& wp, const std::array<double, 2>& c) {
    const double r = std::hypot(c[0], c[1]);
    if (r >= radius) return 0.0;
    return chi0(w, wp) * g(r);
  };
  return a;
}

std::complex<double> opk_kernel(const Amplitude& amp, int dim, double k, const Vec3& omega,
                                const Vec3& omega_prime, const InnerQuadrature& q) {
  if ((omega + omega_prime).norm() < amp.exclusion_radius) return 0.0;
  const Frame f = frame(kappa(omega, omega_prime), dim);
  const Vec3 delta = omega - omega_prime;
  const double R = amp.support_radius;
  const double a0 = delta.dot(f.basis[0]);
  std::complex<double> sum = 0.0;
  if (dim == 2) {
    const double span_phase = k * std::abs(a0) * 2.0 * R;
    const int panels = std::max(q.min_panels, static_cast<int>(std::ceil(span_phase / q.phase_per_panel)));
    const QuadratureRule rule = composite_gauss_legendre(-R, R, panels, q.order);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double c = rule.nodes[i];
      const double b = amp.b(omega, omega_prime, {c, 0.0});
      if (b == 0.0) continue;
      sum += rule.weights[i] * b * std::polar(1.0, -k * a0 * c);
    }
  } else {
    const double a1 = delta.dot(f.basis[1]);
    const double amag = std::hypot(a0, a1);
    const double span_phase = k * amag * R;
    const int panels = std::max(q.min_panels, static_cast<int>(std::ceil(span_phase / q.phase_per_panel)));
    const int angles = std::max(q.min_angles, 2 * static_cast<int>(std::ceil(span_phase)) + 16);
    const QuadratureRule rule = composite_gauss_legendre(0.0, R, panels, q.order);
    for (int j = 0; j < angles; ++j) {
      const double phi = 2.0 * pi * j / angles;
      const double cphi = std::cos(phi), sphi = std::sin(phi);
      std::complex<double> ray = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double r = rule.nodes[i];
        const double b = amp.b(omega, omega_prime, {r * cphi, r * sphi});
        if (b == 0.0) continue;
        ray += rule.weights[i] * r * b * std::polar(1.0, -k * r * (a0 * cphi + a1 * sphi));
      }
      sum += ray * (2.0 * pi / angles);
    }
  }
  return std::pow(k / (2.0 * pi), dim - 1) * sum;
}

KernelMatrix opk_assemble(const Amplitude& amp, double k, const SphereGrid& grid,
                          const InnerQuadrature& q) {
  if (!(k > 0.0)) throw Error(ErrorKind::invalid_argument, "k must be > 0");
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  KernelMatrix m;
  m.grid = grid;
  m.k = k;
  m.label = KernelLabel::psido;
  m.under_resolved = !is_resolved(grid, k);
  m.entries = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j0 = amp.symmetric ? i : 0;
    for (Eigen::Index j = j0; j < n; ++j) {
      const std::complex<double> v =
          std::sqrt(grid.weights[i] * grid.weights[j]) *
          opk_kernel(amp, grid.dim, k, grid.nodes[i], grid.nodes[j], q);
      m.entries(i, j) = v;
      if (amp.symmetric && j != i) m.entries(j, i) = std::conj(v);
    }
  }
  return m;
}

Eigen::VectorXd hermitian_eigenvalues(const KernelMatrix& m) {
  if (m.size() == 0) return {};
  const bool real = m.entries.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries.real(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::eig_failure, "real symmetric eigensolve failed");
    return es.eigenvalues();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::eig_failure, "Hermitian eigensolve failed");
  return es.eigenvalues();
}

double scaled_trace_power(const KernelMatrix& m, int ell) {
  if (ell < 1) throw Error(ErrorKind::invalid_argument, "trace power needs ell >= 1");
  const int d = m.dim();
  const double scale = m.label == KernelLabel::born ? std::pow(m.k, 1 - d)
                                                     : std::pow(m.k / (2.0 * pi), 1 - d);
  if (ell == 1) return scale * m.entries.trace().real();
  if (m.label == KernelLabel::born) {
    const Eigen::VectorXd ev = hermitian_eigenvalues(m);
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += std::pow(ev[i], ell);
    return scale * s;
  }
  Eigen::MatrixXcd power = m.entries;
  for (int i = 1; i < ell - 1; ++i) power = power * m.entries;
  // Tr(A B) without forming the last product.
  const std::complex<double> tr = (power.transpose().cwiseProduct(m.entries)).sum();
  return scale * tr.real();
}

}  // namespace scatterdensity
