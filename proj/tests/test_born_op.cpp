#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scatterdensity/born_op.hpp"
#include "scatterdensity/errors.hpp"
#include "scatterdensity/limit_measure.hpp"

using namespace scatterdensity;
using std::numbers::pi;

namespace {

double bump_profile(double r) {
  const double x = r / 1.5;
  return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
}

// Angle between two nodes of a circle grid.
double angle(const Vec3& a, const Vec3& b) { return std::acos(std::clamp(a.dot(b), -1.0, 1.0)); }

}  // namespace

TEST_SUITE("born_op") {
  TEST_CASE("born_matrix: zero potential") {
    const KernelMatrix m = born_matrix(PotentialSpec::zero(2), 10.0, make_circle_grid(16));
    CHECK(m.entries.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.label == KernelLabel::born);
    CHECK(m.size() == 16);
  }

  TEST_CASE("born_matrix: diagonal and trace") {
    const PotentialSpec g2 = PotentialSpec::gaussian(2, 1.0, 1.0);
    for (double k : {1.0, 7.0, 40.0}) {
      CHECK(born_kernel(g2, k, Vec3::UnitX(), Vec3::UnitX()).real() == doctest::Approx(-k / 4).epsilon(1e-14));
      for (int n : {8, 33, 128}) {
        const KernelMatrix m = born_matrix(g2, k, make_circle_grid(n));
        CHECK(std::abs(m.entries.trace().real() + pi * k / 2) <= 1e-12 * k);
        CHECK(std::abs(scaled_trace_power(m, 1) + pi / 2) <= 1e-12);
      }
    }
    const PotentialSpec g3 = PotentialSpec::gaussian(3, 1.0, 1.0);
    for (double k : {1.0, 5.0}) {
      const KernelMatrix m = born_matrix(g3, k, make_sphere_grid(6, 12));
      CHECK(m.entries.trace().real() == doctest::Approx(-k * k * std::sqrt(pi) / 2).epsilon(1e-12));
    }
  }

  TEST_CASE("born_matrix: Hermitian, including non-radial potentials") {
    const PotentialSpec p = PotentialSpec::gaussian_sum(3, {{1.0, 0.5, Vec3(1, 0, 0)}, {-2.0, 1.0, Vec3(0, 1, 1)}});
    const KernelMatrix m = born_matrix(p, 4.0, make_sphere_grid(8, 16));
    CHECK(m.hermitian_defect() <= 1e-12);
    CHECK(m.entries.imag().cwiseAbs().maxCoeff() > 0.0);
    const KernelMatrix r = born_matrix(PotentialSpec::smooth_bump(2, 1.0, 1.0), 6.0, make_circle_grid(48));
    CHECK(r.hermitian_defect() <= 1e-12);
  }

  TEST_CASE("born_matrix: radial fast path matches direct assembly") {
    // The same radial potential written as a one-term gaussian_sum takes the generic path.
    const PotentialSpec fast = PotentialSpec::gaussian(3, 1.0, 0.9);
    const PotentialSpec slow = PotentialSpec::gaussian_sum(3, {{1.0, 0.9, Vec3::Zero()}, {0.0, 1.0, Vec3(1, 0, 0)}});
    const SphereGrid grid = make_sphere_grid(6, 12);
    const KernelMatrix a = born_matrix(fast, 3.0, grid);
    const KernelMatrix b = born_matrix(slow, 3.0, grid);
    CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() <= 1e-13);
  }

  TEST_CASE("scaled_trace_power: l = 2 near the limit") {
    const PotentialSpec g = PotentialSpec::gaussian(2, 1.0, 1.0);
    const KernelMatrix m = born_matrix(g, 40.0, make_circle_grid(512));
    CHECK(scaled_trace_power(m, 2) == doctest::Approx(0.9844).epsilon(0.05));
    // Closed form at finite k: (k pi / 8) \int_0^{2 pi} e^{-k^2 (1 - cos phi)} dphi / k^2 * k.
    const double k = 40.0;
    double s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) s += std::exp(-k * k * (1 - std::cos(2 * pi * (i + 0.5) / n))) * 2 * pi / n;
    CHECK(std::abs(scaled_trace_power(m, 2) - k * pi / 8 * s) <= 1e-10);
  }

  TEST_CASE("similarity invariance of the weight symmetrization") {
    const PotentialSpec p = PotentialSpec::gaussian_sum(3, {{1.0, 0.5, Vec3(1, 0, 0)}, {-2.0, 1.0, Vec3(0, 1, 1)}});
    const SphereGrid grid = make_sphere_grid(5, 10);
    const KernelMatrix m = born_matrix(p, 3.0, grid);
    const Eigen::Index n = m.size();
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = grid.weights[i];
    // Unsymmetrized Nystrom form K W.
    Eigen::MatrixXcd kw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) kw(i, j) = born_kernel(p, 3.0, grid.nodes[i], grid.nodes[j]) * w[j];
    }
    Eigen::MatrixXcd a = m.entries, b = kw;
    for (int ell = 1; ell <= 4; ++ell) {
      CHECK(std::abs(a.trace() - b.trace()) <= 1e-10 * std::max(1.0, std::abs(b.trace())));
      a = a * m.entries;
      b = b * kw;
    }
  }

  TEST_CASE("off-diagonal decay faster than k^-4") {
    const PotentialSpec g = PotentialSpec::gaussian(2, 1.0, 1.0);
    const Vec3 w = direction(2, 0.0), wp = direction(2, 0.6);
    double prev = std::numeric_limits<double>::infinity();
    for (double k : {10.0, 20.0, 40.0, 80.0}) {
      const double v = std::abs(born_kernel(g, k, w, wp)) * std::pow(k, 4);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < 1e-20);
  }

  TEST_CASE("opk_assemble: zero amplitude") {
    const Amplitude zero = radial_amplitude("zero", [](double) { return 0.0; }, 1.0);
    const KernelMatrix m = opk_assemble(zero, 10.0, make_circle_grid(32));
    CHECK(m.entries.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.label == KernelLabel::psido);
  }

  TEST_CASE("opk_kernel: diagonal value of a radial profile") {
    const Amplitude amp = radial_amplitude("bump", bump_profile, 1.5);
    // \int_R g = 2 \int_0^1.5 g; reference from a fine midpoint rule.
    double integral = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) integral += 2 * bump_profile(1.5 * (i + 0.5) / n) * 1.5 / n;
    for (double k : {5.0, 20.0}) {
      const auto v = opk_kernel(amp, 2, k, Vec3::UnitX(), Vec3::UnitX());
      CHECK(v.real() == doctest::Approx(k / (2 * pi) * integral).epsilon(1e-11));
      CHECK(v.imag() == doctest::Approx(0.0));
    }
    // d = 3: (k/2pi)^2 2pi \int g r dr.
    double radial = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = 1.5 * (i + 0.5) / n;
      radial += bump_profile(r) * r * 1.5 / n;
    }
    const auto v3 = opk_kernel(amp, 3, 4.0, Vec3::UnitZ(), Vec3::UnitZ());
    CHECK(v3.real() == doctest::Approx(std::pow(4.0 / (2 * pi), 2) * 2 * pi * radial).epsilon(1e-10));
  }

  TEST_CASE("opk with the X-ray amplitude reproduces the Born kernel") {
    const PotentialSpec g = PotentialSpec::gaussian(2, 1.0, 1.0);
    const Amplitude amp = born_amplitude(g);
    for (double k : {10.0, 20.0}) {
      const SphereGrid grid = make_circle_grid(64);
      double worst = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
          if (angle(grid.nodes[i], grid.nodes[j]) > 0.75 * pi) continue;
          const auto a = opk_kernel(amp, 2, k, grid.nodes[i], grid.nodes[j]);
          const auto b = born_kernel(g, k, grid.nodes[i], grid.nodes[j]);
          worst = std::max(worst, std::abs(a - b));
        }
      }
      CHECK(worst <= 1e-8);
    }
  }

  TEST_CASE("opk with the X-ray amplitude in d = 3") {
    const PotentialSpec g = PotentialSpec::gaussian(3, 1.0, 1.0);
    const Amplitude amp = born_amplitude(g);
    const double k = 10.0;
    for (double th : {0.0, 0.05, 0.2, 0.6}) {
      const Vec3 w = direction(3, 0.3, 0.2), wp = direction(3, 0.3 + th, 0.5);
      CHECK(std::abs(opk_kernel(amp, 3, k, w, wp) - born_kernel(g, k, w, wp)) <= 1e-8);
    }
  }

  TEST_CASE("chi0 cutoff") {
    CHECK(chi0(direction(2, 0.0), direction(2, 0.7 * pi)) == 1.0);
    CHECK(chi0(direction(2, 0.0), direction(2, 0.9 * pi)) == 0.0);
    const double mid = chi0(direction(2, 0.0), direction(2, 0.8125 * pi));
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
  }

  TEST_CASE("psido trace identity and convergence") {
    const Amplitude amp = radial_amplitude("bump", bump_profile, 1.5);
    double i1 = 0.0, i2 = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      const double g = bump_profile(1.5 * (i + 0.5) / n);
      i1 += 2 * g * 1.5 / n;
      i2 += 2 * g * g * 1.5 / n;
    }
    double prev = std::numeric_limits<double>::infinity();
    for (double k : {5.0, 10.0, 20.0}) {
      const KernelMatrix m = opk_assemble(amp, k, make_circle_grid(static_cast<int>(8 * k)));
      CHECK(m.hermitian_defect() <= 1e-12 * m.entries.cwiseAbs().maxCoeff());
      CHECK(std::abs(scaled_trace_power(m, 1) - 2 * pi * i1) <= 1e-9);
      const double gap = std::abs(scaled_trace_power(m, 2) - 2 * pi * i2);
      CHECK(gap < prev);
      prev = gap;
    }
  }

  TEST_CASE("resolution rule") {
    const auto r2 = recommended_resolution(2, 10.0);
    CHECK(r2.n_polar == 80);
    const auto r3 = recommended_resolution(3, 10.0);
    CHECK(r3.n_polar == 20);
    CHECK(r3.n_azimuth == 40);
    const KernelMatrix m = born_matrix(PotentialSpec::gaussian(2, 1.0, 1.0), 10.0, make_circle_grid(16));
    CHECK(m.under_resolved);
    CHECK_FALSE(is_resolved(make_circle_grid(16), 10.0));
    CHECK(is_resolved(make_circle_grid(80), 10.0));
  }

  TEST_CASE("hermitian_eigenvalues and dimension checks") {
    const KernelMatrix m = born_matrix(PotentialSpec::gaussian(2, 1.0, 1.0), 5.0, make_circle_grid(40));
    const Eigen::VectorXd ev = hermitian_eigenvalues(m);
    CHECK(ev.size() == 40);
    for (Eigen::Index i = 1; i < ev.size(); ++i) CHECK(ev[i] >= ev[i - 1]);
    CHECK(ev.sum() == doctest::Approx(m.entries.trace().real()).epsilon(1e-12));
    CHECK_THROWS_AS(born_matrix(PotentialSpec::gaussian(3, 1.0, 1.0), 5.0, make_circle_grid(40)), Error);
  }
}
