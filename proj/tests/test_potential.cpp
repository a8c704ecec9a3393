#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/potential.hpp"
#include "scatterdensity/quadrature.hpp"

using namespace scatterdensity;
using std::numbers::pi;

namespace {

// \int e^{-(x-c)^2/a^2} e^{-i xi x} dx by Gauss-Legendre, the 1-D factor of
// a separable gaussian transform.
std::complex<double> gaussian_factor(double a, double c, double xi) {
  const QuadratureRule r = composite_gauss_legendre(c - 12 * a, c + 12 * a, 64, 20);
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = r.nodes[i];
    s += r.weights[i] * std::exp(-(x - c) * (x - c) / (a * a)) * std::exp(std::complex<double>(0.0, -xi * x));
  }
  return s;
}

double japanese(const Vec3& x) { return std::sqrt(1.0 + x.squaredNorm()); }

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("eval: gaussian examples") {
    const PotentialSpec g = PotentialSpec::gaussian(2, 1.0, 1.0);
    CHECK(eval(g, Vec3::Zero()) == 1.0);
    CHECK(eval(g, Vec3(1, 0, 0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(eval(g, Vec3(0.6, 0.8, 0)) == doctest::Approx(0.367879441171442).epsilon(1e-14));

    const Vec3 c(0.5, -0.3, 0);
    const PotentialSpec sum = PotentialSpec::gaussian_sum(2, {{1.0, 1.0, c}, {1.0, 1.0, -c}});
    CHECK(eval(sum, Vec3::Zero()) == doctest::Approx(2 * std::exp(-c.squaredNorm())).epsilon(1e-15));
    CHECK_FALSE(sum.is_radial());
  }

  TEST_CASE("eval: smooth_bump and power_decay") {
    const PotentialSpec b = PotentialSpec::smooth_bump(3, 2.0, 1.5);
    CHECK(eval(b, Vec3::Zero()) == doctest::Approx(2 * std::exp(-1.0)));
    CHECK(eval(b, Vec3(1.5, 0, 0)) == 0.0);
    CHECK(eval(b, Vec3(0, 0, 2)) == 0.0);
    const PotentialSpec p = PotentialSpec::power_decay(2, 3.0, 2.5);
    CHECK(eval(p, Vec3(1, 1, 0)) == doctest::Approx(3.0 * std::pow(3.0, -1.25)));
    CHECK(p.decay_exponent() == 2.5);
    CHECK(std::isinf(b.decay_exponent()));
  }

  TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(PotentialSpec::gaussian(2, 1.0, 0.0), Error);
    CHECK_THROWS_AS(PotentialSpec::gaussian(4, 1.0, 1.0), Error);
    CHECK_THROWS_AS(PotentialSpec::smooth_bump(2, 1.0, -1.0), Error);
    CHECK_THROWS_AS(PotentialSpec::power_decay(2, 1.0, 1.0), Error);
    CHECK_THROWS_AS(PotentialSpec::gaussian_sum(2, {}), Error);
  }

  TEST_CASE("fourier: values at the origin") {
    CHECK(fourier(PotentialSpec::gaussian(2, 1.0, 1.0), Vec3::Zero()).real() == doctest::Approx(pi).epsilon(1e-15));
    CHECK(fourier(PotentialSpec::gaussian(3, 1.0, 1.0), Vec3::Zero()).real() ==
          doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-15));
    CHECK(std::abs(fourier(PotentialSpec::gaussian(2, 0.0, 1.0), Vec3(1, 2, 0))) == 0.0);
    CHECK(std::abs(fourier(PotentialSpec::smooth_bump(3, 0.0, 1.0), Vec3(1, 2, 0))) == 0.0);
  }

  TEST_CASE("fourier: gaussian closed form against separable quadrature") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Vec3 c(0.4, -0.2, 0.3);
    const PotentialSpec g2 = PotentialSpec::gaussian(2, 1.3, 0.8, Vec3(c.x(), c.y(), 0));
    const PotentialSpec g3 = PotentialSpec::gaussian(3, 1.3, 0.8, c);
    for (int i = 0; i < 10; ++i) {
      const Vec3 xi(u(rng), u(rng), u(rng));
      const Vec3 xi2(xi.x(), xi.y(), 0.0);
      const auto want2 = 1.3 * gaussian_factor(0.8, c.x(), xi.x()) * gaussian_factor(0.8, c.y(), xi.y());
      const auto want3 = want2 * gaussian_factor(0.8, c.z(), xi.z());
      CHECK(std::abs(fourier(g2, xi2) - want2) <= 1e-12);
      CHECK(std::abs(fourier(g3, xi) - want3) <= 1e-12);
      // Hermitian symmetry of a real potential.
      CHECK(std::abs(fourier(g3, -xi) - std::conj(fourier(g3, xi))) <= 1e-14);
    }
  }

  TEST_CASE("fourier: power_decay against known Hankel transforms") {
    // d = 2, rho = 3: 2 pi \int J0(zr) r (1+r^2)^{-3/2} dr = 2 pi e^{-z}.
    // d = 3, rho = 4: (4 pi / z) \int r sin(zr) (1+r^2)^{-2} dr = pi^2 e^{-z}.
    const PotentialSpec p2 = PotentialSpec::power_decay(2, 1.0, 3.0);
    const PotentialSpec p3 = PotentialSpec::power_decay(3, 1.0, 4.0);
    for (double z : {0.1, 0.5, 1.0, 2.5, 6.0}) {
      CHECK(fourier_radial(p2, z) == doctest::Approx(2 * pi * std::exp(-z)).epsilon(1e-11));
      CHECK(fourier_radial(p3, z) == doctest::Approx(pi * pi * std::exp(-z)).epsilon(1e-11));
    }
    CHECK(fourier_radial(p2, 0.0) == doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(fourier_radial(p3, 0.0) == doctest::Approx(pi * pi).epsilon(1e-12));
    CHECK_THROWS_AS(fourier_radial(PotentialSpec::power_decay(2, 1.0, 1.5), 0.0), Error);
  }

  TEST_CASE("fourier: smooth_bump against direct 2-D quadrature") {
    const PotentialSpec b = PotentialSpec::smooth_bump(2, 1.0, 1.2);
    for (double z : {0.0, 1.0, 4.0}) {
      // Polar quadrature of V(r) cos(z r cos t) r dr dt.
      const QuadratureRule rr = composite_gauss_legendre(0.0, 1.2, 40, 20);
      const QuadratureRule tt = composite_gauss_legendre(0.0, 2 * pi, 16, 20);
      double s = 0.0;
      for (std::size_t i = 0; i < rr.size(); ++i) {
        for (std::size_t j = 0; j < tt.size(); ++j) {
          s += rr.weights[i] * tt.weights[j] * eval_radial(b, rr.nodes[i]) * rr.nodes[i] *
               std::cos(z * rr.nodes[i] * std::cos(tt.nodes[j]));
        }
      }
      CHECK(fourier_radial(b, z) == doctest::Approx(s).epsilon(1e-9));
    }
  }

  TEST_CASE("linearity in the amplitude") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::vector<PotentialSpec> ps{PotentialSpec::gaussian(3, 1.0, 0.7, Vec3(0.1, 0.2, 0.3)),
                                        PotentialSpec::smooth_bump(2, 1.5, 1.0),
                                        PotentialSpec::power_decay(3, 2.0, 5.0)};
    for (const auto& p : ps) {
      for (int i = 0; i < 10; ++i) {
        const double c = u(rng);
        const Vec3 x(u(rng), u(rng), p.dim() == 3 ? u(rng) : 0.0);
        const Vec3 xi(u(rng), u(rng), p.dim() == 3 ? u(rng) : 0.0);
        const PotentialSpec q = p.scaled(c);
        CHECK(eval(q, x) == doctest::Approx(c * eval(p, x)).epsilon(1e-14));
        CHECK(std::abs(fourier(q, xi) - c * fourier(p, xi)) <= 1e-12 * (1.0 + std::abs(fourier(p, xi))));
      }
    }
  }

  TEST_CASE("xrho_norm: examples") {
    const XrhoNorm g = xrho_norm(PotentialSpec::gaussian(2, 1.0, 1.0), 2.0);
    CHECK(g.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.argmax_radius == doctest::Approx(0.0));
    CHECK(xrho_norm(PotentialSpec::zero(3), 4.0).value == 0.0);
    CHECK(xrho_norm(PotentialSpec::power_decay(2, 1.0, 2.0), 2.0).value == doctest::Approx(1.0).epsilon(1e-12));
    // sup e^{-r^2}(1+r^2)^2 = 4 e^{-1} at r = 1.
    CHECK(xrho_norm(PotentialSpec::gaussian(3, 1.0, 1.0), 4.0).value ==
          doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-9));
    try {
      xrho_norm(PotentialSpec::power_decay(2, 1.0, 2.0), 3.0);
      FAIL("expected UnboundedNorm");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::unbounded_norm);
    }
  }

  TEST_CASE("decay: |V(x)| <x>^rho <= xrho_norm at random points") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::pair<PotentialSpec, double>> cases{
        {PotentialSpec::gaussian(2, 1.0, 1.0), 3.0},
        {PotentialSpec::gaussian_sum(3, {{1.0, 0.5, Vec3(1, 0, 0)}, {-2.0, 1.0, Vec3(0, 1, 1)}}), 4.0},
        {PotentialSpec::smooth_bump(2, -1.0, 2.0, Vec3(0.5, 0.5, 0)), 6.0},
        {PotentialSpec::power_decay(3, 1.0, 2.5), 2.5}};
    for (const auto& [p, rho] : cases) {
      const double norm = xrho_norm(p, rho).value;
      for (int i = 0; i < 1000; ++i) {
        Vec3 x(n(rng), n(rng), p.dim() == 3 ? n(rng) : 0.0);
        x *= 10.0 * u(rng) / x.norm();
        CHECK(std::abs(eval(p, x)) * std::pow(japanese(x), rho) <= norm * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("json round trip") {
    const PotentialSpec p = PotentialSpec::gaussian_sum(3, {{1.0, 0.5, Vec3(1, 0, 0)}, {-2.0, 1.0, Vec3(0, 1, 1)}});
    const PotentialSpec q = PotentialSpec::from_json(p.to_json());
    CHECK(q.to_json() == p.to_json());
    CHECK(eval(q, Vec3(0.3, 0.2, 0.1)) == eval(p, Vec3(0.3, 0.2, 0.1)));

    const auto j = nlohmann::json::parse(R"({"family":"power_decay","dim":2,"params":{"amplitude":2,"rho":3}})");
    const PotentialSpec r = PotentialSpec::from_json(j);
    CHECK(r.family() == Family::power_decay);
    CHECK(r.decay_exponent() == 3.0);

    try {
      PotentialSpec::from_json(nlohmann::json::parse(R"({"family":"yukawa","dim":2,"params":{}})"));
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config_error);
    }
  }
}
