#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/xray.hpp"

using namespace scatterdensity;
using std::numbers::pi;

namespace {

const double half_sqrt_pi = 0.5 * std::sqrt(pi);

Vec3 random_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), dim == 3 ? n(rng) : 0.0).normalized();
}

Vec3 random_eta(std::mt19937_64& rng, const Frame& f, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return f.point(std::array<double, 2>{u(rng), f.dim == 3 ? u(rng) : 0.0});
}

}  // namespace

TEST_SUITE("xray") {
  TEST_CASE("examples") {
    const PotentialSpec g = PotentialSpec::gaussian(2, 1.0, 1.0);
    CHECK(xray(PotentialSpec::zero(2), Vec3(1, 0, 0), Vec3(0, 0.5, 0)) == 0.0);
    CHECK(xray(g, Vec3(1, 0, 0), Vec3::Zero()) == doctest::Approx(-half_sqrt_pi).epsilon(1e-14));
    CHECK(xray(g, Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(-half_sqrt_pi * std::exp(-1.0)).epsilon(1e-14));
    CHECK(xray(g, Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(-0.326025).epsilon(1e-6));
    const XrayQuery q{frame(Vec3(0, 1, 0), 2), {1.0, 0.0}};
    CHECK(xray(g, q) == doctest::Approx(-half_sqrt_pi * std::exp(-1.0)).epsilon(1e-14));
  }

  TEST_CASE("xray_radial: examples") {
    const PotentialSpec g = PotentialSpec::gaussian(2, 1.0, 1.0);
    CHECK(xray_radial(g, 0.0) == doctest::Approx(-0.886227).epsilon(1e-6));
    CHECK(std::abs(xray_radial(g, 0.0) + half_sqrt_pi) <= 1e-10);
    CHECK(std::abs(xray_radial(g, 8.0)) <= 1e-12);
    CHECK(xray_radial(PotentialSpec::smooth_bump(3, 1.0, 1.5), 1.6) == 0.0);
    try {
      xray_radial(PotentialSpec::gaussian(2, 1.0, 1.0, Vec3(0.1, 0, 0)), 0.5);
      FAIL("expected NotRadial");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_radial);
    }
  }

  TEST_CASE("closed forms agree with line quadrature") {
    std::mt19937_64 rng(21);
    const std::vector<PotentialSpec> ps{
        PotentialSpec::gaussian(2, 1.0, 1.0), PotentialSpec::gaussian(3, -0.7, 1.3, Vec3(0.2, -0.5, 0.1)),
        PotentialSpec::gaussian_sum(2, {{1.0, 0.5, Vec3(1, 0, 0)}, {-2.0, 1.0, Vec3(0, 1, 0)}}),
        PotentialSpec::smooth_bump(3, 2.0, 1.5, Vec3(0.3, 0, 0)), PotentialSpec::power_decay(2, 1.0, 3.0),
        PotentialSpec::power_decay(3, 1.0, 2.5)};
    for (const auto& p : ps) {
      for (int i = 0; i < 20; ++i) {
        const Frame f = frame(random_direction(rng, p.dim()), p.dim());
        const Vec3 eta = random_eta(rng, f, 3.0);
        CHECK(std::abs(xray(p, f.omega, eta) - xray_quadrature(p, f.omega, eta)) <= 1e-9);
      }
    }
  }

  TEST_CASE("power_decay closed form") {
    // -1/2 \int (1+b^2+t^2)^{-3/2} dt = -(1+b^2)^{-1}.
    const PotentialSpec p = PotentialSpec::power_decay(2, 1.0, 3.0);
    for (double b : {0.0, 0.5, 2.0, 10.0}) {
      CHECK(xray(p, Vec3(1, 0, 0), Vec3(0, b, 0)) == doctest::Approx(-1.0 / (1.0 + b * b)).epsilon(1e-13));
    }
  }

  TEST_CASE("orientation symmetry and linearity") {
    std::mt19937_64 rng(4);
    const PotentialSpec p = PotentialSpec::gaussian_sum(3, {{1.0, 0.5, Vec3(1, 0, 0)}, {-2.0, 1.0, Vec3(0, 1, 1)}});
    const PotentialSpec b = PotentialSpec::smooth_bump(2, 1.0, 2.0, Vec3(0.5, 0.2, 0));
    for (const auto& v : {p, b}) {
      for (int i = 0; i < 50; ++i) {
        const Frame f = frame(random_direction(rng, v.dim()), v.dim());
        const Vec3 eta = random_eta(rng, f, 2.0);
        CHECK(xray(v, -f.omega, eta) == doctest::Approx(xray(v, f.omega, eta)).epsilon(1e-12));
        CHECK(xray(v.scaled(-2.5), f.omega, eta) == doctest::Approx(-2.5 * xray(v, f.omega, eta)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("radial consistency across frames") {
    std::mt19937_64 rng(8);
    for (const auto& p : {PotentialSpec::gaussian(3, 1.0, 1.0), PotentialSpec::smooth_bump(3, 1.0, 2.0),
                          PotentialSpec::power_decay(3, 1.0, 3.0)}) {
      const double want = xray_radial(p, 0.9);
      for (int i = 0; i < 20; ++i) {
        const Frame f = frame(random_direction(rng, 3), 3);
        const double phi = 2 * pi * std::uniform_real_distribution<double>(0, 1)(rng);
        const Vec3 eta = f.point(std::array<double, 2>{0.9 * std::cos(phi), 0.9 * std::sin(phi)});
        CHECK(std::abs(xray(p, f.omega, eta) - want) <= 1e-9);
      }
    }
  }

  TEST_CASE("certified envelope bounds |X|") {
    std::mt19937_64 rng(12);
    for (const auto& [p, rho] : std::vector<std::pair<PotentialSpec, double>>{
             {PotentialSpec::gaussian(2, 1.0, 1.0), 2.0},
             {PotentialSpec::gaussian(3, 1.0, 1.0), 6.0},
             {PotentialSpec::power_decay(2, 1.0, 1.5), 1.5}}) {
      const XrayBound b = certified_bound(p, rho);
      CHECK(b.rho == rho);
      for (int i = 0; i < 200; ++i) {
        const Frame f = frame(random_direction(rng, p.dim()), p.dim());
        const Vec3 eta = random_eta(rng, f, 20.0);
        CHECK(std::abs(xray(p, f.omega, eta)) <= b.at(eta.norm()) * (1 + 1e-12));
      }
      const double r = b.radius_below(1e-6);
      CHECK(b.at(r) <= 1e-6 * (1 + 1e-9));
    }
  }

  TEST_CASE("decay_check") {
    CHECK(decay_check(PotentialSpec::zero(2), 2.0, 100).max_ratio == 0.0);
    const DecayReport g = decay_check(PotentialSpec::gaussian(2, 1.0, 1.0), 2.0, 1000);
    CHECK(std::isfinite(g.max_ratio));
    CHECK(g.max_ratio > 0.0);
    CHECK(g.stable);
    const DecayReport s = decay_check(PotentialSpec::power_decay(2, 1.0, 1.5), 1.5, 1000);
    CHECK(std::isfinite(s.max_ratio));
    CHECK(s.stable);
    CHECK(s.max_ratio_doubled >= s.max_ratio);
    // Same seed, same report.
    const DecayReport again = decay_check(PotentialSpec::gaussian(2, 1.0, 1.0), 2.0, 1000);
    CHECK(again.max_ratio == g.max_ratio);
  }
}
