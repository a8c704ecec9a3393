#include "scatterdensity/potential.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"

namespace scatterdensity {

namespace {

constexpr double pi = std::numbers::pi;

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::invalid_argument, "dimension must be 2 or 3");
}

Vec3 read_center(const nlohmann::json& params, int dim) {
  Vec3 c = Vec3::Zero();
  if (!params.contains("center")) return c;
  const auto& arr = params.at("center");
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim) {
    throw Error(ErrorKind::config_error, "center must be an array of length dim");
  }
  for (int i = 0; i < dim; ++i) c[i] = arr[i].get<double>();
  return c;
}

nlohmann::json write_center(const Vec3& c, int dim) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < dim; ++i) arr.push_back(c[i]);
  return arr;
}

double bump_profile(double s) {
  // exp(-1/(1-s^2)) for |s| < 1
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::gaussian_sum: return "gaussian_sum";
    case Family::smooth_bump: return "smooth_bump";
    case Family::power_decay: return "power_decay";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "gaussian_sum") return Family::gaussian_sum;
  if (s == "smooth_bump") return Family::smooth_bump;
  if (s == "power_decay") return Family::power_decay;
  throw Error(ErrorKind::config_error, "unknown potential family '" + s + "'");
}

PotentialSpec PotentialSpec::gaussian(int dim, double amplitude, double width, Vec3 center) {
  PotentialSpec p = gaussian_sum(dim, {GaussianTerm{amplitude, width, center}});
  p.family_ = Family::gaussian;
  return p;
}

PotentialSpec PotentialSpec::gaussian_sum(int dim, std::vector<GaussianTerm> terms) {
  check_dim(dim);
  if (terms.empty()) throw Error(ErrorKind::invalid_argument, "gaussian_sum needs at least one term");
  for (auto& t : terms) {
    if (!(t.width > 0.0)) throw Error(ErrorKind::invalid_argument, "gaussian width must be > 0");
    if (dim == 2) t.center.z() = 0.0;
  }
  PotentialSpec p;
  p.family_ = Family::gaussian_sum;
  p.dim_ = dim;
  p.terms_ = std::move(terms);
  return p;
}

PotentialSpec PotentialSpec::smooth_bump(int dim, double amplitude, double radius, Vec3 center) {
  check_dim(dim);
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "smooth_bump radius must be > 0");
  if (dim == 2) center.z() = 0.0;
  PotentialSpec p;
  p.family_ = Family::smooth_bump;
  p.dim_ = dim;
  p.amplitude_ = amplitude;
  p.radius_ = radius;
  p.center_ = center;
  return p;
}

PotentialSpec PotentialSpec::power_decay(int dim, double amplitude, double rho) {
  check_dim(dim);
  if (!(rho > 1.0)) throw Error(ErrorKind::invalid_argument, "power_decay needs rho > 1");
  PotentialSpec p;
  p.family_ = Family::power_decay;
  p.dim_ = dim;
  p.amplitude_ = amplitude;
  p.rho_ = rho;
  return p;
}

PotentialSpec PotentialSpec::from_json(const nlohmann::json& j) {
  try {
    const Family fam = family_from_string(j.at("family").get<std::string>());
    const int dim = j.at("dim").get<int>();
    check_dim(dim);
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    switch (fam) {
      case Family::gaussian:
        return gaussian(dim, params.value("amplitude", 1.0), params.value("width", 1.0),
                        read_center(params, dim));
      case Family::gaussian_sum: {
        std::vector<GaussianTerm> terms;
        for (const auto& t : params.at("terms")) {
          terms.push_back({t.value("amplitude", 1.0), t.value("width", 1.0), read_center(t, dim)});
        }
        return gaussian_sum(dim, std::move(terms));
      }
      case Family::smooth_bump:
        return smooth_bump(dim, params.value("amplitude", 1.0), params.value("radius", 1.0),
                           read_center(params, dim));
      case Family::power_decay:
        return power_decay(dim, params.value("amplitude", 1.0), params.at("rho").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config_error, std::string("potential: ") + e.what());
  }
  throw Error(ErrorKind::config_error, "potential: unreachable family");
}

nlohmann::json PotentialSpec::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  switch (family_) {
    case Family::gaussian:
      params["amplitude"] = terms_[0].amplitude;
      params["width"] = terms_[0].width;
      params["center"] = write_center(terms_[0].center, dim_);
      break;
    case Family::gaussian_sum: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& t : terms_) {
        arr.push_back({{"amplitude", t.amplitude},
                       {"width", t.width},
                       {"center", write_center(t.center, dim_)}});
      }
      params["terms"] = arr;
      break;
    }
    case Family::smooth_bump:
      params["amplitude"] = amplitude_;
      params["radius"] = radius_;
      params["center"] = write_center(center_, dim_);
      break;
    case Family::power_decay:
      params["amplitude"] = amplitude_;
      params["rho"] = rho_;
      break;
  }
  return {{"family", to_string(family_)}, {"dim", dim_}, {"params", params}};
}

double PotentialSpec::amplitude() const {
  if (family_ == Family::gaussian) return terms_[0].amplitude;
  return amplitude_;
}

double PotentialSpec::decay_exponent() const {
  return family_ == Family::power_decay ? rho_ : std::numeric_limits<double>::infinity();
}

bool PotentialSpec::is_zero() const {
  if (family_ == Family::gaussian || family_ == Family::gaussian_sum) {
    for (const auto& t : terms_) {
      if (t.amplitude != 0.0) return false;
    }
    return true;
  }
  return amplitude_ == 0.0;
}

bool PotentialSpec::is_radial() const {
  switch (family_) {
    case Family::gaussian:
    case Family::gaussian_sum:
      for (const auto& t : terms_) {
        if (t.center.squaredNorm() != 0.0) return false;
      }
      return true;
    case Family::smooth_bump: return center_.squaredNorm() == 0.0;
    case Family::power_decay: return true;
  }
  return false;
}

PotentialSpec PotentialSpec::scaled(double c) const {
  PotentialSpec p = *this;
  for (auto& t : p.terms_) t.amplitude *= c;
  p.amplitude_ *= c;
  return p;
}

double eval(const PotentialSpec& p, const Vec3& x) {
  switch (p.family()) {
    case Family::gaussian:
    case Family::gaussian_sum: {
      double v = 0.0;
      for (const auto& t : p.terms()) {
        v += t.amplitude * std::exp(-(x - t.center).squaredNorm() / (t.width * t.width));
      }
      return v;
    }
    case Family::smooth_bump:
      return p.amplitude() * bump_profile((x - p.center()).norm() / p.radius());
    case Family::power_decay:
      return p.amplitude() * std::pow(1.0 + x.squaredNorm(), -0.5 * p.decay_exponent());
  }
  return 0.0;
}

double eval_radial(const PotentialSpec& p, double r) {
  switch (p.family()) {
    case Family::gaussian:
    case Family::gaussian_sum: {
      double v = 0.0;
      for (const auto& t : p.terms()) v += t.amplitude * std::exp(-(r * r) / (t.width * t.width));
      return v;
    }
    case Family::smooth_bump: return p.amplitude() * bump_profile(r / p.radius());
    case Family::power_decay:
      return p.amplitude() * std::pow(1.0 + r * r, -0.5 * p.decay_exponent());
  }
  return 0.0;
}

double fourier_radial(const PotentialSpec& p, double z) {
  const int d = p.dim();
  switch (p.family()) {
    case Family::gaussian:
    case Family::gaussian_sum: {
      double v = 0.0;
      for (const auto& t : p.terms()) {
        v += t.amplitude * std::pow(t.width * std::sqrt(pi), d) *
             std::exp(-0.25 * t.width * t.width * z * z);
      }
      return v;
    }
    case Family::smooth_bump: {
      if (p.amplitude() == 0.0) return 0.0;
      const double R = p.radius();
      std::function<double(double)> f;
      if (d == 2) {
        f = [&](double r) { return bump_profile(r / R) * boost::math::cyl_bessel_j(0, z * r) * r; };
      } else {
        f = [&](double r) {
          const double x = z * r;
          const double sinc = x < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
          return bump_profile(r / R) * sinc * r * r;
        };
      }
      const double angular = d == 2 ? 2.0 * pi : 4.0 * pi;
      const double tol = kFourierTolerance / (angular * std::abs(p.amplitude()));
      return p.amplitude() * angular * integrate_adaptive(f, 0.0, R, tol).value;
    }
    case Family::power_decay: {
      if (p.amplitude() == 0.0) return 0.0;
      const double s = 0.5 * p.decay_exponent();
      const double half_d = 0.5 * d;
      if (z == 0.0) {
        if (p.decay_exponent() <= d) {
          throw Error(ErrorKind::numerical_failure,
                      "power_decay transform is unbounded at xi = 0 for rho <= d");
        }
        return p.amplitude() * std::pow(pi, half_d) * boost::math::tgamma(s - half_d) /
               boost::math::tgamma(s);
      }
      const double nu = std::abs(half_d - s);
      return p.amplitude() * std::pow(2.0 * pi, half_d) * std::pow(2.0, 1.0 - s) /
             boost::math::tgamma(s) * std::pow(z, s - half_d) *
             boost::math::cyl_bessel_k(nu, z);
    }
  }
  return 0.0;
}

std::complex<double> fourier(const PotentialSpec& p, const Vec3& xi) {
  switch (p.family()) {
    case Family::gaussian:
    case Family::gaussian_sum: {
      std::complex<double> v = 0.0;
      const int d = p.dim();
      for (const auto& t : p.terms()) {
        const double mag = t.amplitude * std::pow(t.width * std::sqrt(pi), d) *
                           std::exp(-0.25 * t.width * t.width * xi.squaredNorm());
        const double phase = -xi.dot(t.center);
        v += phase == 0.0 ? std::complex<double>(mag, 0.0) : std::polar(mag, phase);
      }
      return v;
    }
    case Family::smooth_bump: {
      const double mag = fourier_radial(p, xi.norm());
      const double phase = -xi.dot(p.center());
      return phase == 0.0 ? std::complex<double>(mag, 0.0) : std::polar(mag, phase);
    }
    case Family::power_decay: return {fourier_radial(p, xi.norm()), 0.0};
  }
  return 0.0;
}

XrhoNorm xrho_norm(const PotentialSpec& p, double rho) {
  if (!(rho > 1.0)) throw Error(ErrorKind::invalid_argument, "xrho_norm needs rho > 1");
  XrhoNorm best;
  if (p.is_zero()) return best;

  std::vector<Vec3> rays;
  if (p.is_radial()) {
    rays.push_back(Vec3::UnitX());
  } else if (p.dim() == 2) {
    for (int i = 0; i < 256; ++i) rays.push_back(direction(2, 2.0 * pi * i / 256));
  } else {
    rays = make_sphere_grid(24, 48).nodes;
  }

  // Linear samples near the origin, geometric beyond.
  std::vector<double> radii;
  for (int i = 0; i <= 4000; ++i) radii.push_back(0.01 * i);
  while (radii.back() < 1e6) radii.push_back(radii.back() * 1.05);

  Vec3 best_ray = rays.front();
  std::size_t best_index = 0;
  for (const Vec3& u : rays) {
    auto g = [&](double r) { return std::abs(eval(p, r * u)) * std::pow(1.0 + r * r, 0.5 * rho); };
    double prev = 0.0, last = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double v = g(radii[i]);
      if (v > best.value) {
        best.value = v;
        best.argmax_radius = radii[i];
        best_ray = u;
        best_index = i;
      }
      prev = last;
      last = v;
    }
    if (last > 0.0 && last >= best.value * (1.0 - 1e-12) && last > prev * (1.0 + 1e-9)) {
      throw Error(ErrorKind::unbounded_norm,
                  "|V|<x>^rho still increasing at r = " + std::to_string(radii.back()));
    }
  }

  // Golden-section/Brent refinement between the neighbouring samples.
  const double lo = radii[best_index == 0 ? 0 : best_index - 1];
  const double hi = radii[std::min(best_index + 1, radii.size() - 1)];
  if (hi > lo) {
    auto neg = [&](double r) {
      return -std::abs(eval(p, r * best_ray)) * std::pow(1.0 + r * r, 0.5 * rho);
    };
    const auto [r, v] = boost::math::tools::brent_find_minima(neg, lo, hi, 40);
    if (-v > best.value) {
      best.value = -v;
      best.argmax_radius = r;
    }
  }
  return best;
}

}  // namespace scatterdensity
