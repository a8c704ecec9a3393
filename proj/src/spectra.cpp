#include "scatterdensity/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scatterdensity/errors.hpp"

namespace scatterdensity {

std::string to_string(SpectrumSource s) {
  return s == SpectrumSource::born_matrix ? "born_matrix" : "radial_oracle";
}

std::size_t PhaseSpectrum::count() const {
  return std::accumulate(multiplicities.begin(), multiplicities.end(), std::size_t{0});
}

std::vector<double> PhaseSpectrum::expanded() const {
  std::vector<double> out;
  out.reserve(count());
  for (std::size_t i = 0; i < scaled_phases.size(); ++i) {
    out.insert(out.end(), multiplicities[i], scaled_phases[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PhaseSpectrum make_spectrum(const std::vector<double>& values, const std::vector<int>& mults,
                            double k, int dim, SpectrumSource source, const SpectrumOptions& opts,
                            const std::vector<double>& unwrapped) {
  PhaseSpectrum ps;
  ps.k = k;
  ps.dim = dim;
  ps.source = source;
  const bool keep_unwrapped = !unwrapped.empty();

  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  const double floor = opts.noise_floor_rel * vmax;

  struct Entry {
    double value;
    int mult;
    double unwrapped;
  };
  std::vector<Entry> kept;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int mult = mults.empty() ? 1 : mults[i];
    if (std::abs(values[i]) <= floor || values[i] == 0.0) {
      ps.floor_mass += mult * values[i];
      continue;
    }
    kept.push_back({values[i], mult, keep_unwrapped ? unwrapped[i] : 0.0});
  }
  std::sort(kept.begin(), kept.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });

  // Merge clusters of near-equal values; the cluster value is the
  // multiplicity-weighted mean so first moments are preserved.
  std::vector<Entry> merged;
  for (const Entry& e : kept) {
    if (!merged.empty() &&
        e.value - merged.back().value <
            opts.merge_gap * std::max(std::abs(e.value), std::abs(merged.back().value)) + opts.merge_floor_rel * vmax) {
      Entry& m = merged.back();
      const int total = m.mult + e.mult;
      m.value = (m.value * m.mult + e.value * e.mult) / total;
      m.unwrapped = (m.unwrapped * m.mult + e.unwrapped * e.mult) / total;
      m.mult = total;
    } else {
      merged.push_back(e);
    }
  }
  std::stable_sort(merged.begin(), merged.end(), [](const Entry& a, const Entry& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) > std::abs(b.value);
    return a.value > b.value;
  });
  for (const Entry& e : merged) {
    ps.scaled_phases.push_back(e.value);
    ps.multiplicities.push_back(e.mult);
    if (keep_unwrapped) ps.unwrapped.push_back(e.unwrapped);
  }
  return ps;
}

PhaseSpectrum eigenphases(const KernelMatrix& m, const SpectrumOptions& opts) {
  if (m.label != KernelLabel::born) {
    throw Error(ErrorKind::invalid_argument, "eigenphases expects a born-labelled matrix");
  }
  const Eigen::VectorXd ev = hermitian_eigenvalues(m);
  const std::vector<double> values(ev.data(), ev.data() + ev.size());
  return make_spectrum(values, {}, m.k, m.dim(), SpectrumSource::born_matrix, opts);
}

long raw_count(const PhaseSpectrum& ps, const Interval& iv) {
  validate_interval(iv);
  long n = 0;
  for (std::size_t i = 0; i < ps.scaled_phases.size(); ++i) {
    const double v = ps.scaled_phases[i];
    if (v >= iv.lo && v <= iv.hi) n += ps.multiplicities[i];
  }
  return n;
}

double counting(const PhaseSpectrum& ps, const Interval& iv) {
  return std::pow(ps.k, 1 - ps.dim) * static_cast<double>(raw_count(ps, iv));
}

double psi_sum(const PhaseSpectrum& ps, const BumpSpec& psi) {
  psi.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < ps.scaled_phases.size(); ++i) {
    s += ps.multiplicities[i] * psi(ps.scaled_phases[i]);
  }
  return std::pow(ps.k, 1 - ps.dim) * s;
}

double phase_moment(const PhaseSpectrum& ps, int ell) {
  if (ell < 1) throw Error(ErrorKind::invalid_argument, "moment order must be >= 1");
  double s = ell == 1 ? ps.floor_mass : 0.0;
  for (std::size_t i = 0; i < ps.scaled_phases.size(); ++i) {
    s += ps.multiplicities[i] * std::pow(ps.scaled_phases[i], ell);
  }
  return std::pow(ps.k, 1 - ps.dim) * s;
}

double schatten_ratio(const PhaseSpectrum& ps, int ell, double rho) {
  if (ell < 1 || ell <= (ps.dim - 1) / (rho - 1.0)) {
    throw Error(ErrorKind::exponent_too_small,
                "Schatten exponent " + std::to_string(ell) + " needs ell >= 1 and ell > (d-1)/(rho-1)");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < ps.scaled_phases.size(); ++i) {
    s += ps.multiplicities[i] * std::pow(std::abs(ps.scaled_phases[i]), ell);
  }
  return std::pow(ps.k, (1.0 - ps.dim) / ell) * std::pow(s, 1.0 / ell);
}

double multiset_distance(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace scatterdensity
