#pragma once

#include <limits>
#include <string>
#include <vector>

#include "scatterdensity/born_op.hpp"
#include "scatterdensity/limit_measure.hpp"

namespace scatterdensity {

enum class SpectrumSource { born_matrix, radial_oracle };

std::string to_string(SpectrumSource s);

/// Scaled eigenphases k*theta_n with multiplicities.
///
/// For born_matrix spectra the values are eigenvalues of the Hermitian
/// matrix Q(k) (which stand in for k*theta_n); for radial_oracle spectra
/// they are k*theta_n with theta_n = 2 delta wrapped to [-pi, pi), and
/// `unwrapped` holds the matching k * 2 delta before wrapping.
///
/// Ordered by decreasing |value|, ties by decreasing value.
struct PhaseSpectrum {
  std::vector<double> scaled_phases;
  std::vector<int> multiplicities;
  std::vector<double> unwrapped;
  double k = 1.0;
  int dim = 2;
  SpectrumSource source = SpectrumSource::born_matrix;
  /// Sum (with multiplicity) of values dropped below the noise floor.
  double floor_mass = 0.0;

  std::size_t distinct() const { return scaled_phases.size(); }
  std::size_t count() const;
  /// Values repeated by multiplicity, ascending.
  std::vector<double> expanded() const;
};

struct SpectrumOptions {
  /// Values with |v| <= noise_floor_rel * max|v| are dropped.
  double noise_floor_rel = 1e-10;
  /// Adjacent values a < b with
  /// b - a < merge_gap * max(|a|, |b|) + merge_floor_rel * max|v|
  /// are merged into one cluster.
  double merge_gap = 1e-8;
  double merge_floor_rel = 1e-12;
};

/// Merge, floor and order raw (value, multiplicity) pairs.
PhaseSpectrum make_spectrum(const std::vector<double>& values, const std::vector<int>& mults,
                            double k, int dim, SpectrumSource source,
                            const SpectrumOptions& opts = {},
                            const std::vector<double>& unwrapped = {});

/// Full Hermitian eigendecomposition of a born-labelled matrix.
PhaseSpectrum eigenphases(const KernelMatrix& m, const SpectrumOptions& opts = {});

/// k^{1-d} #{n : lo <= k theta_n <= hi}, multiplicities included.
double counting(const PhaseSpectrum& ps, const Interval& iv);
/// Unscaled count, for debugging.
long raw_count(const PhaseSpectrum& ps, const Interval& iv);

/// k^{1-d} sum_n psi(k theta_n).
double psi_sum(const PhaseSpectrum& ps, const BumpSpec& psi);

/// k^{1-d} sum_n (k theta_n)^ell. For ell = 1 the floor mass is included,
/// so the value equals the scaled trace.
double phase_moment(const PhaseSpectrum& ps, int ell);

/// k^{(1-d)/ell} (sum_n |k theta_n|^ell)^{1/ell}. Throws ExponentTooSmall when
/// ell < 1 or ell <= (d-1)/(rho-1).
double schatten_ratio(const PhaseSpectrum& ps, int ell,
                      double rho = std::numeric_limits<double>::infinity());

/// Max distance between sorted multisets; infinity when the sizes differ.
double multiset_distance(std::vector<double> a, std::vector<double> b);

}  // namespace scatterdensity
