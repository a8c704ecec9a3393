#pragma once

#include <vector>

#include "scatterdensity/potential.hpp"
#include "scatterdensity/spectra.hpp"

namespace scatterdensity {

/// One partial-wave channel: index m (d = 2) or l (d = 3), unwrapped phase
/// shift delta, and its estimated absolute error.
struct Channel {
  int index = 0;
  double delta = 0.0;
  double est_error = 0.0;
};

struct PhaseShiftTable {
  double k = 1.0;
  int dim = 2;
  double tol = 1e-10;
  double match_radius = 0.0;
  std::vector<Channel> channels;  // indices 0..m_max, ascending
};

struct OracleOptions {
  /// Innermost radius; channels whose centrifugal barrier is weak start here
  /// with the regular power law r^{m+1/2} (d = 2) or r^{l+1} (d = 3).
  double r_min = 1e-6;
  /// Largest admissible matching radius.
  double max_radius = 200.0;
  /// Required WKB growth exp(growth) between the start point and the
  /// turning point when starting inside the barrier.
  double growth = 25.0;
  long max_steps = 5'000'000;
};

/// Degeneracy of a channel's S eigenvalue: 1 for m = 0, 2 for m >= 1 (d = 2);
/// 2l + 1 (d = 3).
int channel_multiplicity(int dim, int index);

/// Smallest R with |V(r)| <r> <= tol for all r >= R. Throws
/// MatchRadiusTooSmall when no such R <= max_radius exists.
double match_radius(const PotentialSpec& p, double tol, double max_radius = 200.0);

/// Phase shift of one channel. Integrates the radial equation
///   u'' + (k^2 - V(r) - c/r^2) u = 0,  c = m^2 - 1/4 (d = 2), l(l+1) (d = 3),
/// from the regular solution near the origin to R, alongside the free
/// equation to unwrap the phase, and matches to Bessel/Neumann solutions.
/// est_error compares two integrator tolerances a factor 64 apart.
Channel channel_phase_shift(const PotentialSpec& p, double k, int index, double tol, double R,
                            const OracleOptions& opts = {});

/// Channels 0..m_max. Throws NotRadial, MatchRadiusTooSmall, IntegratorFailure.
PhaseShiftTable phase_shifts(const PotentialSpec& p, double k, int m_max, double tol = 1e-10,
                             const OracleOptions& opts = {});

/// Channel count that comfortably covers the classically allowed channels
/// m < k R_match plus the barrier-suppressed edge.
int default_channel_limit(const PotentialSpec& p, double k, double tol = 1e-10);

/// Eigenphases of the full S(k^2): theta = 2 delta wrapped to [-pi, pi),
/// scaled by k, with channel degeneracy. Throws ChannelTruncation when
/// |delta_{m_max}| >= tol.
PhaseSpectrum full_s_spectrum(const PhaseShiftTable& t, const SpectrumOptions& opts = {});

/// First Born approximation to delta:
///   d = 2: -(pi/2) \int V(r) J_m(kr)^2 r dr
///   d = 3: -k \int V(r) j_l(kr)^2 r^2 dr
double born_phase_shift(const PotentialSpec& p, double k, int index);

/// theta wrapped to [-pi, pi).
double wrap_phase(double theta);

}  // namespace scatterdensity
