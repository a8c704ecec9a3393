#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <string>

#include "scatterdensity/geometry.hpp"
#include "scatterdensity/potential.hpp"

namespace scatterdensity {

enum class KernelLabel { born, psido };

/// Nystrom discretization of an integral operator on S^{d-1}, stored in the
/// weight-symmetrized form W^{1/2} K W^{1/2} (W = diag of grid weights), so
/// the matrix is Hermitian whenever the operator is self-adjoint.
struct KernelMatrix {
  SphereGrid grid;
  Eigen::MatrixXcd entries;
  double k = 1.0;
  KernelLabel label = KernelLabel::born;
  /// Set when the grid is coarser than the resolution rule for this k.
  bool under_resolved = false;

  int dim() const { return grid.dim; }
  Eigen::Index size() const { return entries.rows(); }
  /// max |M - M^*| over entries.
  double hermitian_defect() const;
};

/// Unweighted kernel of Q(k) = k Im S_B(k^2):
///   -1/2 (k/2pi)^{d-1} V^(k(omega - omega')).
std::complex<double> born_kernel(const PotentialSpec& p, double k, const Vec3& omega,
                                 const Vec3& omega_prime);

/// Weight-symmetrized Q(k) on `grid`. Entries are mirrored so the result is
/// exactly Hermitian. Radial potentials reuse V^ across node pairs at equal
/// distance (uniform circle, product sphere grids).
KernelMatrix born_matrix(const PotentialSpec& p, double k, const SphereGrid& grid);

/// Grid rule: d = 2, N >= c k; d = 3, n_polar >= 2k, n_azimuth = 2 n_polar.
GridResolution recommended_resolution(int dim, double k, double points_per_k = 8.0);
bool is_resolved(const SphereGrid& grid, double k, double points_per_k = 8.0);

/// Amplitude b(omega, omega', eta) with eta given by coordinates in
/// frame(kappa(omega, omega')). Admissible amplitudes vanish for
/// |eta| > support_radius and for |omega + omega'| < exclusion_radius.
struct Amplitude {
  std::string name;
  std::function<double(const Vec3&, const Vec3&, const std::array<double, 2>&)> b;
  double support_radius = 1.0;
  double exclusion_radius = 0.39;
  /// b(omega, omega', eta) == b(omega', omega, eta): lets assembly mirror entries.
  bool symmetric = true;
};

/// Smooth cutoff: 1 within geodesic distance 3pi/4 of the diagonal, 0 beyond 7pi/8.
double chi0(const Vec3& omega, const Vec3& omega_prime);

/// chi0(omega, omega') X(kappa(omega, omega'), eta): the amplitude whose
/// Op_k reproduces Q(k) away from the anti-diagonal.
Amplitude born_amplitude(const PotentialSpec& p);

/// chi0(omega, omega') g(|eta|) for a radial profile g supported in [0, radius].
Amplitude radial_amplitude(std::string name, std::function<double(double)> g, double radius);

struct InnerQuadrature {
  int order = 16;
  /// Max phase k |<omega - omega', eta>| variation across one radial panel.
  double phase_per_panel = 3.0;
  int min_panels = 24;
  /// Polar angles on Lambda_kappa for d = 3 (raised with k |omega - omega'| R).
  int min_angles = 32;
};

/// Unweighted Op_k[b](omega, omega') = (k/2pi)^{d-1} \int e^{-ik<omega-omega',eta>} b deta.
std::complex<double> opk_kernel(const Amplitude& b, int dim, double k, const Vec3& omega,
                                const Vec3& omega_prime, const InnerQuadrature& q = {});

KernelMatrix opk_assemble(const Amplitude& b, double k, const SphereGrid& grid,
                          const InnerQuadrature& q = {});

/// Eigenvalues of a Hermitian kernel matrix, ascending. Throws EigFailure.
Eigen::VectorXd hermitian_eigenvalues(const KernelMatrix& m);

/// born: k^{1-d} Tr(M^ell), via eigenvalues for ell >= 2.
/// psido: (k/2pi)^{1-d} Re Tr(M^ell), via matrix powers.
double scaled_trace_power(const KernelMatrix& m, int ell);

}  // namespace scatterdensity
