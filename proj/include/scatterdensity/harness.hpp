#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatterdensity/born_op.hpp"
#include "scatterdensity/limit_measure.hpp"
#include "scatterdensity/potential.hpp"
#include "scatterdensity/radial_oracle.hpp"
#include "scatterdensity/spectra.hpp"

namespace scatterdensity {

/// Matrix size as a function of k. d = 2: N = ceil(points_per_k * k);
/// d = 3: n_polar = ceil(polar_per_k * k), n_azimuth = 2 n_polar.
/// `fixed_n` > 0 overrides the rule (d = 2: N; d = 3: n_polar).
struct GridRule {
  double points_per_k = 12.8;
  double polar_per_k = 3.0;
  int fixed_n = 0;

  GridResolution resolution(int dim, double k) const;
};

struct OracleConfig {
  bool enabled = true;
  double tol = 1e-10;
  /// Highest channel; negative selects default_channel_limit.
  int m_max = -1;
};

struct XrayConfig {
  int samples = 64;
  /// Decay exponent for the envelope checks; 0 picks the potential's own
  /// exponent (or 4 for rapidly decaying families).
  double rho = 0.0;
};

struct RunConfig {
  PotentialSpec potential = PotentialSpec::gaussian(2, 1.0, 1.0);
  std::vector<double> k_ladder{20.0, 40.0, 80.0};
  GridRule grid;
  std::vector<int> moments{1, 2, 3};
  std::vector<Interval> intervals;
  std::vector<BumpSpec> bumps{BumpSpec{}};
  OracleConfig oracle;
  XrayConfig xray;
  /// psido-check only: amplitude name from the built-in catalog.
  std::string amplitude = "bump";
  std::uint64_t seed = 1;
  int threads = 1;

  int dim() const { return potential.dim(); }

  /// Missing keys keep their defaults. Throws ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Ladder strictly increasing and positive, moments finite for the
  /// potential's decay, intervals and bumps away from 0. Throws ConfigError.
  void validate() const;
};

/// One (functional, source, k) comparison.
struct FunctionalRow {
  std::string functional;
  std::string source;
  double k = 0.0;
  double value = 0.0;
  double value_error = 0.0;
  double target = 0.0;
  double target_error = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
};

/// Empirical orders p with gap ~ k^{-p} between consecutive ladder points.
struct RateRow {
  std::string functional;
  std::string source;
  std::vector<double> k;
  std::vector<double> orders;
};

struct RuleResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct SpectrumDump {
  double k = 0.0;
  PhaseSpectrum spectrum;
};

struct ConvergenceReport {
  std::string command;
  bool complete = true;
  std::string error_kind;
  std::string error_message;
  nlohmann::json config;
  std::vector<FunctionalRow> rows;
  std::vector<RateRow> rates;
  std::vector<RuleResult> rules;
  std::vector<SpectrumDump> spectra;
  std::vector<std::string> warnings;
  /// Two-column gnuplot data keyed by file stem.
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> plots;
  /// Command-specific payload (channel tables, x-ray samples).
  nlohmann::json extra = nlohmann::json::object();

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Functional names used in reports: "moment:2", "psi:c=-0.5,w=0.2",
/// "interval:[-inf,-0.44]", "trace:2".
std::string moment_name(int ell);
std::string psi_name(const BumpSpec& psi);
std::string interval_name(const Interval& iv);

/// Gaps of one functional along the ladder are accepted when each step
/// decreases strictly or the later gap is already within its noise floor.
RuleResult decreasing_rule(const std::string& name, const std::vector<FunctionalRow>& rows);

/// Born matrix (and radial oracle when the potential is centered) at every
/// k, all functionals against limit_measure targets.
ConvergenceReport run_sweep(const RunConfig& cfg);

/// Built-in admissible amplitudes: zero, bump, modulated, born_gaussian.
Amplitude catalog_amplitude(const std::string& name, int dim);
/// \int_S \int_Lambda b(omega, omega, eta)^ell deta domega for a catalog amplitude.
double diagonal_symbol_integral(const std::string& name, int dim, int ell);

/// Scaled trace powers of Op_k[b] against diagonal-symbol integrals, ell = 1, 2, 3.
ConvergenceReport psido_check(const std::string& amplitude, int dim, const std::vector<double>& k_ladder,
                              const GridRule& grid, int threads = 1);

/// Limit-measure targets only.
ConvergenceReport run_mu(const RunConfig& cfg);

/// Phase shifts at the first ladder k; spectrum plus channel table.
ConvergenceReport run_oracle(const RunConfig& cfg);

/// Closed form vs line quadrature at sampled (omega, eta), envelope and decay checks.
ConvergenceReport run_xray(const RunConfig& cfg);

/// out_dir/{config.json, spectra.csv, functionals.csv, report.json, plots/*.dat}.
void write_outputs(const ConvergenceReport& report, const std::string& out_dir);

}  // namespace scatterdensity
