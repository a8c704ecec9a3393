#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/harness.hpp"

using namespace scatterdensity;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitAcceptance = 2;

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::config_error, "cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, path + ": " + e.what());
  }
}

// Inline JSON when the argument starts with '{', otherwise a file path.
json potential_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::config_error, std::string("--potential: ") + e.what());
    }
  }
  json j = read_json_file(arg);
  return j.contains("potential") ? j["potential"] : j;
}

double parse_bound(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::config_error, "bad interval end '" + s + "'");
}

Interval parse_interval(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::config_error, "interval must be 'lo,hi'");
  return {parse_bound(s.substr(0, comma)), parse_bound(s.substr(comma + 1))};
}

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  bool verbose = false;
  std::string potential;
  std::vector<int> moments;
  std::vector<std::string> intervals;
  std::optional<double> k;
  std::optional<int> grid_n;
  std::optional<int> mmax;
  std::optional<double> tol;
  std::vector<double> k_ladder;
  std::string amplitude;
  std::optional<int> dim;
};

RunConfig load_config(const Options& o, const std::string& command) {
  RunConfig cfg;
  json j = json::object();
  if (!o.config.empty()) j = read_json_file(o.config);
  if (!o.potential.empty()) j["potential"] = potential_json(o.potential);
  if (!j.contains("potential")) {
    throw Error(ErrorKind::config_error, command + " needs --potential or a config with a 'potential'");
  }
  cfg = RunConfig::from_json(j);
  if (!o.moments.empty()) cfg.moments = o.moments;
  if (!o.intervals.empty()) {
    cfg.intervals.clear();
    for (const auto& s : o.intervals) cfg.intervals.push_back(parse_interval(s));
  }
  if (!o.k_ladder.empty()) cfg.k_ladder = o.k_ladder;
  if (o.k) cfg.k_ladder = {*o.k};
  if (o.grid_n) cfg.grid.fixed_n = *o.grid_n;
  if (o.mmax) cfg.oracle.m_max = *o.mmax;
  if (o.tol) cfg.oracle.tol = *o.tol;
  cfg.threads = o.threads;
  return cfg;
}

ConvergenceReport run_psido(const Options& o) {
  json j = json::object();
  if (!o.config.empty()) j = read_json_file(o.config);
  std::string amplitude = j.value("amplitude", std::string("bump"));
  int dim = j.value("dim", 2);
  std::vector<double> ladder = j.value("k_ladder", std::vector<double>{10.0, 20.0, 40.0});
  GridRule grid;
  grid.points_per_k = 8.0;
  grid.polar_per_k = 3.0;
  if (j.contains("grid")) {
    grid.points_per_k = j["grid"].value("points_per_k", grid.points_per_k);
    grid.polar_per_k = j["grid"].value("polar_per_k", grid.polar_per_k);
    grid.fixed_n = j["grid"].value("fixed_n", grid.fixed_n);
  }
  if (!o.amplitude.empty()) amplitude = o.amplitude;
  if (o.dim) dim = *o.dim;
  if (!o.k_ladder.empty()) ladder = o.k_ladder;
  if (o.grid_n) grid.fixed_n = *o.grid_n;
  return psido_check(amplitude, dim, ladder, grid, o.threads);
}

void print_summary(const ConvergenceReport& rep, bool verbose) {
  if (verbose) {
    for (const auto& r : rep.rows) {
      std::printf("  %-28s %-14s k=%-8g value=% .12e target=% .12e gap=%.3e\n", r.functional.c_str(),
                  r.source.c_str(), r.k, r.value, r.target, r.abs_gap);
    }
    for (const auto& w : rep.warnings) std::printf("warning: %s\n", w.c_str());
  }
  for (const auto& r : rep.rules) {
    std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
  }
  if (!rep.complete) std::printf("[FAIL] incomplete: %s\n", rep.error_message.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-energy scattering phase density: Born matrices, X-ray transform, partial waves."};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_option("--threads", o.threads, "Worker threads (parallel over k)")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", o.verbose, "Print every functional row");
  };
  auto potential = [&](CLI::App* sub) {
    sub->add_option("--potential", o.potential, "Potential as inline JSON or a JSON file");
  };
  auto moments = [&](CLI::App* sub) {
    sub->add_option("--moments", o.moments, "Moment orders, e.g. 1,2,3")->delimiter(',');
  };

  CLI::App* xray = app.add_subcommand("xray", "X-ray transform samples, envelope and decay checks");
  common(xray);
  potential(xray);

  CLI::App* mu = app.add_subcommand("mu", "Limit-measure moments, bump integrals and interval masses");
  common(mu);
  potential(mu);
  moments(mu);
  mu->add_option("--interval", o.intervals, "Closed interval 'lo,hi' (inf allowed; use --interval=lo,hi)");

  CLI::App* born = app.add_subcommand("born", "Born matrix spectrum at one k");
  common(born);
  potential(born);
  moments(born);
  born->add_option("--k", o.k, "Wavenumber")->check(CLI::PositiveNumber);
  born->add_option("--grid-n", o.grid_n, "Grid size (d = 2: N; d = 3: polar count)")->check(CLI::PositiveNumber);

  CLI::App* oracle = app.add_subcommand("oracle", "Partial-wave phase shifts and full S spectrum");
  common(oracle);
  potential(oracle);
  oracle->add_option("--k", o.k, "Wavenumber")->check(CLI::PositiveNumber);
  oracle->add_option("--mmax", o.mmax, "Highest channel (default: automatic)")->check(CLI::NonNegativeNumber);
  oracle->add_option("--tol", o.tol, "Phase-shift tolerance")->check(CLI::PositiveNumber);

  CLI::App* converge = app.add_subcommand("converge", "k-sweep of all functionals against the limit measure");
  common(converge);
  potential(converge);
  moments(converge);
  converge->add_option("--k-ladder", o.k_ladder, "Wavenumbers, e.g. 20,40,80")->delimiter(',');

  CLI::App* psido = app.add_subcommand("psido-check", "Trace powers of Op_k[b] for a catalog amplitude");
  common(psido);
  psido->add_option("--amplitude", o.amplitude, "zero, bump, modulated or born_gaussian");
  psido->add_option("--dim", o.dim, "Dimension (2 or 3)");
  psido->add_option("--k-ladder", o.k_ladder, "Wavenumbers, e.g. 10,20,40")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  ConvergenceReport rep;
  try {
    if (psido->parsed()) {
      rep = run_psido(o);
    } else {
      const std::string command = app.get_subcommands().front()->get_name();
      RunConfig cfg = load_config(o, command);
      if (born->parsed()) {
        cfg.oracle.enabled = false;
        rep = run_sweep(cfg);
        rep.command = "born";
      } else if (xray->parsed()) {
        rep = run_xray(cfg);
      } else if (mu->parsed()) {
        rep = run_mu(cfg);
      } else if (oracle->parsed()) {
        rep = run_oracle(cfg);
      } else {
        rep = run_sweep(cfg);
      }
    }
    write_outputs(rep, o.out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }

  print_summary(rep, o.verbose);
  if (!rep.complete) return kExitNumerical;
  return rep.all_pass() ? kExitPass : kExitAcceptance;
}
