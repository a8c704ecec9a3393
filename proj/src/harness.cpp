#include "scatterdensity/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "scatterdensity/errors.hpp"
#include "scatterdensity/quadrature.hpp"
#include "scatterdensity/xray.hpp"

namespace scatterdensity {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();

std::string short_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string full_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return inf;
    if (s == "-inf") return -inf;
  }
  throw Error(ErrorKind::config_error, "expected a number, got " + j.dump());
}

json number_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker; results are written by index so the
// outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

FunctionalRow make_row(std::string functional, std::string source, double k, double value,
                       double value_error, const MeasureValue& target) {
  FunctionalRow r;
  r.functional = std::move(functional);
  r.source = std::move(source);
  r.k = k;
  r.value = value;
  r.value_error = value_error;
  r.target = target.value;
  r.target_error = target.error;
  r.abs_gap = std::abs(value - target.value);
  r.rel_gap = target.value != 0.0 ? r.abs_gap / std::abs(target.value) : (r.abs_gap == 0.0 ? 0.0 : inf);
  return r;
}

std::vector<FunctionalRow> select(const std::vector<FunctionalRow>& rows, const std::string& functional,
                                  const std::string& source) {
  std::vector<FunctionalRow> out;
  for (const auto& r : rows) {
    if (r.functional == functional && r.source == source) out.push_back(r);
  }
  return out;
}

std::vector<RateRow> compute_rates(const std::vector<FunctionalRow>& rows) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.functional, r.source);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<RateRow> out;
  for (const auto& [f, s] : keys) {
    const auto sel = select(rows, f, s);
    if (sel.size() < 3) continue;
    RateRow rate{f, s, {}, {}};
    for (const auto& r : sel) rate.k.push_back(r.k);
    for (std::size_t i = 0; i + 1 < sel.size(); ++i) {
      const double a = sel[i].abs_gap, b = sel[i + 1].abs_gap;
      rate.orders.push_back(a > 0.0 && b > 0.0 ? std::log(a / b) / std::log(sel[i + 1].k / sel[i].k) : nan);
    }
    out.push_back(std::move(rate));
  }
  return out;
}

std::vector<std::pair<double, double>> gap_series(const std::vector<FunctionalRow>& rows) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows) out.emplace_back(r.k, r.abs_gap);
  return out;
}

std::string stem(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  return out;
}

void add_gap_plots(ConvergenceReport& rep) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rep.rows) {
    const auto key = std::make_pair(r.functional, r.source);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [f, s] : keys) {
    rep.plots.emplace_back("gap_" + stem(f) + "_" + s, gap_series(select(rep.rows, f, s)));
  }
}

double max_abs_slope(const BumpSpec& psi) {
  double best = 0.0;
  const int n = 4000;
  const double h = 2.0 * psi.half_width / n;
  for (int i = 0; i < n; ++i) {
    const double t = psi.lo() + i * h;
    best = std::max(best, std::abs(psi(t + h) - psi(t)) / h);
  }
  return 1.01 * best;
}

// Error of k^{1-d} sum F(v) when every v may be off by e, for monotone |v|^ell.
double moment_error(const PhaseSpectrum& ps, int ell, double e) {
  if (e == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < ps.distinct(); ++i) {
    const double v = std::abs(ps.scaled_phases[i]);
    s += ps.multiplicities[i] * (std::pow(v + e, ell) - std::pow(v, ell));
  }
  return s * std::pow(ps.k, 1 - ps.dim);
}

double psi_error(const PhaseSpectrum& ps, const BumpSpec& psi, double e) {
  if (e == 0.0) return 0.0;
  long near = 0;
  for (std::size_t i = 0; i < ps.distinct(); ++i) {
    const double v = ps.scaled_phases[i];
    if (v >= psi.lo() - e && v <= psi.hi() + e) near += ps.multiplicities[i];
  }
  return e * max_abs_slope(psi) * near * std::pow(ps.k, 1 - ps.dim);
}

double interval_error(const PhaseSpectrum& ps, const Interval& iv, double e) {
  if (e == 0.0) return 0.0;
  long near = 0;
  for (std::size_t i = 0; i < ps.distinct(); ++i) {
    const double v = ps.scaled_phases[i];
    if (std::abs(v - iv.lo) <= e || std::abs(v - iv.hi) <= e) near += ps.multiplicities[i];
  }
  return near * std::pow(ps.k, 1 - ps.dim);
}

struct Targets {
  std::vector<MeasureValue> moments;
  std::vector<MeasureValue> psis;
  std::vector<MeasureValue> intervals;
};

Targets compute_targets(const RunConfig& cfg) {
  Targets t;
  for (int ell : cfg.moments) t.moments.push_back(mu_moment(cfg.potential, ell));
  for (const auto& b : cfg.bumps) t.psis.push_back(mu_psi(cfg.potential, b));
  for (const auto& iv : cfg.intervals) t.intervals.push_back(mu_interval(cfg.potential, iv));
  return t;
}

json targets_json(const RunConfig& cfg, const Targets& t) {
  json out = json::array();
  for (std::size_t i = 0; i < cfg.moments.size(); ++i) {
    out.push_back({{"functional", moment_name(cfg.moments[i])}, {"value", t.moments[i].value},
                   {"error", t.moments[i].error}});
  }
  for (std::size_t i = 0; i < cfg.bumps.size(); ++i) {
    out.push_back(
        {{"functional", psi_name(cfg.bumps[i])}, {"value", t.psis[i].value}, {"error", t.psis[i].error}});
  }
  for (std::size_t i = 0; i < cfg.intervals.size(); ++i) {
    out.push_back({{"functional", interval_name(cfg.intervals[i])}, {"value", t.intervals[i].value},
                   {"error", t.intervals[i].error}});
  }
  return out;
}

// Rows for one spectrum against all configured targets. `e` bounds the
// error of each scaled phase.
void spectrum_rows(const RunConfig& cfg, const Targets& t, const PhaseSpectrum& ps, const std::string& source,
                   double e, std::vector<FunctionalRow>& rows) {
  for (std::size_t i = 0; i < cfg.moments.size(); ++i) {
    const int ell = cfg.moments[i];
    rows.push_back(make_row(moment_name(ell), source, ps.k, phase_moment(ps, ell), moment_error(ps, ell, e),
                            t.moments[i]));
  }
  for (std::size_t i = 0; i < cfg.bumps.size(); ++i) {
    rows.push_back(make_row(psi_name(cfg.bumps[i]), source, ps.k, psi_sum(ps, cfg.bumps[i]),
                            psi_error(ps, cfg.bumps[i], e), t.psis[i]));
  }
  for (std::size_t i = 0; i < cfg.intervals.size(); ++i) {
    rows.push_back(make_row(interval_name(cfg.intervals[i]), source, ps.k, counting(ps, cfg.intervals[i]),
                            interval_error(ps, cfg.intervals[i], e), t.intervals[i]));
  }
}

void record_error(ConvergenceReport& rep, const std::exception_ptr& ep) {
  rep.complete = false;
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    rep.error_kind = std::string(to_string(e.kind()));
    rep.error_message = e.what();
  } catch (const std::exception& e) {
    rep.error_kind = "numerical_failure";
    rep.error_message = e.what();
  }
}

double profile_extent(const PotentialSpec& p) {
  const XrayBound b = tightest_bound(p, 1e-6);
  return std::min(b.radius_below(1e-6), 50.0);
}

void add_profile_plot(ConvergenceReport& rep, const PotentialSpec& p) {
  if (!p.is_radial() || p.is_zero()) return;
  rep.plots.emplace_back("xray_profile", radial_profile(p, 400, profile_extent(p)));
}

int channels_for(const RunConfig& cfg, double k) {
  return cfg.oracle.m_max >= 0 ? cfg.oracle.m_max : default_channel_limit(cfg.potential, k, cfg.oracle.tol);
}

double max_est_error(const PhaseShiftTable& t) {
  double e = 0.0;
  for (const auto& ch : t.channels) e = std::max(e, ch.est_error);
  return e;
}

}  // namespace

GridResolution GridRule::resolution(int dim, double k) const {
  if (dim == 2) {
    return {fixed_n > 0 ? fixed_n : std::max(8, static_cast<int>(std::ceil(points_per_k * k))), 0};
  }
  const int np = fixed_n > 0 ? fixed_n : std::max(2, static_cast<int>(std::ceil(polar_per_k * k)));
  return {np, 2 * np};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorKind::config_error, "config must be a JSON object");
    if (!j.contains("potential")) throw Error(ErrorKind::config_error, "config needs a 'potential'");
    c.potential = PotentialSpec::from_json(j.at("potential"));
    if (j.contains("k_ladder")) c.k_ladder = j.at("k_ladder").get<std::vector<double>>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.grid.points_per_k = g.value("points_per_k", c.grid.points_per_k);
      c.grid.polar_per_k = g.value("polar_per_k", c.grid.polar_per_k);
      c.grid.fixed_n = g.value("fixed_n", c.grid.fixed_n);
    }
    if (j.contains("moments")) c.moments = j.at("moments").get<std::vector<int>>();
    if (j.contains("intervals")) {
      c.intervals.clear();
      for (const json& iv : j.at("intervals")) {
        if (!iv.is_array() || iv.size() != 2) throw Error(ErrorKind::config_error, "interval must be [lo, hi]");
        c.intervals.push_back({number(iv[0]), number(iv[1])});
      }
    }
    if (j.contains("bumps")) {
      c.bumps.clear();
      for (const json& b : j.at("bumps")) {
        c.bumps.push_back({b.at("center").get<double>(), b.at("half_width").get<double>(), b.value("height", 1.0)});
      }
    }
    if (j.contains("oracle")) {
      const json& o = j.at("oracle");
      c.oracle.enabled = o.value("enabled", c.oracle.enabled);
      c.oracle.tol = o.value("tol", c.oracle.tol);
      c.oracle.m_max = o.value("m_max", c.oracle.m_max);
    }
    if (j.contains("xray")) {
      c.xray.samples = j.at("xray").value("samples", c.xray.samples);
      c.xray.rho = j.at("xray").value("rho", c.xray.rho);
    }
    c.amplitude = j.value("amplitude", c.amplitude);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, e.what());
  }
  return c;
}

json RunConfig::to_json() const {
  json iv = json::array();
  for (const auto& i : intervals) iv.push_back({number_json(i.lo), number_json(i.hi)});
  json bs = json::array();
  for (const auto& b : bumps) bs.push_back({{"center", b.center}, {"half_width", b.half_width}, {"height", b.height}});
  return {{"potential", potential.to_json()},
          {"k_ladder", k_ladder},
          {"grid", {{"points_per_k", grid.points_per_k}, {"polar_per_k", grid.polar_per_k}, {"fixed_n", grid.fixed_n}}},
          {"moments", moments},
          {"intervals", iv},
          {"bumps", bs},
          {"oracle", {{"enabled", oracle.enabled}, {"tol", oracle.tol}, {"m_max", oracle.m_max}}},
          {"xray", {{"samples", xray.samples}, {"rho", xray.rho}}},
          {"amplitude", amplitude},
          {"seed", seed},
          {"threads", threads}};
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config_error, msg); };
  if (k_ladder.empty()) fail("k_ladder is empty");
  for (std::size_t i = 0; i < k_ladder.size(); ++i) {
    if (!(k_ladder[i] > 0.0) || !std::isfinite(k_ladder[i])) fail("k values must be positive and finite");
    if (i > 0 && !(k_ladder[i] > k_ladder[i - 1])) fail("k_ladder must be strictly increasing");
  }
  if (!(grid.points_per_k > 0.0) || !(grid.polar_per_k > 0.0) || grid.fixed_n < 0) fail("invalid grid rule");
  const double rho = potential.decay_exponent();
  for (int ell : moments) {
    if (ell < 1) fail("moments must be >= 1");
    if (std::isfinite(rho) && ell * (rho - 1.0) <= dim() - 1.0) {
      fail("moment " + std::to_string(ell) + " may diverge for rho = " + short_num(rho));
    }
  }
  try {
    for (const auto& iv : intervals) validate_interval(iv);
    for (const auto& b : bumps) b.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (!(oracle.tol > 0.0)) fail("oracle.tol must be > 0");
  if (xray.samples < 1) fail("xray.samples must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
}

bool ConvergenceReport::all_pass() const {
  return complete && std::all_of(rules.begin(), rules.end(), [](const RuleResult& r) { return r.pass; });
}

json ConvergenceReport::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"functional", r.functional},
                  {"source", r.source},
                  {"k", r.k},
                  {"value", r.value},
                  {"value_error", r.value_error},
                  {"target", r.target},
                  {"target_error", r.target_error},
                  {"abs_gap", r.abs_gap},
                  {"rel_gap", r.rel_gap}});
  }
  json rt = json::array();
  for (const auto& r : rates) {
    rt.push_back({{"functional", r.functional}, {"source", r.source}, {"k", r.k}, {"orders", r.orders}});
  }
  json ru = json::array();
  for (const auto& r : rules) ru.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  json err = nullptr;
  if (!complete) err = {{"kind", error_kind}, {"message", error_message}};
  return {{"schema", "scatterdensity.report/1"},
          {"command", command},
          {"complete", complete},
          {"all_pass", all_pass()},
          {"error", err},
          {"config", config},
          {"functionals", rs},
          {"rates", rt},
          {"rules", ru},
          {"warnings", warnings},
          {"extra", extra}};
}

std::string moment_name(int ell) { return "moment:" + std::to_string(ell); }

std::string psi_name(const BumpSpec& psi) {
  std::string s = "psi:c=" + short_num(psi.center) + ",w=" + short_num(psi.half_width);
  if (psi.height != 1.0) s += ",h=" + short_num(psi.height);
  return s;
}

std::string interval_name(const Interval& iv) {
  return "interval:[" + short_num(iv.lo) + "," + short_num(iv.hi) + "]";
}

RuleResult decreasing_rule(const std::string& name, const std::vector<FunctionalRow>& rows) {
  RuleResult r{name, true, "gaps"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double noise = rows[i].value_error + rows[i].target_error + 1e-12 * std::max(1.0, std::abs(rows[i].target));
    r.detail += " " + sci(rows[i].abs_gap);
    if (i > 0 && !(rows[i].abs_gap < rows[i - 1].abs_gap) && rows[i].abs_gap > noise) r.pass = false;
  }
  return r;
}

ConvergenceReport run_sweep(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.command = "converge";
  rep.config = cfg.to_json();
  const int d = cfg.dim();
  const PotentialSpec& p = cfg.potential;
  const bool use_oracle = cfg.oracle.enabled && p.is_radial();
  if (cfg.oracle.enabled && !p.is_radial()) rep.warnings.push_back("oracle skipped: potential is not centered and radial");

  Targets targets;
  try {
    targets = compute_targets(cfg);
  } catch (...) {
    record_error(rep, std::current_exception());
    return rep;
  }
  rep.extra["targets"] = targets_json(cfg, targets);

  struct PerK {
    PhaseSpectrum born;
    double hermitian_defect = 0.0;
    bool under_resolved = false;
    std::size_t matrix_size = 0;
    PhaseSpectrum oracle;
    double oracle_phase_error = 0.0;
    int m_max = 0;
  };
  const std::size_t n = cfg.k_ladder.size();
  std::vector<PerK> res(n);
  std::vector<std::exception_ptr> errs(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    try {
      const double k = cfg.k_ladder[i];
      const KernelMatrix m = born_matrix(p, k, make_grid(d, cfg.grid.resolution(d, k)));
      res[i].hermitian_defect = m.hermitian_defect();
      res[i].under_resolved = m.under_resolved;
      res[i].matrix_size = static_cast<std::size_t>(m.size());
      res[i].born = eigenphases(m);
      if (use_oracle) {
        const int mmax = channels_for(cfg, k);
        const PhaseShiftTable t = phase_shifts(p, k, mmax, cfg.oracle.tol);
        res[i].oracle = full_s_spectrum(t);
        res[i].oracle_phase_error = 2.0 * k * max_est_error(t);
        res[i].m_max = mmax;
      }
    } catch (...) {
      errs[i] = std::current_exception();
    }
  });

  std::size_t done = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (errs[i]) {
      record_error(rep, errs[i]);
      done = i;
      break;
    }
  }

  json per_k = json::array();
  json cross = json::array();
  double worst_defect = 0.0;
  for (std::size_t i = 0; i < done; ++i) {
    const double k = cfg.k_ladder[i];
    const PerK& r = res[i];
    worst_defect = std::max(worst_defect, r.hermitian_defect);
    if (r.under_resolved) rep.warnings.push_back("grid under-resolved at k = " + short_num(k));
    spectrum_rows(cfg, targets, r.born, "born_matrix", 0.0, rep.rows);
    rep.spectra.push_back({k, r.born});
    json entry = {{"k", k}, {"matrix_size", r.matrix_size}, {"hermitian_defect", r.hermitian_defect},
                  {"born_floor_mass", r.born.floor_mass}};
    if (use_oracle) {
      spectrum_rows(cfg, targets, r.oracle, "radial_oracle", r.oracle_phase_error, rep.rows);
      rep.spectra.push_back({k, r.oracle});
      entry["oracle_m_max"] = r.m_max;
      entry["oracle_phase_error"] = r.oracle_phase_error;
      entry["oracle_max_abs_scaled_phase"] =
          r.oracle.distinct() ? std::abs(r.oracle.scaled_phases.front()) : 0.0;
      for (int ell : cfg.moments) {
        const double gap = std::abs(phase_moment(r.oracle, ell) - phase_moment(r.born, ell));
        cross.push_back({{"functional", moment_name(ell)}, {"k", k}, {"gap", gap}, {"k_times_gap", k * gap}});
      }
    }
    per_k.push_back(entry);
  }
  rep.extra["per_k"] = per_k;
  if (use_oracle) rep.extra["born_oracle"] = cross;

  if (!rep.complete) return rep;

  rep.rules.push_back({"hermitian[born_matrix]", worst_defect <= 1e-12, "max defect " + sci(worst_defect)});
  std::vector<std::string> sources{"born_matrix"};
  if (use_oracle) sources.push_back("radial_oracle");
  for (int ell : cfg.moments) {
    if (ell == 1) {
      const auto rows = select(rep.rows, moment_name(1), "born_matrix");
      double worst = 0.0;
      for (const auto& r : rows) worst = std::max(worst, r.abs_gap);
      rep.rules.push_back({"moment:1 exact[born_matrix]", worst <= 1e-10, "max gap " + sci(worst)});
      if (use_oracle && n >= 2) {
        rep.rules.push_back(decreasing_rule("moment:1 decreasing[radial_oracle]",
                                            select(rep.rows, moment_name(1), "radial_oracle")));
      }
      continue;
    }
    if (n < 2) continue;
    for (const auto& s : sources) {
      rep.rules.push_back(decreasing_rule(moment_name(ell) + " decreasing[" + s + "]",
                                          select(rep.rows, moment_name(ell), s)));
    }
  }
  if (n >= 2) {
    for (const auto& b : cfg.bumps) {
      for (const auto& s : sources) {
        rep.rules.push_back(decreasing_rule(psi_name(b) + " decreasing[" + s + "]", select(rep.rows, psi_name(b), s)));
      }
    }
  }
  rep.rates = compute_rates(rep.rows);
  add_gap_plots(rep);
  add_profile_plot(rep, p);
  return rep;
}

Amplitude catalog_amplitude(const std::string& name, int dim) {
  const double R = 1.5;
  auto g = [R](double r) {
    const double x = r / R;
    return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
  };
  if (name == "zero") return radial_amplitude("zero", [](double) { return 0.0; }, 1.0);
  if (name == "bump") return radial_amplitude("bump", g, R);
  if (name == "modulated") {
    Amplitude a;
    a.name = "modulated";
    a.support_radius = R;
    a.symmetric = true;
    a.b = [g](const Vec3& w, const Vec3& wp, const std::array<double, 2>& eta) {
      const double c = chi0(w, wp);
      if (c == 0.0) return 0.0;
      const Vec3 kap = kappa(w, wp);
      return c * (1.0 + 0.3 * kap.x()) * g(std::hypot(eta[0], eta[1]));
    };
    return a;
  }
  if (name == "born_gaussian") return born_amplitude(PotentialSpec::gaussian(dim, 1.0, 1.0));
  throw Error(ErrorKind::config_error, "unknown amplitude '" + name + "' (zero, bump, modulated, born_gaussian)");
}

double diagonal_symbol_integral(const std::string& name, int dim, int ell) {
  if (name == "zero") return 0.0;
  if (name == "born_gaussian") {
    return std::pow(2.0 * pi, dim - 1) * mu_moment(PotentialSpec::gaussian(dim, 1.0, 1.0), ell).value;
  }
  if (name != "bump" && name != "modulated") catalog_amplitude(name, dim);
  const double R = 1.5;
  auto g = [R](double r) {
    const double x = r / R;
    return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
  };
  // \int_Lambda g(|eta|)^ell deta.
  const double radial =
      dim == 2 ? 2.0 * integrate_adaptive([&](double r) { return std::pow(g(r), ell); }, 0.0, R, 1e-15).value
               : 2.0 * pi * integrate_adaptive([&](double r) { return std::pow(g(r), ell) * r; }, 0.0, R, 1e-15).value;
  double angular = sphere_area(dim);
  if (name == "modulated") {
    // \int_S (1 + a x)^ell = |S| sum_j C(ell, j) a^j E[x^j]; odd moments vanish.
    const double a = 0.3;
    double mean = 0.0;
    for (int j = 0; j <= ell; j += 2) {
      const double binom = std::tgamma(ell + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(ell - j + 1.0));
      const double ex = dim == 2 ? std::tgamma(j + 1.0) / (std::pow(2.0, j) * std::pow(std::tgamma(j / 2 + 1.0), 2))
                                 : 1.0 / (j + 1.0);
      mean += binom * std::pow(a, j) * ex;
    }
    angular *= mean;
  }
  return angular * radial;
}

ConvergenceReport psido_check(const std::string& amplitude, int dim, const std::vector<double>& k_ladder,
                              const GridRule& grid, int threads) {
  ConvergenceReport rep;
  rep.command = "psido-check";
  rep.config = {{"amplitude", amplitude},
                {"dim", dim},
                {"k_ladder", k_ladder},
                {"grid", {{"points_per_k", grid.points_per_k}, {"polar_per_k", grid.polar_per_k}, {"fixed_n", grid.fixed_n}}},
                {"threads", threads}};
  std::vector<double> targets(3);
  Amplitude amp;
  try {
    if (dim != 2 && dim != 3) throw Error(ErrorKind::config_error, "dim must be 2 or 3");
    for (std::size_t i = 1; i < k_ladder.size(); ++i) {
      if (!(k_ladder[i] > k_ladder[i - 1])) throw Error(ErrorKind::config_error, "k_ladder must be strictly increasing");
    }
    amp = catalog_amplitude(amplitude, dim);
    for (int ell = 1; ell <= 3; ++ell) targets[ell - 1] = diagonal_symbol_integral(amplitude, dim, ell);
  } catch (...) {
    record_error(rep, std::current_exception());
    return rep;
  }

  const std::size_t n = k_ladder.size();
  std::vector<std::array<double, 3>> values(n);
  std::vector<double> defects(n, 0.0);
  std::vector<std::exception_ptr> errs(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      const double k = k_ladder[i];
      const KernelMatrix m = opk_assemble(amp, k, make_grid(dim, grid.resolution(dim, k)));
      const double scale = m.entries.cwiseAbs().maxCoeff();
      defects[i] = scale > 0.0 ? m.hermitian_defect() / scale : 0.0;
      for (int ell = 1; ell <= 3; ++ell) values[i][ell - 1] = scaled_trace_power(m, ell);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  });
  std::size_t done = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (errs[i]) {
      record_error(rep, errs[i]);
      done = i;
      break;
    }
  }
  for (std::size_t i = 0; i < done; ++i) {
    for (int ell = 1; ell <= 3; ++ell) {
      rep.rows.push_back(make_row("trace:" + std::to_string(ell), "psido", k_ladder[i], values[i][ell - 1], 0.0,
                                  {targets[ell - 1], 1e-13 * std::max(1.0, std::abs(targets[ell - 1]))}));
    }
  }
  if (!rep.complete) return rep;

  double worst_defect = 0.0, worst1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst_defect = std::max(worst_defect, defects[i]);
  for (const auto& r : select(rep.rows, "trace:1", "psido")) worst1 = std::max(worst1, r.abs_gap);
  rep.rules.push_back({"hermitian[psido]", worst_defect <= 1e-12, "max relative defect " + sci(worst_defect)});
  rep.rules.push_back({"trace:1 exact[psido]", worst1 <= 1e-9 * std::max(1.0, std::abs(targets[0])),
                       "max gap " + sci(worst1)});
  if (n >= 2) {
    for (int ell = 2; ell <= 3; ++ell) {
      const std::string f = "trace:" + std::to_string(ell);
      rep.rules.push_back(decreasing_rule(f + " decreasing[psido]", select(rep.rows, f, "psido")));
    }
  }
  rep.rates = compute_rates(rep.rows);
  add_gap_plots(rep);
  return rep;
}

ConvergenceReport run_mu(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.command = "mu";
  rep.config = cfg.to_json();
  Targets t;
  try {
    t = compute_targets(cfg);
  } catch (...) {
    record_error(rep, std::current_exception());
    return rep;
  }
  rep.extra["targets"] = targets_json(cfg, t);
  double worst = 0.0;
  for (const json& e : rep.extra["targets"]) {
    const double v = e["value"].get<double>(), err = e["error"].get<double>();
    rep.rows.push_back(make_row(e["functional"].get<std::string>(), "limit_measure", 0.0, v, err, {v, err}));
    worst = std::max(worst, err / std::max(1.0, std::abs(v)));
  }
  rep.rules.push_back({"target accuracy", worst <= 1e-6, "max relative error estimate " + sci(worst)});
  add_profile_plot(rep, cfg.potential);
  return rep;
}

ConvergenceReport run_oracle(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.command = "oracle";
  rep.config = cfg.to_json();
  const PotentialSpec& p = cfg.potential;
  const double k = cfg.k_ladder.front();
  try {
    if (!p.is_radial()) throw Error(ErrorKind::not_radial, "the oracle needs a centered radial potential");
    const Targets targets = compute_targets(cfg);
    rep.extra["targets"] = targets_json(cfg, targets);
    const int mmax = channels_for(cfg, k);
    const PhaseShiftTable t = phase_shifts(p, k, mmax, cfg.oracle.tol);
    json channels = json::array();
    std::vector<std::pair<double, double>> eikonal, shifts;
    double worst = 0.0;
    for (const auto& ch : t.channels) {
      const double born = born_phase_shift(p, k, ch.index);
      channels.push_back({{"channel", ch.index}, {"delta", ch.delta}, {"est_error", ch.est_error}, {"born", born}});
      worst = std::max(worst, ch.est_error);
      shifts.emplace_back(ch.index, ch.delta);
      eikonal.emplace_back((ch.index + (p.dim() == 2 ? 0.0 : 0.5)) / k, 2.0 * k * ch.delta);
    }
    rep.extra["channels"] = channels;
    rep.extra["match_radius"] = t.match_radius;
    rep.extra["m_max"] = mmax;
    rep.rules.push_back({"channel est_error <= tol", worst <= cfg.oracle.tol, "max est_error " + sci(worst)});
    const PhaseSpectrum ps = full_s_spectrum(t);
    rep.rules.push_back({"channel truncation", true,
                         "|delta_mmax| = " + sci(t.channels.empty() ? 0.0 : std::abs(t.channels.back().delta))});
    rep.spectra.push_back({k, ps});
    spectrum_rows(cfg, targets, ps, "radial_oracle", 2.0 * k * worst, rep.rows);
    rep.plots.emplace_back("phase_shifts", shifts);
    rep.plots.emplace_back("eikonal", eikonal);
    add_profile_plot(rep, p);
  } catch (...) {
    record_error(rep, std::current_exception());
  }
  return rep;
}

ConvergenceReport run_xray(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.command = "xray";
  rep.config = cfg.to_json();
  const PotentialSpec& p = cfg.potential;
  const int d = cfg.dim();
  try {
    const double native = p.decay_exponent();
    const double rho = cfg.xray.rho > 0.0 ? cfg.xray.rho : (std::isfinite(native) ? native : 4.0);
    const XrayBound bound = certified_bound(p, rho);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    json samples = json::array();
    double worst_diff = 0.0, worst_ratio = 0.0;
    for (int s = 0; s < cfg.xray.samples; ++s) {
      Vec3 w(normal(rng), normal(rng), d == 3 ? normal(rng) : 0.0);
      w.normalize();
      const Frame f = frame(w, d);
      const double r = std::pow(10.0, -2.0 + 3.0 * unit(rng));
      const double phi = 2.0 * pi * unit(rng);
      const std::array<double, 2> c =
          d == 2 ? std::array<double, 2>{unit(rng) < 0.5 ? -r : r, 0.0}
                 : std::array<double, 2>{r * std::cos(phi), r * std::sin(phi)};
      const Vec3 eta = f.point(c);
      const double closed = xray(p, w, eta);
      const double quad = xray_quadrature(p, w, eta);
      const double env = bound.at(eta.norm());
      worst_diff = std::max(worst_diff, std::abs(closed - quad));
      if (env > 0.0) worst_ratio = std::max(worst_ratio, std::abs(closed) / env);
      else if (closed != 0.0) worst_ratio = inf;
      samples.push_back({{"omega", {w.x(), w.y(), w.z()}},
                         {"eta", {eta.x(), eta.y(), eta.z()}},
                         {"closed_form", closed},
                         {"quadrature", quad},
                         {"envelope", env}});
    }
    const DecayReport dr = decay_check(p, rho, cfg.xray.samples, cfg.seed);
    rep.extra["samples"] = samples;
    rep.extra["bound"] = {{"rho", bound.rho}, {"constant", bound.constant}};
    rep.extra["decay"] = {{"max_ratio", dr.max_ratio}, {"max_ratio_doubled", dr.max_ratio_doubled}, {"stable", dr.stable}};
    rep.rules.push_back({"closed form vs quadrature", worst_diff <= 1e-8, "max difference " + sci(worst_diff)});
    rep.rules.push_back({"certified envelope", worst_ratio <= 1.0 + 1e-9, "max |X|/envelope " + sci(worst_ratio)});
    rep.rules.push_back({"decay bound stable", dr.stable,
                         "ratio " + sci(dr.max_ratio) + " -> " + sci(dr.max_ratio_doubled)});
    add_profile_plot(rep, p);
  } catch (...) {
    record_error(rep, std::current_exception());
  }
  return rep;
}

void write_outputs(const ConvergenceReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "plots");
  auto open = [](const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::config_error, "cannot write " + path.string());
    return os;
  };
  {
    auto os = open(root / "config.json");
    os << report.config.dump(2) << "\n";
  }
  {
    auto os = open(root / "spectra.csv");
    os << "k,scaled_phase,multiplicity,source\n";
    for (const auto& s : report.spectra) {
      for (std::size_t i = 0; i < s.spectrum.distinct(); ++i) {
        os << full_num(s.k) << ',' << full_num(s.spectrum.scaled_phases[i]) << ',' << s.spectrum.multiplicities[i]
           << ',' << to_string(s.spectrum.source) << '\n';
      }
    }
  }
  {
    auto os = open(root / "functionals.csv");
    os << "functional,source,k,value,value_error,target,target_error,abs_gap,rel_gap\n";
    for (const auto& r : report.rows) {
      os << '"' << r.functional << "\"," << r.source << ',' << full_num(r.k) << ',' << full_num(r.value) << ','
         << full_num(r.value_error) << ',' << full_num(r.target) << ',' << full_num(r.target_error) << ','
         << full_num(r.abs_gap) << ',' << full_num(r.rel_gap) << '\n';
    }
  }
  if (report.extra.contains("channels")) {
    auto os = open(root / "channels.csv");
    os << "channel,delta,est_error\n";
    for (const json& c : report.extra["channels"]) {
      os << c["channel"].get<int>() << ',' << full_num(c["delta"].get<double>()) << ','
         << full_num(c["est_error"].get<double>()) << '\n';
    }
  }
  if (report.extra.contains("samples")) {
    auto os = open(root / "xray.csv");
    os << "omega_x,omega_y,omega_z,eta_x,eta_y,eta_z,X,X_quadrature\n";
    for (const json& s : report.extra["samples"]) {
      for (const json& v : s["omega"]) os << full_num(v.get<double>()) << ',';
      for (const json& v : s["eta"]) os << full_num(v.get<double>()) << ',';
      os << full_num(s["closed_form"].get<double>()) << ',' << full_num(s["quadrature"].get<double>()) << '\n';
    }
  }
  for (const auto& [name, series] : report.plots) {
    auto os = open(root / "plots" / (name + ".dat"));
    for (const auto& [x, y] : series) os << full_num(x) << ' ' << full_num(y) << '\n';
  }
  {
    auto os = open(root / "report.json");
    os << report.to_json().dump(2) << "\n";
  }
}

}  // namespace scatterdensity
