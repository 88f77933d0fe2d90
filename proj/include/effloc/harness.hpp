#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "effloc/bounds.hpp"
#include "effloc/bridge.hpp"
#include "effloc/discretize.hpp"
#include "effloc/functionals.hpp"
#include "effloc/geometry.hpp"
#include "effloc/radial.hpp"
#include "json.hpp"

namespace effloc {

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

enum class Family { quadrilateral, rhombus, superellipse, sector, annulus };

inline Family family_from_string(const std::string& s) {
  if (s == "quadrilateral") return Family::quadrilateral;
  if (s == "rhombus") return Family::rhombus;
  if (s == "superellipse") return Family::superellipse;
  if (s == "sector") return Family::sector;
  if (s == "annulus") return Family::annulus;
  throw PreconditionError("unknown family '" + s + "'");
}

inline std::string family_name(Family f) {
  switch (f) {
    case Family::quadrilateral: return "quadrilateral";
    case Family::rhombus: return "rhombus";
    case Family::superellipse: return "superellipse";
    case Family::sector: return "sector";
    case Family::annulus: return "annulus";
  }
  return "?";
}

struct RunConfig {
  Family family = Family::rhombus;
  std::vector<double> params;      // n, or eps for the annulus
  std::optional<double> h;         // fixed spacing; otherwise nodes_per_width
  int nodes_per_width = 64;
  double tol = 1e-10;
  double eps_exponent = -2.0 / 3.0;  // eps = n^eps_exponent for the horn bound
  std::optional<double> eps;         // fixed eps overrides the exponent
  double a = 0.5;                    // quadrilateral vertex (0, a)
  double b_fraction = 0.5;           // quadrilateral vertex (b, 0) with b = b_fraction n
  double alpha = 2.0;                // superellipse exponent
  int m = 2;
  double c = 1.0;                    // lambda = j^2 + c n^{-2 alpha/(alpha+2)} when m >= 3
  std::vector<double> radii{1.0, 2.0};  // sector radii for the scaling check
  double R = 1.0;                    // annulus inner radius
  int radial_cells = 2048;
  std::string csv_path;
  std::string json_path;
  std::uint64_t seed = 1;
};

inline void validate(const RunConfig& c) {
  if (c.params.empty()) throw PreconditionError("sweep needs at least one parameter");
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    if (!(c.params[i] > 0.0)) throw PreconditionError("sweep parameters must be positive");
    if (i > 0 && !(c.params[i] > c.params[i - 1]))
      throw PreconditionError("sweep parameters must be strictly increasing");
  }
  if (c.h && !(*c.h > 0.0)) throw PreconditionError("h must be positive");
  if (c.nodes_per_width < 4) throw PreconditionError("nodes_per_width must be at least 4");
  if (!(c.tol > 0.0 && c.tol <= 1e-6)) throw PreconditionError("tol must lie in (0, 1e-6]");
  if (c.eps && !(*c.eps > 0.0)) throw PreconditionError("eps must be positive");
  if (c.m < 2) throw PreconditionError("m must be at least 2");
  if (c.family != Family::superellipse && c.family != Family::annulus && c.m != 2)
    throw PreconditionError("polygon and sector families are planar");
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.family = family_from_string(j.at("family").get<std::string>());
    c.params = j.at("params").get<std::vector<double>>();
    if (j.contains("h")) c.h = j["h"].get<double>();
    c.nodes_per_width = j.value("nodes_per_width", c.nodes_per_width);
    c.tol = j.value("tol", c.tol);
    c.eps_exponent = j.value("eps_exponent", c.eps_exponent);
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    c.a = j.value("a", c.a);
    c.b_fraction = j.value("b_fraction", c.b_fraction);
    c.alpha = j.value("alpha", c.alpha);
    c.m = j.value("m", c.m);
    c.c = j.value("c", c.c);
    if (j.contains("radii")) c.radii = j["radii"].get<std::vector<double>>();
    c.R = j.value("R", c.R);
    c.radial_cells = j.value("radial_cells", c.radial_cells);
    if (j.contains("output")) {
      c.csv_path = j["output"].value("csv", "");
      c.json_path = j["output"].value("json", "");
    }
    c.seed = j.value("seed", c.seed);
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed run configuration: ") + e.what());
  }
}

//---------------------------------------------------------------------------//
// Results
//---------------------------------------------------------------------------//

struct SweepMember {
  double param = 0.0;
  EfficiencyReport report;
  double lambda = 0.0;         // on the working grid (or radial, extrapolated)
  double lambda_extrapolated = 0.0;
  double horn_bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<BoundCheck> checks;
  std::string error;

  int checks_passed() const {
    return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const BoundCheck& c) {
      return c.verdict == Verdict::satisfied;
    }));
  }
  bool all_satisfied() const {
    return error.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.satisfied(); });
  }
  double margin_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : checks)
      if (c.applicable()) m = std::min(m, c.margin());
    return m;
  }
};

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log residuals
};

struct SweepResult {
  std::string family;
  std::vector<SweepMember> members;  // ascending parameter
  std::optional<DecayFit> localisation_fit;  // log a against log param
  std::optional<DecayFit> lambda_gap_fit;    // log(lambda - mu(Omega')) against log param
  bool partial = false;

  bool all_satisfied() const {
    return !partial && std::all_of(members.begin(), members.end(),
                                   [](const SweepMember& m) { return m.all_satisfied(); });
  }
};

// Least squares of log(value) on log(param).
inline DecayFit fit_decay(const std::vector<double>& params, const std::vector<double>& values) {
  if (params.size() != values.size()) throw PreconditionError("fit_decay: size mismatch");
  if (params.size() < 3) throw PreconditionError("fit_decay needs at least 3 points");
  const std::size_t n = params.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(params[i] > 0.0) || !(values[i] > 0.0))
      throw PreconditionError("fit_decay requires positive parameters and values");
    x[i] = std::log(params[i]);
    y[i] = std::log(values[i]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw PreconditionError("fit_decay needs distinct parameters");
  DecayFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

//---------------------------------------------------------------------------//
// Per-member pipelines
//---------------------------------------------------------------------------//

// Spacing with `nodes` grid steps across the width (twice the inradius if no width).
inline double spacing_for(const Domain& d, int nodes) {
  const GeoSummary g = geometric_summary(d);
  const double w = g.width.value_or(2.0 * g.inradius);
  return w / nodes;
}

struct GridSolve {
  Grid grid;
  EigenPair pair;
  double lambda_coarse = 0.0;  // on 2h
  Extrapolated lambda_ex;
  GeoSummary summary;
  EfficiencyReport report;
};

// First eigenpair on h, eigenvalue on 2h, and the efficiency report on h.
inline GridSolve solve_on_grid(const Domain& d, double h, double tol) {
  GridSolve s;
  s.summary = geometric_summary(d);
  auto [g, op] = rasterize_and_assemble(d, h);
  s.pair = first_eigenpair(op, tol);
  s.grid = std::move(g);
  {
    auto [g2, op2] = rasterize_and_assemble(d, 2.0 * h);
    s.lambda_coarse = first_eigenpair(op2, tol).lambda;
  }
  s.lambda_ex = richardson_pair(s.lambda_coarse, s.pair.lambda);
  s.report = norms_and_efficiency(s.pair, s.grid, s.summary.measure);
  return s;
}

// Localisation diagnostics tied to the horn bound: the bound itself, the split at eps
// and the critical level set.
inline void add_horn_checks(SweepMember& m, const GridSolve& s, const HornProfile& profile, double eps,
                            const std::string& digest) {
  const double lam = conservative_lambda(s.lambda_coarse, s.pair.lambda, s.lambda_ex.value);
  const double cap = s.summary.measure * std::pow(profile.mu_union(), 0.5 * profile.dim());
  const double e = std::min(eps, cap);
  m.horn_bound = horn_bound(profile, s.summary.measure, lam, e, profile.dim());
  m.checks.push_back(
      make_check("horn_bound", m.report.localisation, m.horn_bound, Relation::less_equal, digest));
  const auto split = localisation_split(s.pair, s.grid, s.summary.measure, e);
  m.checks.push_back(make_check("localisation_split", split.lhs, split.rhs, Relation::less_equal, digest));
  const double ad = discrete_localisation(s.pair, s.grid);
  const auto level = critical_level_set(s.pair, s.grid);
  m.checks.push_back(
      make_check("level_set_fraction", level.fraction, std::pow(ad, 0.25), Relation::less_equal, digest));
  m.checks.push_back(
      make_check("level_set_mass", level.mass, 1.0 - std::sqrt(ad), Relation::greater_equal, digest));
}

inline SweepMember grid_member(const RunConfig& cfg, double n, const Domain& d, bool convex,
                               const std::optional<HornProfile>& profile) {
  SweepMember m;
  m.param = n;
  const double h = cfg.h ? *cfg.h : spacing_for(d, cfg.nodes_per_width);
  const GridSolve s = solve_on_grid(d, h, cfg.tol);
  const std::string digest = digest_of(d);
  m.report = s.report;
  m.lambda = s.pair.lambda;
  m.lambda_extrapolated = s.lambda_ex.value;
  m.checks = check_basic(s.report, convex, digest);
  const double rel = s.lambda_ex.error_estimate / s.lambda_ex.value;
  for (auto& c : check_geometric(s.report, s.summary, 2, s.lambda_ex.value, convex, digest, 2.0 * rel))
    m.checks.push_back(std::move(c));
  if (profile) add_horn_checks(m, s, *profile, cfg.eps ? *cfg.eps : std::pow(n, cfg.eps_exponent), digest);
  if (cfg.family == Family::sector && cfg.radii.size() >= 2) {
    // Scaling invariance: same sector at another radius with proportional spacing.
    const auto& sec = std::get<Sector>(d);
    const double ratio = cfg.radii[1] / cfg.radii[0];
    const GridSolve s2 = solve_on_grid(Sector{sec.radius * ratio, sec.divisor}, h * ratio, cfg.tol);
    m.checks.push_back(make_check("scaling_invariance", std::fabs(s2.report.efficiency - s.report.efficiency),
                                  1e-10 * s.report.efficiency, Relation::less_equal, digest, 0.0));
  }
  return m;
}

inline SweepMember superellipse_bound_member(const RunConfig& cfg, double n) {
  SweepMember m;
  m.param = n;
  const SuperellipseHorn s{n, cfg.alpha, cfg.m};
  const HornProfile profile = HornProfile::superellipse(s);
  const double j = bessel_zero(section_order(cfg.m));
  m.lambda = j * j + cfg.c * std::pow(n, -2.0 * cfg.alpha / (cfg.alpha + 2.0));
  m.lambda_extrapolated = m.lambda;
  const double measure = superellipse_measure(s);
  const double cap = measure * std::pow(profile.mu_union(), 0.5 * cfg.m);
  const double eps = std::min(cfg.eps ? *cfg.eps : std::pow(n, cfg.eps_exponent), cap);
  m.horn_bound = horn_bound(profile, measure, m.lambda, eps, cfg.m);
  m.report.measure = measure;
  m.report.efficiency = m.report.localisation = std::numeric_limits<double>::quiet_NaN();
  m.report.l1 = m.report.l2 = m.report.linf = std::numeric_limits<double>::quiet_NaN();
  return m;
}

inline SweepMember annulus_member(const RunConfig& cfg, double eps) {
  SweepMember m;
  m.param = eps;
  const AnnulusReport a = annulus_report(cfg.m, cfg.R, eps, cfg.radial_cells);
  const std::string digest = digest_of(Domain{Annulus{cfg.R, eps, cfg.m}});
  m.report = a.report;
  m.lambda = a.eigen.lambda;
  m.lambda_extrapolated = a.eigen.lambda;
  m.checks = check_basic(a.report, false, digest);
  m.checks.push_back(make_check("annulus_lambda_lower", a.lambda_lo, a.eigen.lambda, Relation::less_equal, digest));
  m.checks.push_back(make_check("annulus_lambda_upper", a.eigen.lambda, a.lambda_hi, Relation::less_equal, digest));
  m.checks.push_back(
      make_check("annulus_efficiency_lower", a.efficiency_lo, a.efficiency_grid, Relation::less_equal, digest));
  m.checks.push_back(
      make_check("annulus_efficiency_upper", a.efficiency_grid, a.efficiency_hi, Relation::less_equal, digest));
  return m;
}

inline SweepMember run_member(const RunConfig& cfg, double n) {
  switch (cfg.family) {
    case Family::quadrilateral:
    case Family::rhombus: {
      const ConvexPolygon p = cfg.family == Family::rhombus
                                  ? rhombus(n)
                                  : elongated_quadrilateral(n, cfg.a, cfg.b_fraction * n);
      return grid_member(cfg, n, p, true, HornProfile::from_polygon(p));
    }
    case Family::superellipse: {
      if (cfg.m >= 3) return superellipse_bound_member(cfg, n);
      const SuperellipseHorn s{n, cfg.alpha, 2};
      return grid_member(cfg, n, s, true, HornProfile::superellipse(s));
    }
    case Family::sector: {
      const int k = static_cast<int>(std::lround(n));
      if (std::fabs(n - k) > 1e-12) throw PreconditionError("sector divisor must be an integer");
      return grid_member(cfg, n, Sector{cfg.radii.front(), k}, true, std::nullopt);
    }
    case Family::annulus:
      return annulus_member(cfg, n);
  }
  throw PreconditionError("unknown family");
}

// Members run concurrently (EFFLOC_THREADS workers); results stay in parameter order.
// A failing member stops the sweep: later members are dropped and the result is partial.
inline SweepResult run_sweep(const RunConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.params.size();
  std::vector<std::optional<SweepMember>> slots(n);
  std::vector<std::string> errors(n);
  std::size_t next = 0;
  std::mutex lock;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next >= n) return;
        i = next++;
      }
      try {
        slots[i] = run_member(cfg, cfg.params[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int workers = static_cast<int>(std::min<std::size_t>(detail::worker_count(), n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  SweepResult r;
  r.family = family_name(cfg.family);
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      SweepMember failed;
      failed.param = cfg.params[i];
      failed.error = errors[i];
      r.members.push_back(std::move(failed));
      r.partial = true;
      break;
    }
    r.members.push_back(std::move(*slots[i]));
  }
  std::vector<double> ps, as, gaps;
  for (const auto& m : r.members) {
    if (!m.error.empty() || !(m.report.localisation > 0.0)) continue;
    ps.push_back(m.param);
    as.push_back(m.report.localisation);
  }
  if (ps.size() >= 3) r.localisation_fit = fit_decay(ps, as);
  if (cfg.family == Family::rhombus || cfg.family == Family::quadrilateral) {
    std::vector<double> qs;
    for (const auto& m : r.members)
      if (m.error.empty() && m.lambda_extrapolated > std::numbers::pi * std::numbers::pi) {
        qs.push_back(m.param);
        gaps.push_back(m.lambda_extrapolated - std::numbers::pi * std::numbers::pi);
      }
    if (qs.size() >= 3) r.lambda_gap_fit = fit_decay(qs, gaps);
  }
  return r;
}

//---------------------------------------------------------------------------//
// Reports
//---------------------------------------------------------------------------//

namespace detail {

inline nlohmann::json number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline double number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline nlohmann::json fit_json(const std::optional<DecayFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"residual", f->residual}};
}

inline std::optional<DecayFit> fit_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return DecayFit{j.at("slope").get<double>(), j.at("intercept").get<double>(),
                  j.at("residual").get<double>()};
}

inline nlohmann::json report_json(const EfficiencyReport& r) {
  nlohmann::json j = to_json(r);
  for (auto& v : j) v = v.is_null() ? v : number(v.get<double>());
  return j;
}

inline EfficiencyReport report_from(const nlohmann::json& j) {
  EfficiencyReport r;
  r.l1 = number(j.at("l1"));
  r.l2 = number(j.at("l2"));
  r.linf = number(j.at("linf"));
  r.measure = number(j.at("measure"));
  r.discrete_measure = number(j.at("discrete_measure"));
  r.efficiency = number(j.at("E"));
  r.localisation = number(j.at("a"));
  r.h = number(j.at("h"));
  return r;
}

}  // namespace detail

inline nlohmann::json to_json(const BoundCheck& c) {
  return {{"name", c.name},
          {"lhs", detail::number(c.lhs)},
          {"rhs", detail::number(c.rhs)},
          {"relation", c.relation == Relation::less_equal ? "<=" : ">="},
          {"slack", c.slack},
          {"verdict", verdict_name(c.verdict)},
          {"digest", c.digest}};
}

inline BoundCheck bound_check_from_json(const nlohmann::json& j) {
  BoundCheck c;
  c.name = j.at("name").get<std::string>();
  c.lhs = detail::number(j.at("lhs"));
  c.rhs = detail::number(j.at("rhs"));
  c.relation = j.at("relation").get<std::string>() == "<=" ? Relation::less_equal : Relation::greater_equal;
  c.slack = j.at("slack").get<double>();
  const std::string v = j.at("verdict").get<std::string>();
  c.verdict = v == "true" ? Verdict::satisfied : v == "false" ? Verdict::violated : Verdict::not_applicable;
  c.digest = j.at("digest").get<std::string>();
  return c;
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : r.members) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : m.checks) checks.push_back(to_json(c));
    members.push_back({{"param", m.param},
                       {"report", detail::report_json(m.report)},
                       {"lambda", detail::number(m.lambda)},
                       {"lambda_extrapolated", detail::number(m.lambda_extrapolated)},
                       {"horn_bound", detail::number(m.horn_bound)},
                       {"checks", checks},
                       {"error", m.error}});
  }
  return {{"family", r.family},
          {"partial", r.partial},
          {"localisation_fit", detail::fit_json(r.localisation_fit)},
          {"lambda_gap_fit", detail::fit_json(r.lambda_gap_fit)},
          {"members", members}};
}

inline SweepResult sweep_result_from_json(const nlohmann::json& j) {
  SweepResult r;
  r.family = j.at("family").get<std::string>();
  r.partial = j.at("partial").get<bool>();
  r.localisation_fit = detail::fit_from(j.at("localisation_fit"));
  r.lambda_gap_fit = detail::fit_from(j.at("lambda_gap_fit"));
  for (const auto& mj : j.at("members")) {
    SweepMember m;
    m.param = mj.at("param").get<double>();
    m.report = detail::report_from(mj.at("report"));
    m.lambda = detail::number(mj.at("lambda"));
    m.lambda_extrapolated = detail::number(mj.at("lambda_extrapolated"));
    m.horn_bound = detail::number(mj.at("horn_bound"));
    for (const auto& cj : mj.at("checks")) m.checks.push_back(bound_check_from_json(cj));
    m.error = mj.at("error").get<std::string>();
    r.members.push_back(std::move(m));
  }
  return r;
}

enum class ReportFormat { csv, json };

inline void emit_report(const SweepResult& r, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::json) {
    out << to_json(r).dump(2) << '\n';
    return;
  }
  out.precision(17);
  out << "family,param,lambda,E,a,horn_bound,checks_passed,margin_min\n";
  for (const auto& m : r.members)
    out << r.family << ',' << m.param << ',' << m.lambda << ',' << m.report.efficiency << ','
        << m.report.localisation << ',' << m.horn_bound << ',' << m.checks_passed() << ','
        << m.margin_min() << '\n';
}

inline void emit_report(const SweepResult& r, const std::string& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  emit_report(r, out, format);
  out.flush();
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace effloc
