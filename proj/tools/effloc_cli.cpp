// Command-line front end. Exit codes: 0 success, 2 a bound check failed, 1 error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "effloc/effloc.hpp"

namespace {

using namespace effloc;
using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidDomain("'" + path + "' is not valid JSON: " + e.what());
  }
}

Domain read_domain(const std::string& path) { return domain_from_json(read_json(path)); }

double resolve_spacing(const Domain& d, double h, int nodes) { return h > 0.0 ? h : spacing_for(d, nodes); }

int solve_cmd(const std::string& path, double h, int nodes, double tol, const std::string& csv,
              const std::string& bin, const std::string& triplets) {
  const Domain d = read_domain(path);
  if (const auto* a = std::get_if<Annulus>(&d)) {
    const RadialEigen e = radial_first_eigen(a->dim, a->inner_radius, a->inner_radius + a->thickness);
    if (!csv.empty()) write_profile_csv(csv, e);
    std::cout << json{{"lambda", e.lambda}, {"residual", e.residual}, {"N", e.N}, {"method", "radial"}}.dump(2)
              << '\n';
    return 0;
  }
  const double hh = resolve_spacing(d, h, nodes);
  auto [grid, op] = rasterize_and_assemble(d, hh);
  const EigenPair p = first_eigenpair(op, tol);
  if (!csv.empty()) write_eigenvector_csv(csv, grid, p.u);
  if (!bin.empty()) write_eigenvector_binary(bin, grid, p.u);
  if (!triplets.empty()) write_operator_triplets(triplets, op);
  std::cout << json{{"lambda", p.lambda},         {"residual", p.residual}, {"iterations", p.iterations},
                    {"nodes", grid.size()},       {"h", hh},                {"min_entry", p.min_entry},
                    {"method", "finite_difference"}}
                   .dump(2)
            << '\n';
  return 0;
}

int efficiency_cmd(const std::string& path, double h, int nodes, double tol) {
  const Domain d = read_domain(path);
  if (const auto* a = std::get_if<Annulus>(&d)) {
    const EfficiencyReport r = radial_report(a->dim, a->inner_radius, a->inner_radius + a->thickness);
    std::cout << json{{"report", to_json(r)}, {"method", "radial"}}.dump(2) << '\n';
    return 0;
  }
  const double h0 = resolve_spacing(d, h, nodes);
  const GeoSummary g = geometric_summary(d);
  std::vector<double> E, L;
  EfficiencyReport finest;
  for (double hh : {h0, h0 / 2, h0 / 4}) {
    auto [grid, op] = rasterize_and_assemble(d, hh);
    const EigenPair p = first_eigenpair(op, tol);
    finest = norms_and_efficiency(p, grid, g.measure);
    E.push_back(finest.efficiency);
    L.push_back(p.lambda);
  }
  const Extrapolated e = richardson(E[0], E[1], E[2]);
  const Extrapolated l = richardson(L[0], L[1], L[2]);
  std::cout << json{{"report", to_json(finest)},
                    {"E_levels", E},
                    {"lambda_levels", L},
                    {"E_extrapolated", {{"value", e.value}, {"order", e.order}, {"error", e.error_estimate}}},
                    {"lambda_extrapolated", {{"value", l.value}, {"order", l.order}, {"error", l.error_estimate}}},
                    {"method", "finite_difference"}}
                   .dump(2)
            << '\n';
  return 0;
}

int check_bounds_cmd(const std::string& path, double h, int nodes, double tol, double eps) {
  const Domain d = read_domain(path);
  const std::string digest = digest_of(d);
  std::vector<BoundCheck> checks;
  if (const auto* a = std::get_if<Annulus>(&d)) {
    const EfficiencyReport r = radial_report(a->dim, a->inner_radius, a->inner_radius + a->thickness);
    checks = check_basic(r, false, digest);
  } else {
    const double hh = resolve_spacing(d, h, nodes);
    const GridSolve s = solve_on_grid(d, hh, tol);
    const bool convex = is_convex(d);
    checks = check_basic(s.report, convex, digest);
    const double rel = s.lambda_ex.error_estimate / s.lambda_ex.value;
    for (auto& c : check_geometric(s.report, s.summary, 2, s.lambda_ex.value, convex, digest, 2.0 * rel))
      checks.push_back(std::move(c));
    if (eps > 0.0) {
      std::optional<HornProfile> profile;
      if (const auto* p = std::get_if<ConvexPolygon>(&d)) profile = horn_isometry(*p).profile;
      if (const auto* sh = std::get_if<SuperellipseHorn>(&d)) profile = HornProfile::superellipse(*sh);
      if (profile) {
        SweepMember m;
        m.report = s.report;
        add_horn_checks(m, s, *profile, eps, digest);
        for (auto& c : m.checks) checks.push_back(std::move(c));
      } else {
        checks.push_back(not_applicable("horn_bound", digest));
      }
    }
  }
  write_checks_csv(std::cout, checks);
  for (const auto& c : checks)
    if (!c.satisfied()) return 2;
  return 0;
}

int sweep_cmd(const std::string& path, const std::string& csv, const std::string& out_json) {
  RunConfig cfg = run_config_from_json(read_json(path));
  if (!csv.empty()) cfg.csv_path = csv;
  if (!out_json.empty()) cfg.json_path = out_json;
  const SweepResult r = run_sweep(cfg);
  if (!cfg.csv_path.empty()) emit_report(r, cfg.csv_path, ReportFormat::csv);
  if (!cfg.json_path.empty()) emit_report(r, cfg.json_path, ReportFormat::json);
  emit_report(r, std::cout, ReportFormat::csv);
  if (r.localisation_fit)
    std::cerr << "localisation slope " << r.localisation_fit->slope << " (rms " << r.localisation_fit->residual
              << ")\n";
  for (const auto& m : r.members)
    if (!m.error.empty()) std::cerr << "member " << m.param << " failed: " << m.error << '\n';
  if (r.partial) return 1;
  return r.all_satisfied() ? 0 : 2;
}

int mc_heat_cmd(const std::string& path, const std::vector<double>& x, const BridgeConfig& cfg) {
  const Domain d = read_domain(path);
  if (x.size() != 2) throw PreconditionError("--x expects two coordinates");
  const MCEstimate e = mc_heat_diag(d, Point{x[0], x[1]}, cfg);
  std::cout << to_json(e).dump(2) << '\n';
  return 0;
}

int annulus_cmd(int m, double R, const std::vector<double>& eps, int N) {
  json out = json::array();
  for (double e : eps) {
    const AnnulusReport a = annulus_report(m, R, e, N);
    out.push_back({{"m", m},
                   {"R", R},
                   {"eps", e},
                   {"lambda", a.eigen.lambda},
                   {"eps2_lambda", e * e * a.eigen.lambda},
                   {"lambda_bounds", {a.lambda_lo, a.lambda_hi}},
                   {"E", a.report.efficiency},
                   {"E_bounds", {a.efficiency_lo, a.efficiency_hi}},
                   {"sine_deviation", a.sine_deviation},
                   {"report", to_json(a.report)}});
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenfunction efficiency and localisation toolkit"};
  app.require_subcommand(1);

  std::string domain, config, csv, bin, triplets, out_json;
  double h = 0.0, tol = 1e-10, eps = 0.0;
  int nodes = 64;

  // --h is the grid spacing, so help is only available as --help.
  app.set_help_flag("--help", "print help");
  auto grid_options = [&](CLI::App* s) {
    s->set_help_flag("--help", "print help");
    s->add_option("--h", h, "grid spacing (default: width / nodes)");
    s->add_option("--nodes", nodes, "grid steps across the width")->check(CLI::Range(4, 100000));
    s->add_option("--tol", tol, "relative eigen residual tolerance");
  };

  auto* solve = app.add_subcommand("solve", "first Dirichlet eigenpair");
  solve->add_option("domain", domain)->required()->check(CLI::ExistingFile);
  grid_options(solve);
  solve->add_option("--csv", csv, "write the eigenvector (or radial profile) as CSV");
  solve->add_option("--binary", bin, "write the eigenvector as binary records");
  solve->add_option("--triplets", triplets, "write the operator as (i, j, value) triplets");

  auto* eff = app.add_subcommand("efficiency", "efficiency report with extrapolation over h, h/2, h/4");
  eff->add_option("domain", domain)->required()->check(CLI::ExistingFile);
  grid_options(eff);

  auto* sweep = app.add_subcommand("sweep", "run a domain-family sweep");
  sweep->add_option("config", config)->required()->check(CLI::ExistingFile);
  sweep->add_option("--csv", csv, "CSV report path");
  sweep->add_option("--json", out_json, "JSON report path");

  auto* check = app.add_subcommand("check-bounds", "evaluate the inequality checks on one domain");
  check->add_option("domain", domain)->required()->check(CLI::ExistingFile);
  grid_options(check);
  check->add_option("--eps", eps, "also evaluate the horn bound at this eps");

  std::vector<double> x;
  BridgeConfig bcfg;
  bcfg.t = 0.1;
  auto* mc = app.add_subcommand("mc-heat", "Monte Carlo heat kernel diagonal");
  mc->add_option("domain", domain)->required()->check(CLI::ExistingFile);
  mc->add_option("--x", x, "point a,b")->required()->delimiter(',');
  mc->add_option("--t", bcfg.t, "time");
  mc->add_option("--n", bcfg.samples, "number of paths");
  mc->add_option("--steps", bcfg.steps, "bridge steps (power of two)");
  mc->add_option("--seed", bcfg.seed, "seed");

  int m = 2, N = 2048;
  double R = 1.0;
  std::vector<double> eps_list;
  auto* ann = app.add_subcommand("annulus", "thin-annulus radial study");
  ann->add_option("--m", m, "dimension")->check(CLI::Range(2, 5));
  ann->add_option("--R", R, "inner radius");
  ann->add_option("--eps", eps_list, "thickness list")->required()->delimiter(',');
  ann->add_option("--N", N, "radial cells");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (*solve) return solve_cmd(domain, h, nodes, tol, csv, bin, triplets);
    if (*eff) return efficiency_cmd(domain, h, nodes, tol);
    if (*sweep) return sweep_cmd(config, csv, out_json);
    if (*check) return check_bounds_cmd(domain, h, nodes, tol, eps);
    if (*mc) return mc_heat_cmd(domain, x, bcfg);
    if (*ann) return annulus_cmd(m, R, eps_list, N);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
