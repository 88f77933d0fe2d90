#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "effloc/bessel.hpp"
#include "effloc/discretize.hpp"
#include "effloc/functionals.hpp"
#include "effloc/geometry.hpp"

namespace effloc {

//---------------------------------------------------------------------------//
// BoundCheck
//---------------------------------------------------------------------------//

enum class Relation { less_equal, greater_equal };
enum class Verdict { satisfied, violated, not_applicable };

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  Relation relation = Relation::less_equal;
  double slack = 1e-9;  // relative to max(|lhs|, |rhs|)
  Verdict verdict = Verdict::not_applicable;
  std::string digest;

  // Positive when the inequality holds with room to spare.
  double margin() const { return relation == Relation::less_equal ? rhs - lhs : lhs - rhs; }
  bool satisfied() const { return verdict != Verdict::violated; }
  bool applicable() const { return verdict != Verdict::not_applicable; }
};

inline BoundCheck make_check(std::string name, double lhs, double rhs, Relation rel,
                             std::string digest = {}, double slack = 1e-9) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.relation = rel;
  c.slack = slack;
  c.digest = std::move(digest);
  const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
  const bool finite = std::isfinite(lhs) && std::isfinite(rhs);
  c.verdict = finite && c.margin() >= -slack * scale ? Verdict::satisfied : Verdict::violated;
  return c;
}

inline BoundCheck not_applicable(std::string name, std::string digest = {}) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = c.rhs = std::numeric_limits<double>::quiet_NaN();
  c.digest = std::move(digest);
  c.verdict = Verdict::not_applicable;
  return c;
}

// FNV-1a, 64 bit, as 16 hex digits.
inline std::string digest_of(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline std::string digest_of(const Domain& d) { return digest_of(domain_to_json(d).dump()); }

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "true";
    case Verdict::violated: return "false";
    default: return "n/a";
  }
}

inline void write_checks_csv(std::ostream& out, const std::vector<BoundCheck>& checks) {
  out.precision(17);
  out << "name,lhs,rhs,margin,satisfied,domain_digest\n";
  for (const auto& c : checks)
    out << c.name << ',' << c.lhs << ',' << c.rhs << ',' << c.margin() << ','
        << verdict_name(c.verdict) << ',' << c.digest << '\n';
}

inline void write_checks_csv(const std::string& path, const std::vector<BoundCheck>& checks) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_checks_csv(out, checks);
  if (!out) throw Error("write failed for '" + path + "'");
}

// Deterministic order by name.
inline void sort_checks(std::vector<BoundCheck>& checks) {
  std::stable_sort(checks.begin(), checks.end(),
                   [](const BoundCheck& a, const BoundCheck& b) { return a.name < b.name; });
}

//---------------------------------------------------------------------------//
// Norm inequalities
//---------------------------------------------------------------------------//

// Mean-to-max chain for f = u/||u||_2, and E <= 2/pi for convex sets.
inline std::vector<BoundCheck> check_basic(const EfficiencyReport& r, bool convex,
                                           const std::string& digest = {}) {
  const double finf = r.linf / r.l2;
  std::vector<BoundCheck> out;
  out.push_back(make_check("efficiency_lower", 1.0 / (r.measure * finf * finf), r.efficiency,
                           Relation::less_equal, digest));
  out.push_back(make_check("efficiency_upper", r.efficiency, 1.0 / (std::sqrt(r.measure) * finf),
                           Relation::less_equal, digest));
  out.push_back(make_check("efficiency_vs_localisation", r.efficiency, r.localisation,
                           Relation::less_equal, digest));
  if (convex)
    out.push_back(make_check("convex_efficiency", r.efficiency, 2.0 / std::numbers::pi,
                             Relation::less_equal, digest));
  return out;
}

// Inradius and diameter inequalities plus the sup-norm and inradius-eigenvalue
// estimates they are built from. lambda_tol is a relative allowance on lambda for
// the inradius-eigenvalue check (equality holds for balls).
inline std::vector<BoundCheck> check_geometric(const EfficiencyReport& r, const GeoSummary& g, int m,
                                               double lambda, bool planar_convex,
                                               const std::string& digest = {},
                                               double lambda_tol = 1e-9) {
  const double e = std::numbers::e;
  const double pi = std::numbers::pi;
  const double jb = bessel_zero(ball_order(m));
  const double E = r.efficiency;
  const double finf = r.linf / r.l2;
  std::vector<BoundCheck> out;
  out.push_back(make_check("inradius_bound", g.inradius / std::pow(g.measure, 1.0 / m),
                           std::sqrt(e * jb * jb / (2.0 * pi * m)) * std::pow(E, 1.0 / m),
                           Relation::less_equal, digest));
  out.push_back(make_check("sup_norm_bound", finf * finf,
                           std::pow(e / (2.0 * pi * m), 0.5 * m) * std::pow(lambda, 0.5 * m),
                           Relation::less_equal, digest));
  out.push_back(make_check("inradius_eigenvalue", lambda, jb * jb / (g.inradius * g.inradius),
                           Relation::less_equal, digest, lambda_tol));
  if (planar_convex && m == 2) {
    const double j0 = bessel_zero(BesselOrder::integer(0));
    out.push_back(make_check("diameter_bound", g.diameter / std::sqrt(g.measure),
                             std::sqrt(pi / (e * j0 * j0)) / std::sqrt(E), Relation::greater_equal,
                             digest));
    out.push_back(make_check("area_diameter_inradius", g.measure, 2.0 * g.diameter * g.inradius,
                             Relation::less_equal, digest));
  }
  return out;
}

//---------------------------------------------------------------------------//
// Horn separation bound
//---------------------------------------------------------------------------//

struct HornBoundTerms {
  double term1 = 0.0;          // 2 eps
  double term2 = 0.0;          // sublevel-set term
  double term3 = 0.0;          // tail term
  double sublevel_measure = 0.0;
  double mu_threshold = 0.0;   // sublevel set = {x1 : mu(Omega(x1/2)) <= mu_threshold}
  double total() const { return term1 + term2 + term3; }
};

namespace detail {

// Largest x in [0, limit] with pred(x), for pred true at 0 and monotone.
template <class Pred>
double monotone_extent(Pred pred, double limit, double tol) {
  if (!pred(0.0)) return 0.0;
  if (pred(limit)) return limit;
  double lo = 0.0, hi = limit;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

// Upper bound for ||u||_1^2/|Omega| on a horn-shaped set. For m = 2 the planar
// specialisation (width form) is used; both require mu(Omega') >= (m-1)(lambda - mu(Omega'))
// and 0 < eps <= |Omega| mu(Omega')^{m/2}. The sublevel set is taken over the projection
// of the domain on the x1 axis.
inline HornBoundTerms horn_bound_terms(const HornProfile& profile, double measure, double lambda,
                                    double eps, int m) {
  if (m != profile.dim()) throw PreconditionError("profile dimension does not match m");
  if (!profile.horn_shaped()) throw PreconditionError("domain is not horn-shaped");
  if (!(measure > 0.0)) throw PreconditionError("measure must be positive");
  const double mu1 = profile.mu_union();
  const double L = profile.union_measure();
  const double gap = lambda - mu1;
  if (!(gap > 0.0))
    throw PreconditionError("lambda = " + std::to_string(lambda) +
                            " must exceed mu(Omega') = " + std::to_string(mu1));
  if (mu1 < (m - 1) * gap)
    throw PreconditionError("separation condition fails: mu(Omega') = " + std::to_string(mu1) +
                            " < (m-1)(lambda - mu(Omega')) = " + std::to_string((m - 1) * gap));
  const double eps_max = measure * std::pow(mu1, 0.5 * m);
  if (!(eps > 0.0 && eps <= eps_max * (1.0 + 1e-12)))
    throw PreconditionError("eps = " + std::to_string(eps) + " outside (0, " +
                            std::to_string(eps_max) + "]");

  HornBoundTerms t;
  t.term1 = 2.0 * eps;
  if (m == 2) {
    const double C = std::log(4.0 * mu1 * measure / eps);
    t.mu_threshold = mu1 + 2.0 * gap * C;
  } else {
    // phi(mu) = (mu - mu1)/(2 gap) - log(|Omega| mu^{m/2}/eps) is convex with phi(mu1) <= 0.
    auto phi = [&](double mu) {
      return (mu - mu1) / (2.0 * gap) - std::log(measure / eps) - 0.5 * m * std::log(mu);
    };
    // phi decreases up to mu = m * gap and increases afterwards.
    double lo = std::max(mu1, m * gap);
    double hi = 2.0 * lo;
    while (phi(hi) <= 0.0) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) <= 0.0 ? lo : hi) = mid;
    }
    t.mu_threshold = lo;
  }
  const Interval ext = profile.extent();
  auto inside = [&](double x1) { return profile.mu(0.5 * x1) <= t.mu_threshold; };
  const double right = detail::monotone_extent(inside, std::max(ext.hi, 0.0), 1e-10);
  const double left = detail::monotone_extent([&](double x) { return inside(-x); },
                                              std::max(-ext.lo, 0.0), 1e-10);
  t.sublevel_measure = right + left;
  t.term2 = 2.0 * L / measure * t.sublevel_measure;
  const double log3 = std::max(0.0, std::log(eps_max / eps));
  t.term3 = std::pow(2.0, 2.5) * L / measure / std::sqrt(gap) * std::sqrt(log3);
  return t;
}

inline double horn_bound(const HornProfile& profile, double measure, double lambda, double eps,
                             int m) {
  return horn_bound_terms(profile, measure, lambda, eps, m).total();
}

// Upper estimate of lambda(Omega) from grid eigenvalues on h, h/2 (and optionally
// the extrapolated value): max(lambda_h, lambda_ex)(1 + 1e-6) + |lambda_h - lambda_2h|/3.
inline double conservative_lambda(double lambda_2h, double lambda_h,
                                  std::optional<double> extrapolated = std::nullopt) {
  const double base = std::max(lambda_h, extrapolated.value_or(lambda_h));
  return base * (1.0 + 1e-6) + std::fabs(lambda_h - lambda_2h) / 3.0;
}

//---------------------------------------------------------------------------//
// Heat kernel inequalities
//---------------------------------------------------------------------------//

// Diagonal Dirichlet heat kernel of the interval (a, a+L), generator d^2/dx^2,
// summed until the remaining terms are below tail_tol; zero outside the interval.
inline double interval_heat_kernel(double a, double L, double x, double t, double tail_tol = 1e-12) {
  if (!(L > 0.0) || !(x > a && x < a + L)) return 0.0;
  const double c = std::numbers::pi * std::numbers::pi * t / (L * L);
  const double s = std::numbers::pi * (x - a) / L;
  double sum = 0.0;
  for (int k = 1; k < 10000000; ++k) {
    const double sk = std::sin(k * s);
    sum += 2.0 / L * sk * sk * std::exp(-c * k * k);
    // sum_{j > k} (2/L) e^{-c j^2} <= (2/L) e^{-c k^2} / (2 c k)
    if (2.0 / L * std::exp(-c * k * k) / (2.0 * c * k) <= tail_tol) break;
  }
  return sum;
}

inline double heat_diag_rhs(double lambda1, int m, double t) {
  const double e = std::numbers::e;
  return std::pow(e / (2.0 * std::numbers::pi * m), 0.5 * m) * std::pow(lambda1, 0.5 * m) *
         std::exp(-t * lambda1);
}

// For each t >= m/(2 lambda1): max over sampled nodes of series plus tail bound against
// (e/(2 pi m))^{m/2} lambda1^{m/2} e^{-t lambda1}. Smaller t is reported not applicable.
inline std::vector<BoundCheck> check_heat_diag(const HeatKernelSeries& s, const Grid& grid,
                                               double lambda1, int m, const std::vector<double>& ts,
                                               int samples = 128, std::uint64_t seed = 20240917,
                                               const std::string& digest = {}) {
  std::vector<int> nodes;
  if (grid.size() <= samples) {
    for (int k = 0; k < grid.size(); ++k) nodes.push_back(k);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, grid.size() - 1);
    for (int k = 0; k < samples; ++k) nodes.push_back(pick(rng));
    nodes.push_back(grid.nearest_node({0.0, 0.0}) >= 0 ? grid.nearest_node({0.0, 0.0}) : nodes[0]);
    int argmax = 0;
    s.U.col(0).cwiseAbs().maxCoeff(&argmax);
    nodes.push_back(argmax);
  }
  std::vector<BoundCheck> out;
  for (double t : ts) {
    std::ostringstream name;
    name << "heat_diag_t=" << t;
    if (t < m / (2.0 * lambda1) * (1.0 - 1e-12)) {
      out.push_back(not_applicable(name.str(), digest));
      continue;
    }
    double worst = 0.0;
    for (int k : nodes) {
      const HeatDiag d = heat_kernel_diag(s, k, t);
      worst = std::max(worst, d.value + d.tail);
    }
    out.push_back(make_check(name.str(), worst, heat_diag_rhs(lambda1, m, t), Relation::less_equal,
                             digest));
  }
  return out;
}

// Separation bound for horn-shaped planar sets at a grid node:
// p(x,x;t) <= (4 pi t)^{-1/2} [pi_{Omega(x1/2)}(x',x';t) + e^{-x1^2/(4t)} pi_{Omega'}(x',x';t)].
inline BoundCheck check_horn_heat(const HornProfile& profile, const HeatKernelSeries& s,
                               const Grid& grid, Point x, double t,
                               const std::string& digest = {}) {
  if (!profile.horn_shaped()) throw PreconditionError("domain is not horn-shaped");
  if (profile.dim() != 2) throw PreconditionError("separation check requires m = 2");
  if (!(t > 0.0)) throw PreconditionError("t must be positive");
  const int node = grid.nearest_node(x);
  if (node < 0) throw PreconditionError("point is not an interior grid node");
  const Point p = grid.point(node);
  std::ostringstream name;
  name << "horn_separation(" << p.x << "," << p.y << ";t=" << t << ")";
  // The lattice kernel exceeds the continuum one by about h^2/(8t) per point; near the
  // diagonal the bound is tighter than that for t below 32 h^2.
  if (t < 32.0 * grid.h * grid.h) return not_applicable(name.str(), digest);
  const HeatDiag d = heat_kernel_diag(s, node, t);
  const double lhs = d.value + d.tail;

  const double pre = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
  double near = 0.0;
  if (const auto sec = profile.section(0.5 * p.x))
    near = interval_heat_kernel(sec->lo, sec->length(), p.y, t);
  const Interval u = profile.union_section();
  const double far = std::exp(-p.x * p.x / (4.0 * t)) * interval_heat_kernel(u.lo, u.length(), p.y, t);
  return make_check(name.str(), lhs, pre * (near + far), Relation::less_equal, digest);
}

}  // namespace effloc
