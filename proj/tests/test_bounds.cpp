#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "effloc/bounds.hpp"
#include "effloc/radial.hpp"

using namespace effloc;

namespace {

constexpr double pi = std::numbers::pi;

// Method of images for the Dirichlet kernel of (0, L): sum_k G(2kL) - G(2x + 2kL).
double images_kernel(double L, double x, double t) {
  double s = 0.0;
  for (int k = -50; k <= 50; ++k) {
    const double a = 2.0 * k * L, b = 2.0 * x + 2.0 * k * L;
    s += std::exp(-a * a / (4.0 * t)) - std::exp(-b * b / (4.0 * t));
  }
  return s / std::sqrt(4.0 * pi * t);
}

}  // namespace

TEST(Checks, VerdictsAndSlack) {
  EXPECT_TRUE(make_check("a", 1.0, 2.0, Relation::less_equal).satisfied());
  EXPECT_FALSE(make_check("b", 2.0, 1.0, Relation::less_equal).satisfied());
  EXPECT_TRUE(make_check("c", 2.0, 1.0, Relation::greater_equal).satisfied());
  // Within relative slack.
  EXPECT_TRUE(make_check("d", 1.0 + 1e-12, 1.0, Relation::less_equal).satisfied());
  EXPECT_FALSE(make_check("e", 1.0 + 1e-12, 1.0, Relation::less_equal, "", 0.0).satisfied());
  EXPECT_FALSE(make_check("f", std::nan(""), 1.0, Relation::less_equal).satisfied());
  const BoundCheck na = not_applicable("g");
  EXPECT_TRUE(na.satisfied());
  EXPECT_FALSE(na.applicable());
  EXPECT_DOUBLE_EQ(make_check("h", 1.0, 3.0, Relation::less_equal).margin(), 2.0);
  EXPECT_DOUBLE_EQ(make_check("i", 5.0, 3.0, Relation::greater_equal).margin(), 2.0);
}

TEST(Checks, DigestIsStableAndDiscriminating) {
  EXPECT_EQ(digest_of(Domain{rhombus(8.0)}), digest_of(Domain{rhombus(8.0)}));
  EXPECT_NE(digest_of(Domain{rhombus(8.0)}), digest_of(Domain{rhombus(9.0)}));
  EXPECT_EQ(digest_of("").size(), 16u);
  // FNV-1a 64 reference value.
  EXPECT_EQ(digest_of("a"), "af63dc4c8601ec8c");
}

TEST(Checks, CsvLayout) {
  std::vector<BoundCheck> cs{make_check("z", 1, 2, Relation::less_equal, "d1"),
                             make_check("a", 3, 2, Relation::less_equal, "d1"), not_applicable("m", "d1")};
  sort_checks(cs);
  std::ostringstream os;
  write_checks_csv(os, cs);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "name,lhs,rhs,margin,satisfied,domain_digest");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 2), "a,");
  EXPECT_NE(line.find(",false,d1"), std::string::npos);
  std::getline(in, line);
  EXPECT_NE(line.find(",n/a,d1"), std::string::npos);
}

// Balls are extremal for the inradius-eigenvalue estimate.
TEST(Geometric, DiscAttainsInradiusEigenvalue) {
  const EfficiencyReport r = radial_report(2, 0.0, 1.0);
  const RadialEigen e = radial_first_eigen(2, 0.0, 1.0);
  const GeoSummary g = geometric_summary(Disc{{0, 0}, 1.0});
  const auto checks = check_geometric(r, g, 2, e.lambda, true, "", 1e-8);
  for (const auto& c : checks) EXPECT_TRUE(c.satisfied()) << c.name << " " << c.lhs << " " << c.rhs;
  const auto it = std::find_if(checks.begin(), checks.end(),
                               [](const BoundCheck& c) { return c.name == "inradius_eigenvalue"; });
  ASSERT_NE(it, checks.end());
  EXPECT_NEAR(it->lhs, it->rhs, 1e-7);
}

TEST(Geometric, BallsInHigherDimensions) {
  for (int m : {3, 4}) {
    const EfficiencyReport r = radial_report(m, 0.0, 1.0);
    const RadialEigen e = radial_first_eigen(m, 0.0, 1.0);
    GeoSummary g;
    g.measure = ball_volume(m);
    g.inradius = 1.0;
    g.diameter = 2.0;
    for (const auto& c : check_geometric(r, g, m, e.lambda, false, "", 1e-8))
      EXPECT_TRUE(c.satisfied()) << m << " " << c.name;
    for (const auto& c : check_basic(r, true)) EXPECT_TRUE(c.satisfied()) << m << " " << c.name;
  }
}

TEST(HeatKernel, IntervalSeriesMatchesImages) {
  for (double t : {0.001, 0.01, 0.1, 1.0})
    for (double x : {0.05, 0.3, 0.5, 0.9}) {
      const double ref = images_kernel(1.0, x, t);
      EXPECT_NEAR(interval_heat_kernel(0.0, 1.0, x, t), ref, 1e-10 * std::max(1.0, ref)) << t << " " << x;
    }
  EXPECT_NEAR(interval_heat_kernel(2.0, 3.0, 3.2, 0.05), images_kernel(3.0, 1.2, 0.05), 1e-10);
  EXPECT_EQ(interval_heat_kernel(0.0, 1.0, 1.5, 0.1), 0.0);
}

TEST(HeatKernel, SquareDiagonalCheck) {
  const double h = 1.0 / 24;
  auto [g, op] = rasterize_and_assemble(unit_square(), h);
  const HeatKernelSeries s = eigen_series(op, 60);
  const double l1 = s.lambdas[0];
  const double t0 = 2.0 / (2.0 * l1);
  const auto cs = check_heat_diag(s, g, l1, 2, {0.5 * t0, t0, 2 * t0, 10 * t0});
  ASSERT_EQ(cs.size(), 4u);
  EXPECT_FALSE(cs[0].applicable());
  for (std::size_t i = 1; i < cs.size(); ++i) EXPECT_TRUE(cs[i].satisfied()) << cs[i].name;
}

TEST(HeatKernel, HornSeparationOnRhombus) {
  const ConvexPolygon p = rhombus(6.0);
  const HornProfile prof = HornProfile::from_polygon(p);
  auto [g, op] = rasterize_and_assemble(p, 1.0 / 24);
  const HeatKernelSeries s = eigen_series(op, 80);
  int n = 0;
  for (double x1 : {0.0, 0.5, 1.5, 2.5})
    for (double t : {0.06, 0.1, 0.3}) {
      const BoundCheck c = check_horn_heat(prof, s, g, {x1, 0.0}, t);
      EXPECT_TRUE(c.applicable());
      EXPECT_TRUE(c.satisfied()) << c.name << " " << c.lhs << " " << c.rhs;
      ++n;
    }
  EXPECT_EQ(n, 12);
  // Unresolved times (t < 32 h^2) are not judged.
  EXPECT_FALSE(check_horn_heat(prof, s, g, {0.5, 0.0}, 0.02).applicable());
  EXPECT_THROW(check_horn_heat(prof, s, g, {10.0, 0.0}, 0.1), PreconditionError);
}

TEST(Horn, RhombusTermsAgainstClosedForms) {
  const double n = 16.0, measure = n / 2.0, mu1 = pi * pi;
  const HornProfile prof = HornProfile::from_polygon(rhombus(n));
  const double lambda = 12.0, eps = std::pow(n, -2.0 / 3.0);
  const HornBoundTerms t = horn_bound_terms(prof, measure, lambda, eps, 2);
  const double gap = lambda - mu1;
  EXPECT_NEAR(t.term1, 2.0 * eps, 1e-15);
  EXPECT_NEAR(t.mu_threshold, mu1 + 2.0 * gap * std::log(4.0 * mu1 * measure / eps), 1e-10);
  // mu(x1/2) <= T  <=>  1 - |x1|/n >= pi/sqrt(T), inside the projection (-n/2, n/2).
  const double half = std::min(n / 2.0, n * (1.0 - pi / std::sqrt(t.mu_threshold)));
  EXPECT_NEAR(t.sublevel_measure, 2.0 * half, 1e-8);
  EXPECT_NEAR(t.total(), t.term1 + t.term2 + t.term3, 1e-15);
  EXPECT_NEAR(horn_bound(prof, measure, lambda, eps, 2), t.total(), 1e-15);
}

TEST(Horn, BoundTightensWithElongation) {
  double prev = std::numeric_limits<double>::infinity();
  for (double n : {8.0, 16.0, 32.0, 64.0, 128.0}) {
    const HornProfile prof = HornProfile::from_polygon(rhombus(n));
    const double lambda = pi * pi + 20.0 * std::pow(n, -2.0 / 3.0);
    const double b = horn_bound(prof, n / 2.0, lambda, std::pow(n, -2.0 / 3.0), 2);
    EXPECT_LT(b, prev);
    prev = b;
  }
}

TEST(Horn, HigherDimensionalThresholdSolvesDefiningEquation) {
  const SuperellipseHorn se{16.0, 2.0, 3};
  const HornProfile prof = HornProfile::superellipse(se);
  const double mu1 = prof.mu_union();
  const double lambda = mu1 + 0.2, eps = 0.05;
  const double measure = superellipse_measure(se);
  const HornBoundTerms t = horn_bound_terms(prof, measure, lambda, eps, 3);
  const double gap = lambda - mu1, T = t.mu_threshold;
  const double phi = (T - mu1) / (2.0 * gap) - std::log(measure / eps) - 1.5 * std::log(T);
  EXPECT_NEAR(phi, 0.0, 1e-8);
  EXPECT_GE(T, 3.0 * gap);
}

TEST(Horn, Preconditions) {
  const HornProfile prof = HornProfile::from_polygon(rhombus(8.0));
  EXPECT_THROW(horn_bound(prof, 4.0, 9.0, 0.1, 2), PreconditionError);   // lambda <= mu'
  EXPECT_THROW(horn_bound(prof, 4.0, 25.0, 0.1, 2), PreconditionError);  // mu' < lambda - mu'
  EXPECT_THROW(horn_bound(prof, 4.0, 12.0, 0.0, 2), PreconditionError);
  EXPECT_THROW(horn_bound(prof, 4.0, 12.0, 1e6, 2), PreconditionError);
  const HornProfile skew = HornProfile::from_polygon(ConvexPolygon{{{0, 0}, {3, 0}, {4, 1}, {1, 2}}});
  EXPECT_THROW(horn_bound(skew, 4.0, 12.0, 0.1, 2), PreconditionError);
}

TEST(Horn, ConservativeLambdaDominatesInputs) {
  // Grid eigenvalues decrease towards the limit; the estimate adds a third of the last step.
  EXPECT_GE(conservative_lambda(10.2, 10.0, 9.95), 10.0 + 0.2 / 3.0);
  EXPECT_GE(conservative_lambda(9.8, 10.0), 10.0 + 0.2 / 3.0);
  EXPECT_GE(conservative_lambda(10.2, 10.0, 10.1), 10.1);
}
