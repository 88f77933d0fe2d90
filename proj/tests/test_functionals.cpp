#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "effloc/discretize.hpp"
#include "effloc/functionals.hpp"
#include "effloc/reference.hpp"

using namespace effloc;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double s3 = std::numbers::sqrt3;

struct Solved {
  Grid grid;
  EigenPair pair;
};

Solved solve(const Domain& d, double h) {
  auto [g, op] = rasterize_and_assemble(d, h);
  return {std::move(g), first_eigenpair(op)};
}

}  // namespace

// Each plane wave in the three-sine formula has |k|^2 = 16 pi^2 / 3, so the sum is an
// eigenfunction; a fourth-order stencil checks the identity numerically.
TEST(Reference, TriangleEigenfunctionSolvesHelmholtz) {
  const double lambda = 16.0 * pi * pi / 3.0;
  const double d = 1e-3;
  for (Point p : {Point{0.5, 0.3}, Point{0.3, 0.2}, Point{0.6, 0.5}, Point{0.45, 0.1}}) {
    auto f = [](double x, double y) { return triangle_eigenfunction(x, y); };
    auto second = [&](double dx, double dy) {
      return (-f(p.x + 2 * dx, p.y + 2 * dy) + 16 * f(p.x + dx, p.y + dy) - 30 * f(p.x, p.y) +
              16 * f(p.x - dx, p.y - dy) - f(p.x - 2 * dx, p.y - 2 * dy)) /
             (12 * d * d);
    };
    const double lap = second(d, 0) + second(0, d);
    EXPECT_NEAR(-lap / f(p.x, p.y), lambda, 1e-5 * lambda);
  }
}

TEST(Reference, TriangleEigenfunctionVanishesOnEdgesAndPeaksAtCentroid) {
  for (double s : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(triangle_eigenfunction(s, 0.0), 0.0, 1e-12);
    EXPECT_NEAR(triangle_eigenfunction(0.5 * s, 0.5 * s3 * s), 0.0, 1e-12);
    EXPECT_NEAR(triangle_eigenfunction(1.0 - 0.5 * s, 0.5 * s3 * s), 0.0, 1e-12);
  }
  EXPECT_NEAR(triangle_eigenfunction(0.5, s3 / 6.0), 1.5 * s3, 1e-12);
  EXPECT_THROW(triangle_eigenfunction(0.5, -0.1), PreconditionError);
}

TEST(Reference, TriangleL1NormByQuadrature) {
  const auto inner = [](double x) {
    const double top = x <= 0.5 ? s3 * x : s3 * (1.0 - x);
    return gauss_kronrod<double, 31>::integrate(
        [&](double y) { return triangle_eigenfunction(x, std::min(y, top)); }, 0.0, top, 10, 1e-13);
  };
  const double l1 = gauss_kronrod<double, 31>::integrate(inner, 0.0, 0.5, 10, 1e-12) +
                    gauss_kronrod<double, 31>::integrate(inner, 0.5, 1.0, 10, 1e-12);
  EXPECT_NEAR(l1, 9.0 / (4.0 * pi * s3), 1e-9);
  const double area = s3 / 4.0;
  EXPECT_NEAR(l1 / (area * 1.5 * s3), exact_efficiency(Shape::equilateral_triangle), 1e-9);
}

TEST(Reference, ExactValues) {
  EXPECT_NEAR(exact_efficiency("interval"), 2.0 / pi, 1e-15);
  EXPECT_NEAR(exact_efficiency("square"), 4.0 / (pi * pi), 1e-15);
  const double j0 = boost::math::cyl_bessel_j_zero(0.0, 1);
  EXPECT_NEAR(exact_efficiency("disc"), 2.0 * boost::math::cyl_bessel_j(1, j0) / j0, 1e-13);
  EXPECT_NEAR(product_efficiency(2.0 / pi, 2.0 / pi), exact_efficiency(Shape::rectangle), 1e-15);
  EXPECT_THROW(exact_efficiency("blob"), PreconditionError);
  EXPECT_THROW(product_efficiency(1.2, 0.5), PreconditionError);
}

// On the square the discrete eigenvector is 2 sin sin exactly, so
// E_h = (h sum sin(pi i h))^2 = (h cot(pi h / 2))^2.
TEST(Norms, SquareMatchesDiscreteClosedForm) {
  const double h = 1.0 / 32;
  const Solved s = solve(unit_square(), h);
  const EfficiencyReport r = norms_and_efficiency(s.pair, s.grid, 1.0);
  const double c = h / std::tan(pi * h / 2.0);
  EXPECT_NEAR(r.l2, 1.0, 1e-12);
  EXPECT_NEAR(r.linf, 2.0, 1e-8);
  EXPECT_NEAR(r.l1, 2.0 * c * c, 1e-8);
  EXPECT_NEAR(r.efficiency, c * c, 1e-8);
  EXPECT_NEAR(r.localisation, 4.0 * c * c * c * c, 1e-8);
  EXPECT_NEAR(r.discrete_measure, 31.0 * 31.0 * h * h, 1e-14);
}

// Hoelder chains hold exactly for any discrete vector.
TEST(Norms, ChainsAreExact) {
  for (const Domain& d : {Domain{equilateral_triangle()}, Domain{Disc{{0, 0}, 1.0}}, Domain{rhombus(6.0)}}) {
    const GeoSummary g = geometric_summary(d);
    const Solved s = solve(d, g.inradius / 12.0);
    const EfficiencyReport r = norms_and_efficiency(s.pair, s.grid, g.measure);
    const double finf = r.linf / r.l2;
    EXPECT_LE(1.0 / (r.measure * finf * finf), r.efficiency);
    EXPECT_LE(r.efficiency, 1.0 / (std::sqrt(r.measure) * finf));
    EXPECT_LE(r.efficiency, r.localisation);
    EXPECT_LE(r.localisation, 1.0);
  }
}

TEST(Norms, RejectsUnnormalisedOrSignChangingVectors) {
  Solved s = solve(unit_square(), 0.125);
  EigenPair scaled = s.pair;
  scaled.u *= 2.0;
  EXPECT_THROW(norms_and_efficiency(scaled, s.grid, 1.0), PreconditionError);
  EigenPair flipped = s.pair;
  flipped.u[0] = -flipped.u[0];
  EXPECT_THROW(norms_and_efficiency(flipped, s.grid, 1.0), PreconditionError);
  EXPECT_THROW(norms_and_efficiency(s.pair, s.grid, 0.0), PreconditionError);
}

TEST(Norms, JsonRoundTrip) {
  const Solved s = solve(equilateral_triangle(), 1.0 / 32);
  const EfficiencyReport r = norms_and_efficiency(s.pair, s.grid, std::sqrt(3.0) / 4.0);
  const EfficiencyReport b = efficiency_report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(b.l1, r.l1);
  EXPECT_EQ(b.linf, r.linf);
  EXPECT_EQ(b.efficiency, r.efficiency);
  EXPECT_EQ(b.localisation, r.localisation);
  EXPECT_EQ(b.h, r.h);
}

TEST(LevelSets, MonotoneInAlpha) {
  const Solved s = solve(rhombus(8.0), 1.0 / 32);
  LevelSetStat prev = level_set(s.pair, s.grid, 0.0);
  EXPECT_NEAR(prev.fraction, 1.0, 1e-12);
  EXPECT_NEAR(prev.mass, 1.0, 1e-12);
  for (double a : {0.1, 0.3, 0.6, 1.0, 1.5}) {
    const LevelSetStat cur = level_set(s.pair, s.grid, a);
    EXPECT_LE(cur.fraction, prev.fraction);
    EXPECT_LE(cur.mass, prev.mass);
    prev = cur;
  }
}

TEST(LevelSets, CriticalLevelCapturesMass) {
  for (double n : {4.0, 16.0}) {
    const Solved s = solve(rhombus(n), 1.0 / 32);
    const double a = discrete_localisation(s.pair, s.grid);
    const LevelSetStat c = critical_level_set(s.pair, s.grid);
    EXPECT_GE(c.mass, 1.0 - std::sqrt(a));
    EXPECT_LE(c.fraction, std::pow(a, 0.25));
  }
}

TEST(LevelSets, SplitHoldsForAllEps) {
  const GeoSummary g = geometric_summary(rhombus(16.0));
  const Solved s = solve(rhombus(16.0), 1.0 / 32);
  for (double eps : {0.01, 0.1, 0.3, 1.0, 3.0}) {
    const LocalisationSplit sp = localisation_split(s.pair, s.grid, g.measure, eps);
    EXPECT_GE(sp.margin(), 0.0) << eps;
  }
  EXPECT_THROW(localisation_split(s.pair, s.grid, g.measure, 0.0), PreconditionError);
}
