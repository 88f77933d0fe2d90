#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "effloc/geometry.hpp"

using namespace effloc;
using boost::math::quadrature::gauss_kronrod;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Summary, UnitSquare) {
  const GeoSummary g = geometric_summary(unit_square());
  EXPECT_DOUBLE_EQ(g.measure, 1.0);
  EXPECT_NEAR(g.inradius, 0.5, 1e-12);
  EXPECT_NEAR(g.diameter, std::sqrt(2.0), 1e-14);
  ASSERT_TRUE(g.width);
  EXPECT_NEAR(*g.width, 1.0, 1e-14);
}

TEST(Summary, EquilateralTriangle) {
  const GeoSummary g = geometric_summary(equilateral_triangle(2.0));
  EXPECT_NEAR(g.measure, std::sqrt(3.0), 1e-13);
  EXPECT_NEAR(g.inradius, 2.0 * std::sqrt(3.0) / 6.0, 1e-12);
  EXPECT_NEAR(g.diameter, 2.0, 1e-14);
  EXPECT_NEAR(*g.width, std::sqrt(3.0), 1e-12);
}

// Tangential quadrilateral: inradius = area / semiperimeter.
TEST(Summary, RhombusMatchesTangentialFormula) {
  for (double n : {1.0, 4.0, 16.0, 64.0}) {
    const GeoSummary g = geometric_summary(rhombus(n));
    const double side = std::hypot(n / 2.0, 0.5);
    EXPECT_NEAR(g.measure, n / 2.0, 1e-12 * n);
    EXPECT_NEAR(g.inradius, (n / 2.0) / (2.0 * side), 1e-12);
    EXPECT_NEAR(g.diameter, std::max(n, 1.0), 1e-12 * n);
    EXPECT_NEAR(*g.width, 2.0 * g.inradius, 1e-12);
  }
}

TEST(Summary, Disc) {
  const GeoSummary g = geometric_summary(Disc{{0.3, -0.2}, 2.0});
  EXPECT_NEAR(g.measure, 4.0 * pi, 1e-12);
  EXPECT_DOUBLE_EQ(g.inradius, 2.0);
  EXPECT_DOUBLE_EQ(g.diameter, 4.0);
}

TEST(Summary, SectorInradiusAndArea) {
  for (int n : {2, 3, 6, 12}) {
    const double beta = pi / n;
    const GeoSummary g = geometric_summary(Sector{1.5, n});
    const double s = std::sin(beta / 2.0);
    EXPECT_NEAR(g.measure, 0.5 * 1.5 * 1.5 * beta, 1e-12);
    EXPECT_NEAR(g.inradius, 1.5 * s / (1.0 + s), 1e-9);
  }
}

TEST(Summary, AnnulusVolume) {
  const GeoSummary g3 = geometric_summary(Annulus{1.0, 0.1, 3});
  EXPECT_NEAR(g3.measure, 4.0 * pi / 3.0 * (std::pow(1.1, 3) - 1.0), 1e-12);
  EXPECT_NEAR(g3.inradius, 0.05, 1e-15);
  const GeoSummary g2 = geometric_summary(Annulus{2.0, 0.5, 2});
  EXPECT_NEAR(g2.measure, pi * (2.5 * 2.5 - 4.0), 1e-12);
}

TEST(Summary, SuperellipseMeasureAgainstQuadrature) {
  for (double alpha : {1.0, 2.0, 4.0}) {
    for (int m : {2, 3}) {
      const SuperellipseHorn s{8.0, alpha, m};
      auto r = [&](double x) { return std::pow(1.0 - std::pow(std::fabs(2.0 * x / 8.0), alpha), 1.0 / alpha); };
      const double q = gauss_kronrod<double, 61>::integrate(
          [&](double x) { return m == 2 ? 2.0 * r(x) : pi * r(x) * r(x); }, -4.0, 4.0, 15, 1e-14);
      EXPECT_NEAR(superellipse_measure(s), q, 1e-9 * q) << "alpha=" << alpha << " m=" << m;
    }
  }
}

TEST(Validate, RejectsBadPolygons) {
  EXPECT_THROW(validate(Domain{ConvexPolygon{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{ConvexPolygon{{{0, 0}, {1, 1}, {2, 2}}}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{ConvexPolygon{{{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{ConvexPolygon{{{0, 0}, {1, 0}}}}), InvalidDomain);
}

TEST(Validate, RejectsBadParameters) {
  EXPECT_THROW(validate(Domain{Disc{{0, 0}, -1.0}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{Annulus{1.0, 0.0, 2}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{Annulus{1.0, 0.1, 1}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{SuperellipseHorn{0.5, 2.0, 2}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{SuperellipseHorn{4.0, 0.5, 2}}), InvalidDomain);
  EXPECT_THROW(validate(Domain{Sector{1.0, 0}}), InvalidDomain);
}

TEST(Level, PolygonDistanceIsExact) {
  const Domain sq = unit_square();
  EXPECT_NEAR(planar_level(sq, {0.5, 0.5}), 0.5, 1e-15);
  EXPECT_NEAR(planar_level(sq, {0.1, 0.7}), 0.1, 1e-15);
  EXPECT_LT(planar_level(sq, {1.2, 0.5}), 0.0);
  EXPECT_TRUE(contains(sq, {0.5, 0.5}));
  EXPECT_FALSE(contains(sq, {0.0, 0.5}));
}

TEST(Level, BoundaryDistanceAlongRays) {
  const Domain disc = Disc{{0, 0}, 1.0};
  EXPECT_NEAR(boundary_distance(disc, {0.5, 0.0}, {1.0, 0.0}, 10.0), 0.5, 1e-12);
  EXPECT_NEAR(boundary_distance(disc, {0.0, 0.0}, {0.0, -1.0}, 10.0), 1.0, 1e-12);
  const Domain sq = unit_square();
  EXPECT_NEAR(boundary_distance(sq, {0.25, 0.5}, {-1.0, 0.0}, 10.0), 0.25, 1e-12);
  const Domain se = SuperellipseHorn{8.0, 2.0, 2};
  EXPECT_NEAR(boundary_distance(se, {0.0, 0.0}, {0.0, 1.0}, 10.0), 1.0, 1e-9);
  EXPECT_NEAR(boundary_distance(se, {0.0, 0.0}, {1.0, 0.0}, 10.0), 4.0, 1e-9);
}

TEST(Scale, PolygonScalingScalesSummary) {
  const Domain p = elongated_quadrilateral(6.0, 0.3, 2.0);
  const GeoSummary a = geometric_summary(p);
  const GeoSummary b = geometric_summary(scaled(p, 2.5));
  EXPECT_NEAR(b.measure, 6.25 * a.measure, 1e-12 * b.measure);
  EXPECT_NEAR(b.inradius, 2.5 * a.inradius, 1e-12);
  EXPECT_NEAR(b.diameter, 2.5 * a.diameter, 1e-12);
}

TEST(Horn, RhombusProfile) {
  const HornProfile h = HornProfile::from_polygon(rhombus(8.0));
  EXPECT_TRUE(h.horn_shaped());
  EXPECT_NEAR(h.size(0.0), 1.0, 1e-15);
  EXPECT_NEAR(h.size(2.0), 0.5, 1e-15);
  EXPECT_NEAR(h.mu(0.0), pi * pi, 1e-12);
  EXPECT_NEAR(h.mu(2.0), 4.0 * pi * pi, 1e-11);
  EXPECT_TRUE(std::isinf(h.mu(4.5)));
  EXPECT_NEAR(h.union_measure(), 1.0, 1e-15);
  EXPECT_NEAR(h.mu_union(), pi * pi, 1e-12);
}

TEST(Horn, SkewPolygonIsNotHornShapedInItsFrame) {
  const ConvexPolygon p{{{0, 0}, {3, 0}, {4, 1}, {1, 2}}};
  EXPECT_FALSE(HornProfile::from_polygon(p).horn_shaped());
}

TEST(Horn, IsometryProducesCentredUnionOfWidth) {
  const ConvexPolygon p{{{0, 0}, {3, 0}, {4, 1}, {1, 2}}};
  const HornIsometry iso = horn_isometry(p);
  EXPECT_TRUE(iso.profile.horn_shaped());
  EXPECT_NEAR(iso.profile.union_measure(), polygon_width(p), 1e-9);
  EXPECT_NEAR(iso.profile.union_section().lo, -iso.profile.union_section().hi, 1e-9);
  EXPECT_NEAR(std::fabs(signed_area(iso.polygon.vertices)), std::fabs(signed_area(p.vertices)), 1e-12);
}

TEST(Horn, SuperellipseSectionEigenvalues) {
  const double j0 = boost::math::cyl_bessel_j_zero(0.0, 1);
  const HornProfile h3 = HornProfile::superellipse({8.0, 2.0, 3});
  EXPECT_NEAR(cross_section_mu(h3, 0.0, 3), j0 * j0, 1e-10);
  // Radius at x1 = 2 is sqrt(1 - (1/2)^2).
  EXPECT_NEAR(h3.mu(2.0), j0 * j0 / 0.75, 1e-10);
  const HornProfile h2 = HornProfile::superellipse({8.0, 2.0, 2});
  EXPECT_NEAR(h2.mu(0.0), pi * pi / 4.0, 1e-12);
  EXPECT_THROW(cross_section_mu(h2, 0.0, 3), PreconditionError);
}

TEST(Json, RoundTripAllTypes) {
  const std::vector<Domain> ds{rhombus(5.0), Disc{{1, 2}, 0.5}, Annulus{1.0, 0.2, 3},
                              SuperellipseHorn{6.0, 3.0, 2}, Sector{2.0, 5}};
  for (const auto& d : ds) {
    const Domain back = domain_from_json(domain_to_json(d));
    EXPECT_EQ(domain_to_json(back), domain_to_json(d)) << type_name(d);
  }
}

TEST(Json, Shorthands) {
  const Domain sq = domain_from_json(nlohmann::json::parse(R"({"type":"square","side":2})"));
  EXPECT_NEAR(geometric_summary(sq).measure, 4.0, 1e-14);
  const Domain q = domain_from_json(nlohmann::json::parse(R"({"type":"quadrilateral","n":10})"));
  EXPECT_NEAR(geometric_summary(q).measure, 5.0, 1e-12);
  EXPECT_THROW(domain_from_json(nlohmann::json::parse(R"({"type":"blob"})")), InvalidDomain);
  EXPECT_THROW(domain_from_json(nlohmann::json::parse(R"({"type":"annulus","R":1})")), InvalidDomain);
}
