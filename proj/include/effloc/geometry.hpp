#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "effloc/bessel.hpp"
#include "effloc/error.hpp"
#include "json.hpp"

namespace effloc {

//---------------------------------------------------------------------------//
// Points and domain types
//---------------------------------------------------------------------------//

struct Point {
  double x = 0.0;
  double y = 0.0;

  constexpr bool operator==(const Point&) const = default;
};

constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr double length() const { return hi - lo; }
  constexpr bool contains(double v) const { return v > lo && v < hi; }
};

// Vertices counter-clockwise.
struct ConvexPolygon {
  std::vector<Point> vertices;
};

struct Disc {
  Point center;
  double radius = 1.0;
};

// {R < |x| < R + eps} in R^m, centred at the origin.
struct Annulus {
  double inner_radius = 1.0;
  double thickness = 0.1;
  int dim = 2;
};

// {(2|x1|/n)^alpha + |x'|^alpha < 1} in R^m.
struct SuperellipseHorn {
  double elongation = 1.0;
  double exponent = 2.0;
  int dim = 2;
};

// {(rho, theta) : 0 < rho < r, 0 < theta < pi/n}, apex at the origin.
struct Sector {
  double radius = 1.0;
  int divisor = 1;
};

using Domain = std::variant<ConvexPolygon, Disc, Annulus, SuperellipseHorn, Sector>;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

//---------------------------------------------------------------------------//
// Polygon primitives
//---------------------------------------------------------------------------//

inline double signed_area(const std::vector<Point>& v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) twice += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * twice;
}

inline double polygon_scale(const ConvexPolygon& poly) {
  double s = 0.0;
  for (const auto& p : poly.vertices) s = std::max({s, std::fabs(p.x), std::fabs(p.y)});
  return std::max(s, 1.0);
}

// Removes repeated and collinear vertices; keeps orientation.
inline ConvexPolygon simplified(ConvexPolygon poly, double tol = 1e-14) {
  const double scale = polygon_scale(poly);
  bool changed = true;
  while (changed && poly.vertices.size() >= 3) {
    changed = false;
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point prev = poly.vertices[(i + n - 1) % n];
      const Point cur = poly.vertices[i];
      const Point next = poly.vertices[(i + 1) % n];
      const Point a = cur - prev;
      const Point b = next - cur;
      const bool repeated = norm(a) <= tol * scale;
      if (repeated || (std::fabs(cross(a, b)) <= tol * scale * scale && dot(a, b) >= 0.0)) {
        poly.vertices.erase(poly.vertices.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return poly;
}

inline bool is_strictly_convex_ccw(const ConvexPolygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  const double scale = polygon_scale(poly);
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[(i + 1) % n] - v[i];
    const Point b = v[(i + 2) % n] - v[(i + 1) % n];
    if (cross(a, b) <= 1e-14 * scale * scale) return false;
    turning += std::atan2(cross(a, b), dot(a, b));
  }
  // A convex simple polygon turns exactly once.
  return std::fabs(turning - 2.0 * std::numbers::pi) < 1e-6;
}

// Edge i runs from v[i] to v[i+1]; outward unit normal and offset d with n.x <= d inside.
struct EdgeLine {
  Point normal;
  double offset = 0.0;
};

inline std::vector<EdgeLine> edge_lines(const ConvexPolygon& poly) {
  std::vector<EdgeLine> lines;
  const auto& v = poly.vertices;
  lines.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point e = v[(i + 1) % v.size()] - v[i];
    const double len = norm(e);
    const Point n{e.y / len, -e.x / len};
    lines.push_back({n, dot(n, v[i])});
  }
  return lines;
}

inline double polygon_diameter(const ConvexPolygon& poly) {
  double best = 0.0;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, norm(v[i] - v[j]));
  return best;
}

// Width-attaining pair: p on a supporting edge, q on the opposite supporting line,
// p - q orthogonal to both lines.
struct WidthPair {
  double width = 0.0;
  Point p;
  Point q;
  double angle = 0.0;  // direction of p - q, in [0, pi)
};

inline WidthPair polygon_width_pair(const ConvexPolygon& poly) {
  const auto& v = poly.vertices;
  const auto lines = edge_lines(poly);
  const double scale = polygon_scale(poly);
  const double tol = 1e-12 * scale;

  double min_width = std::numeric_limits<double>::infinity();
  std::vector<double> edge_width(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double far = 0.0;
    for (const auto& p : v) far = std::max(far, lines[i].offset - dot(lines[i].normal, p));
    edge_width[i] = far;
    min_width = std::min(min_width, far);
  }

  std::optional<WidthPair> best;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (edge_width[i] > min_width + tol) continue;
    const Point a = v[i];
    const Point b = v[(i + 1) % v.size()];
    const Point dir = (1.0 / norm(b - a)) * (b - a);
    const Point n = lines[i].normal;
    // Opposite contact set, projected along the edge direction.
    double t_lo = std::numeric_limits<double>::infinity();
    double t_hi = -t_lo;
    for (const auto& p : v) {
      if (lines[i].offset - dot(n, p) >= edge_width[i] - tol) {
        t_lo = std::min(t_lo, dot(p - a, dir));
        t_hi = std::max(t_hi, dot(p - a, dir));
      }
    }
    const double s_lo = std::max(0.0, t_lo);
    const double s_hi = std::min(norm(b - a), t_hi);
    if (s_lo > s_hi + tol) continue;
    const double s = 0.5 * (s_lo + s_hi);
    const Point p = a + s * dir;
    const Point q = p - edge_width[i] * n;
    double angle = std::atan2(n.y, n.x);  // direction of p - q
    if (angle < 0.0) angle += std::numbers::pi;
    if (angle >= std::numbers::pi - 1e-15) angle -= std::numbers::pi;
    if (!best || angle < best->angle - 1e-12) best = WidthPair{edge_width[i], p, q, angle};
  }
  if (!best) throw GeometryDegenerate("no width-attaining pair found");
  return *best;
}

inline double polygon_width(const ConvexPolygon& poly) { return polygon_width_pair(poly).width; }

// Largest inscribed disc: max r subject to n_i.c + r <= d_i, solved by enumerating
// the basic solutions of the three-variable linear program.
struct InscribedDisc {
  Point center;
  double radius = 0.0;
};

inline InscribedDisc polygon_inscribed_disc(const ConvexPolygon& poly) {
  const auto lines = edge_lines(poly);
  const std::size_t n = lines.size();
  const double tol = 1e-12 * polygon_scale(poly);
  InscribedDisc best{{0, 0}, -1.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        // Rows [n.x n.y 1] * [cx cy r]^T = d
        const EdgeLine* L[3] = {&lines[i], &lines[j], &lines[k]};
        double m[3][4];
        for (int r = 0; r < 3; ++r) {
          m[r][0] = L[r]->normal.x;
          m[r][1] = L[r]->normal.y;
          m[r][2] = 1.0;
          m[r][3] = L[r]->offset;
        }
        for (int c = 0; c < 3; ++c) {
          int piv = c;
          for (int r = c + 1; r < 3; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
          if (std::fabs(m[piv][c]) < 1e-14) goto singular;
          for (int q = 0; q < 4; ++q) std::swap(m[c][q], m[piv][q]);
          for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = m[r][c] / m[c][c];
            for (int q = c; q < 4; ++q) m[r][q] -= f * m[c][q];
          }
        }
        {
          const Point c{m[0][3] / m[0][0], m[1][3] / m[1][1]};
          const double r = m[2][3] / m[2][2];
          if (r <= best.radius) continue;
          bool feasible = true;
          for (const auto& l : lines)
            if (dot(l.normal, c) + r > l.offset + tol) {
              feasible = false;
              break;
            }
          if (feasible) best = {c, r};
        }
      singular:;
      }
  if (best.radius <= 0.0) throw GeometryDegenerate("inscribed disc not found");
  return best;
}

//---------------------------------------------------------------------------//
// Factories
//---------------------------------------------------------------------------//

inline ConvexPolygon make_rectangle(double width, double height) {
  return {{{0, 0}, {width, 0}, {width, height}, {0, height}}};
}

inline ConvexPolygon unit_square() { return make_rectangle(1.0, 1.0); }

inline ConvexPolygon equilateral_triangle(double side = 1.0) {
  return {{{0, 0}, {side, 0}, {0.5 * side, 0.5 * std::numbers::sqrt3 * side}}};
}

// Rhombus with diagonals n (along x1) and 1 (along x2).
inline ConvexPolygon rhombus(double n) {
  return {{{0.5 * n, 0}, {0, 0.5}, {-0.5 * n, 0}, {0, -0.5}}};
}

// Quadrilateral with perpendicular diagonals of lengths n and 1:
// vertices (b, 0), (0, a), (b - n, 0), (0, a - 1) with a in [0, 1], b in [0, n].
inline ConvexPolygon elongated_quadrilateral(double n, double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= n))
    throw InvalidDomain("quadrilateral requires a in [0,1] and b in [0,n]");
  return simplified(ConvexPolygon{{{b, 0}, {0, a}, {b - n, 0}, {0, a - 1}}});
}

inline ConvexPolygon transformed(const ConvexPolygon& poly, double angle, Point shift_before) {
  const double c = std::cos(angle), s = std::sin(angle);
  ConvexPolygon out;
  out.vertices.reserve(poly.vertices.size());
  for (const auto& p0 : poly.vertices) {
    const Point p = p0 - shift_before;
    out.vertices.push_back({c * p.x - s * p.y, s * p.x + c * p.y});
  }
  return out;
}

//---------------------------------------------------------------------------//
// Validation and basic queries
//---------------------------------------------------------------------------//

inline int dimension(const Domain& d) {
  return std::visit(overloaded{[](const Annulus& a) { return a.dim; },
                               [](const SuperellipseHorn& s) { return s.dim; },
                               [](const auto&) { return 2; }},
                    d);
}

inline bool is_convex(const Domain& d) { return !std::holds_alternative<Annulus>(d); }

inline std::string type_name(const Domain& d) {
  return std::visit(overloaded{[](const ConvexPolygon&) { return std::string("polygon"); },
                               [](const Disc&) { return std::string("disc"); },
                               [](const Annulus&) { return std::string("annulus"); },
                               [](const SuperellipseHorn&) { return std::string("superellipse"); },
                               [](const Sector&) { return std::string("sector"); }},
                    d);
}

inline void validate(const Domain& d) {
  std::visit(
      overloaded{
          [](const ConvexPolygon& p) {
            if (p.vertices.size() < 3) throw InvalidDomain("polygon needs at least 3 vertices");
            for (const auto& v : p.vertices)
              if (!std::isfinite(v.x) || !std::isfinite(v.y))
                throw InvalidDomain("polygon vertex is not finite");
            if (signed_area(p.vertices) <= 0.0)
              throw InvalidDomain("polygon must be counter-clockwise with positive area");
            if (!is_strictly_convex_ccw(p)) throw InvalidDomain("polygon is not strictly convex");
          },
          [](const Disc& c) {
            if (!(c.radius > 0.0)) throw InvalidDomain("disc radius must be positive");
          },
          [](const Annulus& a) {
            if (!(a.inner_radius > 0.0 && a.thickness > 0.0))
              throw InvalidDomain("annulus radii must be positive");
            if (a.dim < 2) throw InvalidDomain("annulus dimension must be >= 2");
          },
          [](const SuperellipseHorn& s) {
            if (!(s.elongation >= 1.0)) throw InvalidDomain("superellipse elongation must be >= 1");
            if (!(s.exponent >= 1.0) || !std::isfinite(s.exponent))
              throw InvalidDomain("superellipse exponent must be finite and >= 1");
            if (s.dim < 2) throw InvalidDomain("superellipse dimension must be >= 2");
          },
          [](const Sector& s) {
            if (!(s.radius > 0.0)) throw InvalidDomain("sector radius must be positive");
            if (s.divisor < 1) throw InvalidDomain("sector divisor must be >= 1");
          }},
      d);
}

// Homothety by factor s about the origin (disc centre scales too).
inline Domain scaled(const Domain& d, double s) {
  if (!(s > 0.0)) throw PreconditionError("scale factor must be positive");
  return std::visit(
      overloaded{[&](const ConvexPolygon& p) -> Domain {
                   ConvexPolygon out = p;
                   for (auto& v : out.vertices) v = s * v;
                   return out;
                 },
                 [&](const Disc& c) -> Domain { return Disc{s * c.center, s * c.radius}; },
                 [&](const Annulus& a) -> Domain {
                   return Annulus{s * a.inner_radius, s * a.thickness, a.dim};
                 },
                 [&](const Sector& c) -> Domain { return Sector{s * c.radius, c.divisor}; },
                 [](const SuperellipseHorn&) -> Domain {
                   throw PreconditionError("superellipse family is not closed under scaling");
                 }},
      d);
}

//---------------------------------------------------------------------------//
// Planar membership: level > 0 inside. For polygons and discs the level is the
// exact distance to the boundary; elsewhere it is a first-order distance estimate.
//---------------------------------------------------------------------------//

inline double polygon_level(const ConvexPolygon& poly, Point p) {
  double level = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point e = v[(i + 1) % v.size()] - v[i];
    level = std::min(level, cross(e, p - v[i]) / norm(e));
  }
  return level;
}

inline double superellipse_level(const SuperellipseHorn& s, Point p) {
  const double a = s.exponent;
  const double u = 2.0 * std::fabs(p.x) / s.elongation;
  const double w = std::fabs(p.y);
  const double f = std::pow(u, a) + std::pow(w, a);
  const double gx = a * std::pow(u, a - 1.0) * 2.0 / s.elongation;
  const double gy = a * std::pow(w, a - 1.0);
  const double g = std::hypot(gx, gy);
  return g > 0.0 ? (1.0 - f) / g : (1.0 - f);
}

inline double sector_level(const Sector& s, Point p) {
  const double beta = std::numbers::pi / s.divisor;
  const double radial = s.radius - norm(p);
  const double lower = p.y;                                        // theta > 0
  const double upper = p.x * std::sin(beta) - p.y * std::cos(beta);  // theta < beta
  return std::min({radial, lower, upper});
}

inline double planar_level(const Domain& d, Point p) {
  return std::visit(
      overloaded{[&](const ConvexPolygon& poly) { return polygon_level(poly, p); },
                 [&](const Disc& c) { return c.radius - norm(p - c.center); },
                 [&](const Annulus& a) {
                   if (a.dim != 2) throw PreconditionError("planar query on an m >= 3 annulus");
                   const double r = norm(p);
                   return std::min(r - a.inner_radius, a.inner_radius + a.thickness - r);
                 },
                 [&](const SuperellipseHorn& s) {
                   if (s.dim != 2)
                     throw PreconditionError("planar query on an m >= 3 superellipse");
                   return superellipse_level(s, p);
                 },
                 [&](const Sector& s) { return sector_level(s, p); }},
      d);
}

inline bool contains(const Domain& d, Point p, double tol = 0.0) { return planar_level(d, p) > tol; }

// Distance from interior point p to the boundary along the unit axis direction dir,
// searched on (0, cap]. Returns cap if the boundary is not reached.
inline double boundary_distance(const Domain& d, Point p, Point dir, double cap) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&d)) {
    double best = cap;
    for (const auto& l : edge_lines(*poly)) {
      const double rate = dot(l.normal, dir);
      if (rate > 0.0) best = std::min(best, (l.offset - dot(l.normal, p)) / rate);
    }
    return std::max(best, 0.0);
  }
  if (const auto* disc = std::get_if<Disc>(&d)) {
    const Point q = p - disc->center;
    const double b = dot(q, dir);
    const double c = dot(q, q) - disc->radius * disc->radius;
    const double disc_b = b * b - c;
    if (disc_b < 0.0) return cap;
    // Root with the larger magnitude computed stably, then the positive one.
    const double root = -b + std::sqrt(disc_b);
    return std::clamp(root, 0.0, cap);
  }
  // Bisection on the level function; the domain is convex along grid lines here.
  double lo = 0.0, hi = cap;
  if (planar_level(d, p + cap * dir) > 0.0) return cap;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (planar_level(d, p + mid * dir) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct BoundingBox {
  Point lo;
  Point hi;
};

inline BoundingBox bounding_box(const Domain& d) {
  return std::visit(
      overloaded{
          [](const ConvexPolygon& poly) {
            BoundingBox b{poly.vertices.front(), poly.vertices.front()};
            for (const auto& v : poly.vertices) {
              b.lo = {std::min(b.lo.x, v.x), std::min(b.lo.y, v.y)};
              b.hi = {std::max(b.hi.x, v.x), std::max(b.hi.y, v.y)};
            }
            return b;
          },
          [](const Disc& c) {
            return BoundingBox{{c.center.x - c.radius, c.center.y - c.radius},
                               {c.center.x + c.radius, c.center.y + c.radius}};
          },
          [](const Annulus& a) {
            const double r = a.inner_radius + a.thickness;
            return BoundingBox{{-r, -r}, {r, r}};
          },
          [](const SuperellipseHorn& s) {
            return BoundingBox{{-0.5 * s.elongation, -1.0}, {0.5 * s.elongation, 1.0}};
          },
          [](const Sector& s) {
            const double beta = std::numbers::pi / s.divisor;
            BoundingBox b{{0, 0}, {s.radius, 0}};
            auto add = [&](Point p) {
              b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
              b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
            };
            add({s.radius * std::cos(beta), s.radius * std::sin(beta)});
            if (beta > std::numbers::pi / 2) add({0, s.radius});
            if (beta >= std::numbers::pi) add({-s.radius, 0});
            return b;
          }},
      d);
}

//---------------------------------------------------------------------------//
// Geometric summary
//---------------------------------------------------------------------------//

struct GeoSummary {
  double measure = 0.0;
  double inradius = 0.0;
  double diameter = 0.0;
  std::optional<double> width;  // planar convex domains only
};

namespace detail {

// Boundary of the planar superellipse, t in [0, 2 pi).
inline Point superellipse_boundary(const SuperellipseHorn& s, double t) {
  const double c = std::cos(t), si = std::sin(t);
  const double e = 2.0 / s.exponent;
  return {0.5 * s.elongation * std::copysign(std::pow(std::fabs(c), e), c),
          std::copysign(std::pow(std::fabs(si), e), si)};
}

// Golden-section refinement of the extreme of f on [a, b].
template <class F>
double golden_extreme(F f, double a, double b, bool maximize) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 100; ++it) {
    const bool left = maximize ? f1 > f2 : f1 < f2;
    if (left) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return f(0.5 * (a + b));
}

template <class F>
double extreme_on_quarter(F f, bool maximize) {
  constexpr int samples = 4096;
  const double step = 0.5 * std::numbers::pi / samples;
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double v = f(i * step);
    if (maximize ? v > best_val : v < best_val) {
      best = i;
      best_val = v;
    }
  }
  const double a = std::max(0.0, (best - 1) * step);
  const double b = std::min(0.5 * std::numbers::pi, (best + 1) * step);
  const double refined = golden_extreme(f, a, b, maximize);
  return maximize ? std::max(refined, best_val) : std::min(refined, best_val);
}

inline ConvexPolygon sampled_polygon(const std::function<Point(double)>& boundary,
                                     double t0, double t1, int samples) {
  ConvexPolygon poly;
  for (int i = 0; i < samples; ++i) poly.vertices.push_back(boundary(t0 + (t1 - t0) * i / samples));
  return simplified(poly, 1e-15);
}

}  // namespace detail

// Measure of the superellipse horn: omega_{m-1} n Gamma(1+1/a)Gamma(1+(m-1)/a)/Gamma(1+1/a+(m-1)/a).
inline double superellipse_measure(const SuperellipseHorn& s) {
  const double a = s.exponent;
  const double b = (s.dim - 1) / a;
  const double beta = std::tgamma(1.0 + 1.0 / a) * std::tgamma(1.0 + b) / std::tgamma(1.0 + 1.0 / a + b);
  return ball_volume(s.dim - 1) * s.elongation * beta;
}

inline GeoSummary geometric_summary(const Domain& d) {
  validate(d);
  return std::visit(
      overloaded{
          [](const ConvexPolygon& poly) {
            return GeoSummary{signed_area(poly.vertices), polygon_inscribed_disc(poly).radius,
                              polygon_diameter(poly), polygon_width(poly)};
          },
          [](const Disc& c) {
            return GeoSummary{std::numbers::pi * c.radius * c.radius, c.radius, 2.0 * c.radius,
                              2.0 * c.radius};
          },
          [](const Annulus& a) {
            const double outer = a.inner_radius + a.thickness;
            const double vol = ball_volume(a.dim) *
                               (std::pow(outer, a.dim) - std::pow(a.inner_radius, a.dim));
            return GeoSummary{vol, 0.5 * a.thickness, 2.0 * outer, std::nullopt};
          },
          [](const SuperellipseHorn& s) {
            // Centrally symmetric and convex: the inscribed ball is centred at 0.
            auto dist = [&](double t) { return norm(detail::superellipse_boundary(s, t)); };
            GeoSummary g;
            g.measure = superellipse_measure(s);
            g.inradius = detail::extreme_on_quarter(dist, false);
            g.diameter = 2.0 * detail::extreme_on_quarter(dist, true);
            if (s.dim == 2) {
              auto poly = detail::sampled_polygon(
                  [&](double t) { return detail::superellipse_boundary(s, t); }, 0.0,
                  2.0 * std::numbers::pi, 8192);
              g.width = polygon_width(poly);
            }
            return g;
          },
          [](const Sector& s) {
            const double beta = std::numbers::pi / s.divisor;
            const double sh = std::sin(0.5 * beta);
            auto arc = [&](double t) {
              if (t < 0.0) return Point{0.0, 0.0};
              return Point{s.radius * std::cos(t), s.radius * std::sin(t)};
            };
            ConvexPolygon poly;
            poly.vertices.push_back({0.0, 0.0});
            constexpr int samples = 4096;
            for (int i = 0; i <= samples; ++i) poly.vertices.push_back(arc(beta * i / samples));
            poly = simplified(poly, 1e-15);
            return GeoSummary{0.5 * beta * s.radius * s.radius, s.radius * sh / (1.0 + sh),
                              std::max(s.radius, 2.0 * s.radius * sh), polygon_width(poly)};
          }},
      d);
}

//---------------------------------------------------------------------------//
// Horn-shaped profiles
//---------------------------------------------------------------------------//

// Cross-section data x1 -> Omega(x1) of a horn-shaped set. For m = 2 the sections
// are intervals; for the superellipse family in m >= 3 they are (m-1)-balls.
class HornProfile {
 public:
  // Profile of a convex polygon in its own coordinates (x1 horizontal).
  static HornProfile from_polygon(const ConvexPolygon& poly) {
    validate(Domain{poly});
    HornProfile h;
    h.dim_ = 2;
    h.polygon_ = poly;
    h.extent_ = {poly.vertices.front().x, poly.vertices.front().x};
    double ylo = poly.vertices.front().y, yhi = ylo;
    for (const auto& v : poly.vertices) {
      h.extent_.lo = std::min(h.extent_.lo, v.x);
      h.extent_.hi = std::max(h.extent_.hi, v.x);
      ylo = std::min(ylo, v.y);
      yhi = std::max(yhi, v.y);
    }
    h.union_ = {ylo, yhi};
    h.horn_ = h.check_nested();
    return h;
  }

  static HornProfile superellipse(const SuperellipseHorn& s) {
    validate(Domain{s});
    HornProfile h;
    h.dim_ = s.dim;
    h.superellipse_ = s;
    h.extent_ = {-0.5 * s.elongation, 0.5 * s.elongation};
    h.union_ = {-1.0, 1.0};
    h.horn_ = true;
    return h;
  }

  int dim() const { return dim_; }
  bool horn_shaped() const { return horn_; }
  // Projection of the domain on the x1 axis.
  Interval extent() const { return extent_; }
  bool is_polygon() const { return polygon_.has_value(); }
  const std::optional<ConvexPolygon>& polygon() const { return polygon_; }

  // Section Omega(x1) for m = 2; empty outside the open extent.
  std::optional<Interval> section(double x1) const {
    if (!extent_.contains(x1)) return std::nullopt;
    if (superellipse_) {
      const double r = radius(x1);
      return Interval{-r, r};
    }
    return polygon_section(x1);
  }

  // l(x1): interval length for m = 2, ball radius for m >= 3; 0 outside.
  double size(double x1) const {
    if (!extent_.contains(x1)) return 0.0;
    if (superellipse_) return dim_ == 2 ? 2.0 * radius(x1) : radius(x1);
    return polygon_section(x1).length();
  }

  // First Dirichlet eigenvalue of Omega(x1); +inf for the empty section.
  double mu(double x1) const {
    const double l = size(x1);
    if (l <= 0.0) return std::numeric_limits<double>::infinity();
    if (dim_ == 2) return std::numbers::pi * std::numbers::pi / (l * l);
    const double j = bessel_zero(section_order(dim_));
    return j * j / (l * l);
  }

  // Omega' as a set: interval (m = 2) or the ball radius in its hi field.
  Interval union_section() const { return union_; }

  // |Omega'|_{m-1}
  double union_measure() const {
    if (dim_ == 2) return union_.length();
    return ball_volume(dim_ - 1) * std::pow(union_.hi, dim_ - 1);
  }

  // mu(Omega')
  double mu_union() const {
    if (dim_ == 2) {
      const double l = union_.length();
      return std::numbers::pi * std::numbers::pi / (l * l);
    }
    const double j = bessel_zero(section_order(dim_));
    return j * j / (union_.hi * union_.hi);
  }

 private:
  double radius(double x1) const {
    const auto& s = *superellipse_;
    const double u = std::pow(2.0 * std::fabs(x1) / s.elongation, s.exponent);
    return u >= 1.0 ? 0.0 : std::pow(1.0 - u, 1.0 / s.exponent);
  }

  // Closed intersection of the vertical line x = x1 with the polygon.
  Interval polygon_section(double x1) const {
    const auto& v = polygon_->vertices;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point a = v[i], b = v[(i + 1) % v.size()];
      if (x1 < std::min(a.x, b.x) || x1 > std::max(a.x, b.x)) continue;
      if (a.x == b.x) {
        lo = std::min({lo, a.y, b.y});
        hi = std::max({hi, a.y, b.y});
      } else {
        const double y = a.y + (x1 - a.x) * (b.y - a.y) / (b.x - a.x);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    if (lo > hi) return {0.0, 0.0};
    return {lo, hi};
  }

  bool check_nested() const {
    std::vector<double> knots{extent_.lo, extent_.hi};
    for (const auto& v : polygon_->vertices) knots.push_back(v.x);
    if (extent_.contains(0.0)) knots.push_back(0.0);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    const double tol = 1e-12 * polygon_scale(*polygon_);
    auto nested = [&](const std::vector<double>& order) {
      // Sections along `order` (moving away from 0) must shrink.
      for (std::size_t i = 1; i < order.size(); ++i) {
        const Interval inner = polygon_section(order[i]);
        const Interval outer = polygon_section(order[i - 1]);
        if (inner.lo < outer.lo - tol || inner.hi > outer.hi + tol) return false;
      }
      return true;
    };
    std::vector<double> right, left;
    for (double k : knots) {
      if (k >= 0.0) right.push_back(k);
      if (k <= 0.0) left.push_back(k);
    }
    std::reverse(left.begin(), left.end());
    return nested(right) && nested(left);
  }

  int dim_ = 2;
  bool horn_ = false;
  Interval extent_;
  Interval union_;
  std::optional<ConvexPolygon> polygon_;
  std::optional<SuperellipseHorn> superellipse_;
};

/// mu(Omega(x1)); the profile's dimension must match m.
inline double cross_section_mu(const HornProfile& profile, double x1, int m) {
  if (m != profile.dim()) throw PreconditionError("profile dimension does not match m");
  return profile.mu(x1);
}

struct HornIsometry {
  ConvexPolygon polygon;  // image of the input under the rigid motion
  HornProfile profile;
  WidthPair pair;         // in the input frame
  double rotation = 0.0;  // applied after translating (p + q)/2 to the origin
};

// Rigid motion R T_{p,q} sending a convex polygon to a horn-shaped set whose
// union of sections is an interval of length w centred at 0.
inline HornIsometry horn_isometry(const ConvexPolygon& poly) {
  validate(Domain{poly});
  const WidthPair pair = polygon_width_pair(poly);
  const Point mid = 0.5 * (pair.p + pair.q);
  const double rotation = 0.5 * std::numbers::pi - pair.angle;
  ConvexPolygon image = transformed(poly, rotation, mid);
  HornProfile profile = HornProfile::from_polygon(image);
  const double scale = polygon_scale(poly);
  if (!profile.horn_shaped() ||
      std::fabs(profile.union_measure() - pair.width) > 1e-9 * scale ||
      std::fabs(profile.union_section().lo + profile.union_section().hi) > 1e-9 * scale)
    throw GeometryDegenerate("isometric image is not horn-shaped with |Omega'| = w");
  return {std::move(image), std::move(profile), pair, rotation};
}

//---------------------------------------------------------------------------//
// JSON: {"type": ..., parameters...}
//---------------------------------------------------------------------------//

inline nlohmann::json domain_to_json(const Domain& d) {
  using nlohmann::json;
  return std::visit(
      overloaded{
          [](const ConvexPolygon& p) {
            json v = json::array();
            for (const auto& q : p.vertices) v.push_back({q.x, q.y});
            return json{{"type", "polygon"}, {"vertices", v}};
          },
          [](const Disc& c) {
            return json{{"type", "disc"}, {"center", {c.center.x, c.center.y}}, {"radius", c.radius}};
          },
          [](const Annulus& a) {
            return json{{"type", "annulus"}, {"R", a.inner_radius}, {"eps", a.thickness}, {"m", a.dim}};
          },
          [](const SuperellipseHorn& s) {
            return json{{"type", "superellipse"}, {"n", s.elongation}, {"alpha", s.exponent}, {"m", s.dim}};
          },
          [](const Sector& s) {
            return json{{"type", "sector"}, {"r", s.radius}, {"n", s.divisor}};
          }},
      d);
}

// Also accepts the shorthands "square", "rectangle", "triangle", "rhombus" and
// "quadrilateral" (n, a, b).
inline Domain domain_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    Domain d;
    if (type == "polygon") {
      ConvexPolygon p;
      for (const auto& v : j.at("vertices")) {
        if (!v.is_array() || v.size() != 2) throw InvalidDomain("vertex must be [x, y]");
        p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
      }
      d = p;
    } else if (type == "disc") {
      Disc c;
      if (j.contains("center")) c.center = {j["center"][0].get<double>(), j["center"][1].get<double>()};
      c.radius = j.value("radius", 1.0);
      d = c;
    } else if (type == "annulus") {
      d = Annulus{j.at("R").get<double>(), j.at("eps").get<double>(), j.value("m", 2)};
    } else if (type == "superellipse") {
      d = SuperellipseHorn{j.at("n").get<double>(), j.value("alpha", 2.0), j.value("m", 2)};
    } else if (type == "sector") {
      d = Sector{j.value("r", 1.0), j.at("n").get<int>()};
    } else if (type == "square") {
      d = make_rectangle(j.value("side", 1.0), j.value("side", 1.0));
    } else if (type == "rectangle") {
      d = make_rectangle(j.at("width").get<double>(), j.at("height").get<double>());
    } else if (type == "triangle") {
      d = equilateral_triangle(j.value("side", 1.0));
    } else if (type == "rhombus") {
      d = rhombus(j.at("n").get<double>());
    } else if (type == "quadrilateral") {
      const double n = j.at("n").get<double>();
      d = elongated_quadrilateral(n, j.value("a", 0.5), j.value("b", 0.5 * n));
    } else {
      throw InvalidDomain("unknown domain type '" + type + "'");
    }
    validate(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidDomain(std::string("malformed domain JSON: ") + e.what());
  }
}

}  // namespace effloc
