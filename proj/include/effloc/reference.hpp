#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "effloc/bessel.hpp"
#include "effloc/error.hpp"

namespace effloc {

enum class Shape { interval, rectangle, equilateral_triangle, disc };

struct ExactValue {
  Shape shape;
  double efficiency;
  const char* note;
};

inline Shape shape_from_string(const std::string& s) {
  if (s == "interval") return Shape::interval;
  if (s == "rectangle" || s == "square") return Shape::rectangle;
  if (s == "triangle" || s == "equilateral_triangle") return Shape::equilateral_triangle;
  if (s == "disc") return Shape::disc;
  throw PreconditionError("unknown shape tag '" + s + "'");
}

inline ExactValue exact_value(Shape shape) {
  constexpr double pi = std::numbers::pi;
  switch (shape) {
    case Shape::interval:
      return {shape, 2.0 / pi, "mean of sin on [0, pi]"};
    case Shape::rectangle:
      return {shape, 4.0 / (pi * pi), "product of two intervals"};
    case Shape::equilateral_triangle:
      return {shape, 2.0 / (pi * std::numbers::sqrt3), "three-sine eigenfunction"};
    case Shape::disc: {
      const double j0 = bessel_zero(BesselOrder::integer(0));
      return {shape, 2.0 * bessel_j(BesselOrder::integer(1), j0) / j0, "2 J1(j0)/j0"};
    }
  }
  throw PreconditionError("unknown shape");
}

inline double exact_efficiency(Shape shape) { return exact_value(shape).efficiency; }
inline double exact_efficiency(const std::string& tag) { return exact_efficiency(shape_from_string(tag)); }

// First Dirichlet eigenfunction of the triangle (0,0), (1,0), (1/2, sqrt3/2), eigenvalue
// 16 pi^2 / 3, maximum 3 sqrt3 / 2 at the centroid.
inline double triangle_eigenfunction(double x1, double x2) {
  constexpr double s3 = std::numbers::sqrt3;
  constexpr double pi = std::numbers::pi;
  const double tol = 1e-14;
  if (x2 < -tol || s3 * x1 - x2 < -tol || s3 * (1.0 - x1) - x2 < -tol)
    throw PreconditionError("point lies outside the reference triangle");
  return std::sin(4.0 * pi * x2 / s3) - std::sin(2.0 * pi * (x1 + x2 / s3)) +
         std::sin(2.0 * pi * (x1 - x2 / s3));
}

// Efficiency is multiplicative under Cartesian products.
inline double product_efficiency(double e1, double e2) {
  if (!(e1 > 0.0 && e1 < 1.0 && e2 > 0.0 && e2 < 1.0))
    throw PreconditionError("efficiencies must lie in (0, 1)");
  return e1 * e2;
}

}  // namespace effloc
