#pragma once

// Bessel functions of the first kind for the integer and half-integer orders
// that occur for balls and ball cross-sections in dimensions m <= 5.

#include <cmath>
#include <numbers>
#include <string>

#include "effloc/error.hpp"

namespace effloc {

// Order nu stored as the integer 2*nu so half-integers stay exact.
struct BesselOrder {
  int twice = 0;

  constexpr double value() const { return twice / 2.0; }
  constexpr bool is_integer() const { return twice % 2 == 0; }
  constexpr bool operator==(const BesselOrder&) const = default;

  static constexpr BesselOrder integer(int n) { return {2 * n}; }
  // nu = k/2
  static constexpr BesselOrder halves(int k) { return {k}; }
};

// Order whose first zero gives the Dirichlet eigenvalue of the unit ball in R^m.
constexpr BesselOrder ball_order(int m) { return BesselOrder{m - 2}; }
// Order for the unit ball of the (m-1)-dimensional cross-section.
constexpr BesselOrder section_order(int m) { return BesselOrder{m - 3}; }

constexpr bool bessel_order_supported(BesselOrder order) {
  return order.twice >= -1 && order.twice <= 3;
}

namespace detail {

inline void require_supported(BesselOrder order) {
  if (!bessel_order_supported(order)) {
    throw PreconditionError("unsupported Bessel order " + std::to_string(order.value()) +
                            " (supported: -1/2, 0, 1/2, 1, 3/2)");
  }
}

// Power series, accumulated in extended precision.
inline long double bessel_series(BesselOrder order, long double x) {
  const long double nu = order.twice / 2.0L;
  const long double half = x / 2.0L;
  if (x == 0.0L) {
    if (order.twice == 0) return 1.0L;
    if (order.twice < 0) return HUGE_VALL;
    return 0.0L;
  }
  long double term = std::pow(half, nu) / std::tgamma(nu + 1.0L);
  long double sum = term;
  const long double q = half * half;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + nu));
    sum += term;
    if (k > q && std::fabs(term) <= 1e-22L * std::fabs(sum)) break;
  }
  return sum;
}

// Miller's backward recurrence normalised by J0 + 2 sum J_2k = 1.
inline double bessel_miller(int order, double x) {
  const int start = 2 * (static_cast<int>(x + 30.0 + 10.0 * std::sqrt(x)) / 2 + 1);
  long double next = 0.0L;     // J_{k+1}
  long double current = 1e-30L;  // J_k
  long double wanted = 0.0L;
  long double norm = 0.0L;
  for (int k = start; k >= 1; --k) {
    const long double prev = (2.0L * k / x) * current - next;  // J_{k-1}
    next = current;
    current = prev;
    if (k - 1 == order) wanted = current;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0L * current;
    if (std::fabs(current) > 1e250L) {
      current *= 1e-250L;
      next *= 1e-250L;
      wanted *= 1e-250L;
      norm *= 1e-250L;
    }
  }
  if (order == 0) wanted = current;
  norm += current;
  return static_cast<double>(wanted / norm);
}

}  // namespace detail

/// J_nu(x) for x >= 0. Absolute error below 1e-12 on [0, 30].
inline double bessel_j(BesselOrder order, double x) {
  detail::require_supported(order);
  if (!(x >= 0.0)) throw PreconditionError("bessel_j requires x >= 0");
  if (x <= 12.0) return static_cast<double>(detail::bessel_series(order, x));
  if (order.is_integer()) return detail::bessel_miller(order.twice / 2, x);
  const double scale = std::sqrt(2.0 / (std::numbers::pi * x));
  switch (order.twice) {
    case -1: return scale * std::cos(x);
    case 1: return scale * std::sin(x);
    default: return scale * (std::sin(x) / x - std::cos(x));  // 3/2
  }
}

/// First positive zero j_nu.
inline double bessel_zero(BesselOrder order) {
  detail::require_supported(order);
  if (order.twice == -1) return std::numbers::pi / 2.0;
  if (order.twice == 1) return std::numbers::pi;
  long double lo = 0, hi = 0;
  switch (order.twice) {
    case 0: lo = 2.0L; hi = 3.0L; break;
    case 2: lo = 3.5L; hi = 4.2L; break;
    default: lo = 4.2L; hi = 4.7L; break;
  }
  long double flo = detail::bessel_series(order, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-19L * hi; ++it) {
    const long double mid = 0.5L * (lo + hi);
    const long double fmid = detail::bessel_series(order, mid);
    if ((fmid > 0) == (flo > 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

/// Volume of the unit ball in R^m.
inline double ball_volume(int m) {
  return std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
}

}  // namespace effloc
