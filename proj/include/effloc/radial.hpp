#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "effloc/bessel.hpp"
#include "effloc/error.hpp"
#include "effloc/functionals.hpp"

namespace effloc {

// psi'' + (m-1)/r psi' + lambda psi = 0 on (R_in, R_out), Dirichlet at R_out and at
// R_in > 0, regular at r = 0 for the ball.
struct RadialEigen {
  int m = 2;
  double r_in = 0.0;
  double r_out = 1.0;
  int N = 0;                  // coarse cell count; the profile lives on 2N cells
  double lambda = 0.0;        // extrapolated from N and 2N
  double lambda_coarse = 0.0;
  double lambda_fine = 0.0;
  std::vector<double> r;      // 2N + 1 nodes including both ends
  std::vector<double> psi;    // max psi = 1
  double residual = 0.0;      // relative residual of the discrete problem on 2N cells
  double peak_location = 0.0;
};

namespace detail {

using real = long double;

// b^m - a^m = (b - a) sum_k b^k a^{m-1-k}, free of cancellation for thin shells.
inline real power_difference(real a, real b, int m) {
  real s = 0.0L, bk = 1.0L;
  for (int k = 0; k < m; ++k) {
    s += bk * std::pow(a, m - 1 - k);
    bk *= b;
  }
  return (b - a) * s;
}

struct RadialSolve {
  real lambda = 0.0L;
  std::vector<real> r;         // all nodes
  std::vector<real> psi;       // all nodes, normalised to the refined max
  std::vector<real> volume;    // per node (0 at Dirichlet ends)
  real residual = 0.0L;
  real peak_location = 0.0L;
  real weighted_integral = 0.0L;  // integral of psi r^{m-1} dr
  real weighted_square = 0.0L;    // integral of psi^2 r^{m-1} dr
};

// Finite-volume discretization on `cells` uniform cells; unknowns are the nodes not
// carrying Dirichlet data.
inline RadialSolve solve_radial(int m, real r_in, real r_out, int cells) {
  const bool ball = r_in == 0.0L;
  const real d = (r_out - r_in) / cells;
  const int first = ball ? 0 : 1;
  const int n = cells - first;  // unknowns first .. cells-1

  RadialSolve s;
  s.r.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) s.r[i] = r_in + d * i;
  s.r[cells] = r_out;
  s.volume.assign(cells + 1, 0.0L);
  auto face = [&](int i) { return r_in + d * (i + 0.5L); };  // between node i and i+1
  std::vector<real> flux(cells, 0.0L);                        // flux[i] at face(i)
  for (int i = 0; i < cells; ++i) flux[i] = std::pow(face(i), m - 1) / d;
  for (int i = first; i < cells; ++i) {
    const real lo = i == 0 ? 0.0L : face(i - 1);
    s.volume[i] = power_difference(lo, face(i), m) / m;
  }

  // Symmetric tridiagonal T = V^{-1/2} K V^{-1/2}.
  std::vector<real> a(n), b(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) {
    const int i = first + k;
    const real left = i == 0 ? 0.0L : flux[i - 1];
    a[k] = (left + flux[i]) / s.volume[i];
    if (k + 1 < n) b[k] = -flux[i] / std::sqrt(s.volume[i] * s.volume[i + 1]);
  }

  auto below = [&](real x) {
    int count = 0;
    real q = a[0] - x;
    if (q < 0) ++count;
    for (int k = 1; k < n; ++k) {
      if (q == 0.0L) q = 1e-300L;
      q = a[k] - x - b[k - 1] * b[k - 1] / q;
      if (q < 0) ++count;
    }
    return count;
  };
  real lo = 0.0L, hi = 0.0L;
  for (int k = 0; k < n; ++k)
    hi = std::max(hi, a[k] + (k > 0 ? std::fabs(b[k - 1]) : 0.0L) + (k + 1 < n ? std::fabs(b[k]) : 0.0L));
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<real>::epsilon() * hi; ++it) {
    const real mid = 0.5L * (lo + hi);
    (below(mid) >= 1 ? hi : lo) = mid;
  }
  s.lambda = 0.5L * (lo + hi);

  // Inverse iteration with a shift just below lambda_1 (positive definite, no pivoting).
  const real sigma = lo - 1e-12L * s.lambda;
  std::vector<real> y(n, 1.0L), c(n), z(n);
  for (int sweep = 0; sweep < 4; ++sweep) {
    real denom = a[0] - sigma;
    c[0] = n > 1 ? b[0] / denom : 0.0L;
    z[0] = y[0] / denom;
    for (int k = 1; k < n; ++k) {
      denom = a[k] - sigma - b[k - 1] * c[k - 1];
      if (!(denom > 0.0L)) throw NumericalError("radial inverse iteration lost definiteness");
      c[k] = k + 1 < n ? b[k] / denom : 0.0L;
      z[k] = (y[k] - b[k - 1] * z[k - 1]) / denom;
    }
    for (int k = n - 2; k >= 0; --k) z[k] -= c[k] * z[k + 1];
    real nz = 0.0L;
    for (real v : z) nz += v * v;
    nz = std::sqrt(nz);
    for (int k = 0; k < n; ++k) y[k] = z[k] / nz;
  }
  if (y[n / 2] < 0) for (auto& v : y) v = -v;

  // Rayleigh quotient and residual of the symmetric problem.
  real num = 0.0L;
  std::vector<real> Ty(n);
  for (int k = 0; k < n; ++k) {
    Ty[k] = a[k] * y[k] + (k > 0 ? b[k - 1] * y[k - 1] : 0.0L) + (k + 1 < n ? b[k] * y[k + 1] : 0.0L);
    num += y[k] * Ty[k];
  }
  s.lambda = num;
  real res = 0.0L;
  for (int k = 0; k < n; ++k) res += (Ty[k] - num * y[k]) * (Ty[k] - num * y[k]);
  s.residual = std::sqrt(res) / num;

  s.psi.assign(cells + 1, 0.0L);
  for (int k = 0; k < n; ++k) s.psi[first + k] = y[k] / std::sqrt(s.volume[first + k]);

  // Peak by parabolic refinement through the largest node and its neighbours.
  int arg = first;
  for (int i = first; i < cells; ++i)
    if (s.psi[i] > s.psi[arg]) arg = i;
  real peak = s.psi[arg];
  s.peak_location = s.r[arg];
  if (arg > 0) {
    const real fl = s.psi[arg - 1], f0 = s.psi[arg], fr = s.psi[arg + 1];
    const real curv = fl - 2 * f0 + fr;
    if (curv < 0) {
      const real off = 0.5L * (fl - fr) / curv;
      peak = f0 - 0.125L * (fl - fr) * (fl - fr) / curv;
      s.peak_location = s.r[arg] + off * d;
    }
  }
  for (auto& v : s.psi) v /= peak;
  for (int i = first; i < cells; ++i) {
    s.weighted_integral += s.volume[i] * s.psi[i];
    s.weighted_square += s.volume[i] * s.psi[i] * s.psi[i];
  }
  return s;
}

inline void check_radial_args(int m, double r_in, double r_out, int N) {
  if (m < 2) throw PreconditionError("radial solver requires m >= 2");
  if (!(r_in >= 0.0 && r_out > r_in) || !std::isfinite(r_out))
    throw PreconditionError("radial solver requires 0 <= R_in < R_out");
  if (N < 64)
    throw PreconditionError("N = " + std::to_string(N) +
                            " radial cells cannot resolve the profile; use N >= 64");
}

}  // namespace detail

inline RadialEigen radial_first_eigen(int m, double r_in, double r_out, int N = 2048) {
  detail::check_radial_args(m, r_in, r_out, N);
  const auto coarse = detail::solve_radial(m, r_in, r_out, N);
  const auto fine = detail::solve_radial(m, r_in, r_out, 2 * N);
  RadialEigen e;
  e.m = m;
  e.r_in = r_in;
  e.r_out = r_out;
  e.N = N;
  e.lambda_coarse = static_cast<double>(coarse.lambda);
  e.lambda_fine = static_cast<double>(fine.lambda);
  e.lambda = static_cast<double>(fine.lambda + (fine.lambda - coarse.lambda) / 3.0L);
  e.residual = static_cast<double>(fine.residual);
  e.peak_location = static_cast<double>(fine.peak_location);
  e.r.assign(fine.r.begin(), fine.r.end());
  e.psi.assign(fine.psi.begin(), fine.psi.end());
  return e;
}

// Efficiency report of {R_in < |x| < R_out} in R^m; the ball when R_in = 0.
inline EfficiencyReport radial_report(int m, double r_in, double r_out, int N = 2048) {
  detail::check_radial_args(m, r_in, r_out, N);
  const auto coarse = detail::solve_radial(m, r_in, r_out, N);
  const auto fine = detail::solve_radial(m, r_in, r_out, 2 * N);
  const detail::real shell = detail::power_difference(r_in, r_out, m) / m;  // |Omega| / |S^{m-1}|
  const double sphere = m * ball_volume(m);
  auto extrapolate = [](detail::real c, detail::real f) { return f + (f - c) / 3.0L; };
  const detail::real I1 = extrapolate(coarse.weighted_integral, fine.weighted_integral);
  const detail::real I2 = extrapolate(coarse.weighted_square, fine.weighted_square);
  EfficiencyReport rep;
  rep.measure = static_cast<double>(sphere * shell);
  rep.discrete_measure = rep.measure;
  rep.linf = 1.0;
  rep.l1 = static_cast<double>(sphere * I1);
  rep.l2 = static_cast<double>(std::sqrt(sphere * I2));
  rep.efficiency = static_cast<double>(I1 / shell);
  rep.localisation = rep.l1 * rep.l1 / (rep.l2 * rep.l2 * rep.measure);
  return rep;
}

struct AnnulusReport {
  EfficiencyReport report;   // extrapolated
  RadialEigen eigen;
  double efficiency_grid = 0.0;  // on the 2N grid, paired with phi_integral
  double phi_integral = 0.0;     // int_0^1 psi(R + eps t) dt on the 2N grid
  double efficiency_lo = 0.0;    // (R/(R+eps))^{m-1} phi_integral
  double efficiency_hi = 0.0;    // ((R+eps)/R)^{m-1} phi_integral
  double lambda_lo = 0.0;        // (R/(R+eps))^{m-1} pi^2/eps^2
  double lambda_hi = 0.0;        // ((R+eps)/R)^{m-1} pi^2/eps^2
  double sine_deviation = 0.0;   // max |psi(r) - sin(pi (r - R)/eps)| over nodes
};

inline AnnulusReport annulus_report(int m, double R, double eps, int N = 2048) {
  if (!(R > 0.0 && eps > 0.0)) throw PreconditionError("annulus requires R > 0 and eps > 0");
  AnnulusReport a;
  a.report = radial_report(m, R, R + eps, N);
  a.eigen = radial_first_eigen(m, R, R + eps, N);
  const auto fine = detail::solve_radial(m, R, R + eps, 2 * N);
  const detail::real shell = detail::power_difference(R, R + eps, m) / m;
  a.efficiency_grid = static_cast<double>(fine.weighted_integral / shell);
  const detail::real d = detail::real(eps) / (2 * N);
  detail::real phi = 0.0L;
  for (int i = 1; i < 2 * N; ++i) phi += fine.psi[i];
  a.phi_integral = static_cast<double>(phi * d / eps);
  const double ratio = std::pow(R / (R + eps), m - 1);
  a.efficiency_lo = ratio * a.phi_integral;
  a.efficiency_hi = a.phi_integral / ratio;
  const double pi2 = std::numbers::pi * std::numbers::pi / (eps * eps);
  a.lambda_lo = ratio * pi2;
  a.lambda_hi = pi2 / ratio;
  for (std::size_t i = 0; i < a.eigen.r.size(); ++i)
    a.sine_deviation = std::max(
        a.sine_deviation,
        std::fabs(a.eigen.psi[i] - std::sin(std::numbers::pi * (a.eigen.r[i] - R) / eps)));
  return a;
}

inline void write_profile_csv(const std::string& path, const RadialEigen& e) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "r,psi\n";
  for (std::size_t i = 0; i < e.r.size(); ++i) out << e.r[i] << ',' << e.psi[i] << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace effloc
