#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "effloc/error.hpp"
#include "effloc/geometry.hpp"

namespace effloc {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

//---------------------------------------------------------------------------//
// Grid
//---------------------------------------------------------------------------//

// Interior lattice nodes (i h, j h) of a planar domain.
struct Grid {
  double h = 0.0;
  int i0 = 0, j0 = 0;  // lattice origin of the bounding window
  int nx = 0, ny = 0;  // window extent in nodes
  std::vector<int> index;                  // nx * ny, -1 outside
  std::vector<std::pair<int, int>> nodes;  // node -> (i, j)

  int size() const { return static_cast<int>(nodes.size()); }
  double weight() const { return h * h; }

  int node_at(int i, int j) const {
    const int a = i - i0, b = j - j0;
    if (a < 0 || b < 0 || a >= nx || b >= ny) return -1;
    return index[static_cast<std::size_t>(b) * nx + a];
  }

  Point point(int k) const {
    return {nodes[k].first * h, nodes[k].second * h};
  }

  // Node closest to p, or -1 if that lattice point is not interior.
  int nearest_node(Point p) const {
    return node_at(static_cast<int>(std::lround(p.x / h)), static_cast<int>(std::lround(p.y / h)));
  }
};

struct DiscreteOperator {
  SparseMatrix A;  // symmetric, both triangles stored
  double h = 0.0;

  int size() const { return static_cast<int>(A.rows()); }
};

namespace detail {

constexpr double kClassifyTol = 1e-9;   // strict interior: level > tol * h
constexpr double kMinFraction = 1e-6;   // lower clamp of the boundary fraction

inline const std::pair<int, int> kSteps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

inline double inradius_of(const Domain& d) {
  if (const auto* s = std::get_if<SuperellipseHorn>(&d)) {
    auto dist = [&](double t) { return norm(superellipse_boundary(*s, t)); };
    return extreme_on_quarter(dist, false);
  }
  return geometric_summary(d).inradius;
}

}  // namespace detail

// Builds the interior node set of an m = 2 domain on the lattice x = i h, y = j h and the
// symmetric 5-point Dirichlet Laplacian on it. A node whose stencil neighbour lies
// outside gets the diagonal contribution 1/(theta h^2), theta h being the distance to
// the boundary along that grid line (theta = 1 for grid-aligned boundaries).
inline std::pair<Grid, DiscreteOperator> rasterize_and_assemble(const Domain& domain, double h) {
  validate(domain);
  if (dimension(domain) != 2) throw PreconditionError("grid discretization requires m = 2");
  if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("grid spacing must be positive");
  const double rho = detail::inradius_of(domain);
  if (h > 0.5 * rho * (1.0 + 1e-12))
    throw PreconditionError("grid spacing " + std::to_string(h) + " exceeds inradius/2 = " +
                            std::to_string(0.5 * rho));

  const BoundingBox box = bounding_box(domain);
  Grid g;
  g.h = h;
  g.i0 = static_cast<int>(std::floor(box.lo.x / h)) - 1;
  g.j0 = static_cast<int>(std::floor(box.lo.y / h)) - 1;
  g.nx = static_cast<int>(std::ceil(box.hi.x / h)) + 2 - g.i0;
  g.ny = static_cast<int>(std::ceil(box.hi.y / h)) + 2 - g.j0;
  g.index.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
  const double tol = detail::kClassifyTol * h;
  for (int b = 0; b < g.ny; ++b)
    for (int a = 0; a < g.nx; ++a) {
      const int i = g.i0 + a, j = g.j0 + b;
      if (planar_level(domain, {i * h, j * h}) > tol) {
        g.index[static_cast<std::size_t>(b) * g.nx + a] = g.size();
        g.nodes.emplace_back(i, j);
      }
    }
  if (g.nodes.empty()) throw PreconditionError("no interior grid nodes");

  // Connectivity of the stencil graph.
  std::vector<char> seen(g.nodes.size(), 0);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const auto [i, j] = g.nodes[queue.front()];
    queue.pop();
    for (const auto& [di, dj] : detail::kSteps) {
      const int k = g.node_at(i + di, j + dj);
      if (k >= 0 && !seen[k]) {
        seen[k] = 1;
        ++reached;
        queue.push(k);
      }
    }
  }
  if (reached != g.nodes.size())
    throw DisconnectedGrid("interior node graph is disconnected (" + std::to_string(reached) +
                           " of " + std::to_string(g.nodes.size()) + " nodes reachable)");

  const double inv_h2 = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.nodes.size() * 5);
  for (int k = 0; k < g.size(); ++k) {
    const auto [i, j] = g.nodes[k];
    double diag = 0.0;
    for (const auto& [di, dj] : detail::kSteps) {
      const int nb = g.node_at(i + di, j + dj);
      if (nb >= 0) {
        triplets.emplace_back(k, nb, -inv_h2);
        diag += inv_h2;
      } else {
        const double dist = boundary_distance(domain, g.point(k), {double(di), double(dj)}, h);
        const double theta = std::clamp(dist / h, detail::kMinFraction, 1.0);
        diag += inv_h2 / theta;
      }
    }
    triplets.emplace_back(k, k, diag);
  }
  DiscreteOperator op;
  op.h = h;
  op.A.resize(g.size(), g.size());
  op.A.setFromTriplets(triplets.begin(), triplets.end());
  op.A.makeCompressed();
  return {std::move(g), std::move(op)};
}

//---------------------------------------------------------------------------//
// First eigenpair
//---------------------------------------------------------------------------//

struct EigenPair {
  double lambda = 0.0;
  Vector u;  // sum u^2 h^2 = 1
  double residual = 0.0;  // ||A u - lambda u||_2 / ||u||_2
  int iterations = 0;
  double min_entry = 0.0;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, EigenPair best)
      : NumericalError(what), best_(std::move(best)) {}
  const EigenPair& best() const { return best_; }

 private:
  EigenPair best_;
};

namespace detail {

using Cholesky = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

inline SparseMatrix shifted(const SparseMatrix& A, double sigma) {
  SparseMatrix S = A;
  for (int k = 0; k < S.outerSize(); ++k) S.coeffRef(k, k) -= sigma;
  return S;
}

// Gauss-Seidel sweeps of u_i = sum_nb u_j / h^2 / (a_ii - lambda) in breadth-first order
// from the maximum; entries not yet visited are read as max(u_j, 0). Leaves u > 0
// wherever the positive values do not underflow.
inline void perron_polish(const SparseMatrix& A, double lambda, Vector& u) {
  const int n = static_cast<int>(u.size());
  int start = 0;
  u.maxCoeff(&start);
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  order.push_back(start);
  seen[start] = 1;
  for (std::size_t q = 0; q < order.size(); ++q)
    for (SparseMatrix::InnerIterator it(A, order[q]); it; ++it)
      if (!seen[it.row()]) {
        seen[it.row()] = 1;
        order.push_back(static_cast<int>(it.row()));
      }
  std::vector<char> done(n, 0);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int i : order) {
      double diag = 0.0, sum = 0.0;
      for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
        if (it.row() == i) {
          diag = it.value();
        } else {
          const double v = u[it.row()];
          sum -= it.value() * (done[it.row()] ? v : std::max(v, 0.0));
        }
      }
      if (i != start) u[i] = sum / (diag - lambda);
      done[i] = 1;
    }
  }
}

}  // namespace detail

// Smallest eigenpair by shifted inverse iteration; the shift stays below lambda_1 so
// every factorization is a Cholesky of a positive definite matrix.
inline EigenPair first_eigenpair(const DiscreteOperator& op, double tol = 1e-10) {
  if (!(tol > 0.0 && tol <= 1e-6)) throw PreconditionError("tol must lie in (0, 1e-6]");
  const SparseMatrix& A = op.A;
  const int n = op.size();
  constexpr int kMaxIterations = 100000;

  detail::Cholesky solver;
  solver.analyzePattern(A);
  solver.factorize(A);
  if (solver.info() != Eigen::Success) throw NumericalError("operator is not positive definite");
  double sigma = 0.0;

  Vector x = Vector::Ones(n);
  x.normalize();
  Vector Ax = A * x;
  double theta = x.dot(Ax);
  double res = (Ax - theta * x).norm();
  EigenPair best{theta, x, res, 0, 0.0};

  int it = 0;
  for (; it < kMaxIterations && res > tol * theta; ++it) {
    // Move the shift towards lambda_1 once the Ritz value is reliable.
    const double candidate = theta - 2.0 * res;
    if (res < 0.1 * theta && candidate > sigma + 0.5 * (theta - sigma)) {
      solver.factorize(detail::shifted(A, candidate));
      if (solver.info() == Eigen::Success) {
        sigma = candidate;
      } else {
        solver.factorize(detail::shifted(A, sigma));
      }
    }
    Vector y = solver.solve(x);
    if (!y.allFinite() || y.norm() == 0.0) throw NumericalError("inverse iteration broke down");
    x = y / y.norm();
    if (x.sum() < 0.0) x = -x;
    Ax = A * x;
    theta = x.dot(Ax);
    res = (Ax - theta * x).norm();
    if (res < best.residual) best = {theta, x, res, it + 1, 0.0};
  }
  const double h = op.h;
  if (res > tol * theta) {
    best.u = best.u / h;
    best.min_entry = best.u.minCoeff();
    throw ConvergenceError("inverse iteration did not converge in " +
                               std::to_string(kMaxIterations) + " iterations",
                           std::move(best));
  }

  detail::perron_polish(A, theta, x);
  x /= x.norm();
  Ax = A * x;
  theta = x.dot(Ax);
  res = (Ax - theta * x).norm();

  EigenPair out;
  out.lambda = theta;
  out.u = x / h;
  out.residual = res;
  out.iterations = it;
  out.min_entry = out.u.minCoeff();
  return out;
}

inline double rayleigh_quotient(const DiscreteOperator& op, const Vector& v) {
  return v.dot(op.A * v) / v.squaredNorm();
}

//---------------------------------------------------------------------------//
// First K eigenpairs
//---------------------------------------------------------------------------//

struct HeatKernelSeries {
  Vector lambdas;      // ascending
  Eigen::MatrixXd U;   // columns h^2-orthonormal
  double h = 0.0;
  int K = 0;
  bool converged = true;
  double max_residual = 0.0;  // max_j ||A u_j - lambda_j u_j|| / (lambda_j ||u_j||)
  std::string diagnostic;

  // Bound on sum_{j > K} e^{-t lambda_j} u_j(node)^2, using sum_j u_j(node)^2 = 1/h^2.
  double tail_bound(int node, double t) const {
    const double captured = U.row(node).squaredNorm();
    return std::exp(-t * lambdas[K - 1]) * std::max(0.0, 1.0 / (h * h) - captured);
  }
  // Node-independent version.
  double tail_bound(double t) const { return std::exp(-t * lambdas[K - 1]) / (h * h); }
};

struct HeatDiag {
  double value = 0.0;  // truncated series, a lower bound of the discrete kernel
  double tail = 0.0;
};

// Block inverse subspace iteration with Rayleigh-Ritz projection; handles repeated
// eigenvalues. Stagnation returns the achieved subspace with a diagnostic.
inline HeatKernelSeries eigen_series(const DiscreteOperator& op, int K, double tol = 1e-10) {
  const int n = op.size();
  if (K < 1 || K > std::min(200, n / 4))
    throw PreconditionError("eigen_series requires 1 <= K <= min(200, N_int/4)");
  const SparseMatrix& A = op.A;
  const int p = std::min(n, 2 * K + 10);

  detail::Cholesky solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw NumericalError("operator is not positive definite");

  // Deterministic start block.
  Eigen::MatrixXd X(n, p);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < n; ++r) {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      X(r, c) = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }

  HeatKernelSeries s;
  s.h = op.h;
  s.K = K;
  Eigen::VectorXd ritz;
  double prev_worst = std::numeric_limits<double>::infinity();
  int stalled = 0;
  constexpr int kMaxSweeps = 2000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Eigen::MatrixXd Y = solver.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    Eigen::MatrixXd AQ = A * Q;
    Eigen::MatrixXd H = Q.transpose() * AQ;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    X = Q * es.eigenvectors();
    ritz = es.eigenvalues();
    const Eigen::MatrixXd R = AQ * es.eigenvectors().leftCols(K) - X.leftCols(K) * ritz.head(K).asDiagonal();
    double worst = 0.0;
    for (int j = 0; j < K; ++j) worst = std::max(worst, R.col(j).norm() / ritz[j]);
    s.max_residual = worst;
    if (worst <= tol) break;
    stalled = worst > 0.999 * prev_worst ? stalled + 1 : 0;
    prev_worst = std::min(prev_worst, worst);
    if (stalled >= 50 || sweep + 1 == kMaxSweeps) {
      s.converged = false;
      s.diagnostic = "subspace iteration stagnated at relative residual " + std::to_string(worst);
      break;
    }
  }
  s.lambdas = ritz.head(K);
  s.U = X.leftCols(K) / op.h;
  for (int j = 0; j < K; ++j)
    if (s.U.col(j).sum() < 0.0) s.U.col(j) *= -1.0;
  return s;
}

inline HeatDiag heat_kernel_diag(const HeatKernelSeries& s, int node, double t) {
  if (!(t > 0.0)) throw PreconditionError("heat_kernel_diag requires t > 0");
  if (node < 0 || node >= s.U.rows()) throw PreconditionError("node index out of range");
  double value = 0.0;
  // Smallest terms first.
  for (int j = s.K - 1; j >= 0; --j) value += std::exp(-t * s.lambdas[j]) * s.U(node, j) * s.U(node, j);
  return {value, s.tail_bound(node, t)};
}

//---------------------------------------------------------------------------//
// Extrapolation
//---------------------------------------------------------------------------//

struct Extrapolated {
  double value = 0.0;
  double order = 2.0;
  double error_estimate = 0.0;  // |value - finest|
};

// Richardson extrapolation from values on h, h/2, h/4 with the observed order,
// clamped to [0.5, 4]; falls back to order 2 when the differences are not monotone.
inline Extrapolated richardson(double coarse, double medium, double fine) {
  const double d1 = coarse - medium, d2 = medium - fine;
  double order = 2.0;
  if (d1 != 0.0 && d2 != 0.0 && d1 * d2 > 0.0) order = std::clamp(std::log2(d1 / d2), 0.5, 4.0);
  const double value = fine - d2 / (std::pow(2.0, order) - 1.0);
  return {value, order, std::fabs(value - fine)};
}

inline Extrapolated richardson_pair(double coarse, double fine, double order = 2.0) {
  const double value = fine + (fine - coarse) / (std::pow(2.0, order) - 1.0);
  return {value, order, std::fabs(value - fine)};
}

//---------------------------------------------------------------------------//
// Exports
//---------------------------------------------------------------------------//

namespace detail {

inline std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.precision(17);
  return out;
}

}  // namespace detail

// Rows i,j,x,y,u.
inline void write_eigenvector_csv(const std::string& path, const Grid& g, const Vector& u) {
  auto out = detail::open_output(path);
  out << "i,j,x,y,u\n";
  for (int k = 0; k < g.size(); ++k) {
    const Point p = g.point(k);
    out << g.nodes[k].first << ',' << g.nodes[k].second << ',' << p.x << ',' << p.y << ',' << u[k]
        << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

// Packed little-endian records {int32 i, int32 j, double x, double y, double u}.
inline void write_eigenvector_binary(const std::string& path, const Grid& g, const Vector& u) {
  auto out = detail::open_output(path, true);
  for (int k = 0; k < g.size(); ++k) {
    const std::int32_t ij[2] = {g.nodes[k].first, g.nodes[k].second};
    const Point p = g.point(k);
    const double vals[3] = {p.x, p.y, u[k]};
    out.write(reinterpret_cast<const char*>(ij), sizeof ij);
    out.write(reinterpret_cast<const char*>(vals), sizeof vals);
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

// "row col value" per stored entry, 0-based.
inline void write_operator_triplets(const std::string& path, const DiscreteOperator& op) {
  auto out = detail::open_output(path);
  for (int k = 0; k < op.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.A, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace effloc
