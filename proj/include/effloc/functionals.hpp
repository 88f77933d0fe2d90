#pragma once

#include <cmath>
#include <limits>

#include "effloc/discretize.hpp"
#include "json.hpp"

namespace effloc {

// Norms of the first eigenfunction under sum u^2 h^2 = 1.
struct EfficiencyReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double measure = 0.0;           // |Omega|
  double discrete_measure = 0.0;  // N_int h^2
  double efficiency = 0.0;        // l1 / (|Omega| linf)
  double localisation = 0.0;      // l1^2 / |Omega|
  double h = 0.0;                 // 0 for non-grid (radial) reports
};

inline nlohmann::json to_json(const EfficiencyReport& r) {
  return {{"l1", r.l1},
          {"l2", r.l2},
          {"linf", r.linf},
          {"measure", r.measure},
          {"discrete_measure", r.discrete_measure},
          {"E", r.efficiency},
          {"a", r.localisation},
          {"h", r.h}};
}

inline EfficiencyReport efficiency_report_from_json(const nlohmann::json& j) {
  EfficiencyReport r;
  r.l1 = j.at("l1").get<double>();
  r.l2 = j.at("l2").get<double>();
  r.linf = j.at("linf").get<double>();
  r.measure = j.at("measure").get<double>();
  r.discrete_measure = j.value("discrete_measure", 0.0);
  r.efficiency = j.at("E").get<double>();
  r.localisation = j.at("a").get<double>();
  r.h = j.value("h", 0.0);
  return r;
}

inline EfficiencyReport norms_and_efficiency(const EigenPair& pair, const Grid& grid, double measure) {
  if (!(measure > 0.0)) throw PreconditionError("measure must be positive");
  if (pair.u.size() != grid.size()) throw PreconditionError("eigenvector does not match the grid");
  const double w = grid.weight();
  EfficiencyReport r;
  r.h = grid.h;
  r.measure = measure;
  r.discrete_measure = grid.size() * w;
  r.l2 = std::sqrt(pair.u.squaredNorm() * w);
  if (std::fabs(r.l2 - 1.0) > 1e-8) throw PreconditionError("eigenvector is not h^2-normalized");
  if (!(pair.u.minCoeff() >= 0.0)) throw PreconditionError("eigenvector has negative entries");
  r.l1 = pair.u.sum() * w;
  r.linf = pair.u.maxCoeff();
  r.efficiency = r.l1 / (measure * r.linf);
  r.localisation = r.l1 * r.l1 / (r.l2 * r.l2 * measure);
  return r;
}

// Statistics of {u > alpha} against the discretized measure.
struct LevelSetStat {
  double alpha = 0.0;
  double fraction = 0.0;  // |{u > alpha}| / |Omega|_h
  double mass = 0.0;      // integral of u^2 over {u > alpha}
};

inline LevelSetStat level_set(const EigenPair& pair, const Grid& grid, double alpha) {
  if (!(alpha >= 0.0)) throw PreconditionError("level_set requires alpha >= 0");
  std::size_t count = 0;
  double mass = 0.0;
  for (double v : pair.u)
    if (v > alpha) {
      ++count;
      mass += v * v;
    }
  return {alpha, static_cast<double>(count) / grid.size(), mass * grid.weight()};
}

// Localisation ratio of the discrete pair against the discretized measure.
inline double discrete_localisation(const EigenPair& pair, const Grid& grid) {
  const double w = grid.weight();
  const double l1 = pair.u.sum() * w;
  return l1 * l1 / (grid.size() * w * pair.u.squaredNorm() * w);
}

// Level set at alpha* = a^{1/4} |Omega|^{-1/2}, where the fraction is at most a^{1/4}
// and the captured mass at least 1 - a^{1/2}; a and |Omega| are the discrete ones.
inline LevelSetStat critical_level_set(const EigenPair& pair, const Grid& grid) {
  const double a = discrete_localisation(pair, grid);
  return level_set(pair, grid, std::pow(a, 0.25) / std::sqrt(grid.size() * grid.weight()));
}

struct LocalisationSplit {
  double eps = 0.0;
  double lhs = 0.0;  // a
  double rhs = 0.0;  // 2 eps^2 |Omega| + 2 |{u > eps}| / |Omega|

  double margin() const { return rhs - lhs; }
};

// Both sides use the discretized measure N_int h^2 in place of |Omega|, so the
// inequality holds for the discrete sums exactly.
inline LocalisationSplit localisation_split(const EigenPair& pair, const Grid& grid, double measure, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("localisation_split requires eps > 0");
  if (!(measure > 0.0)) throw PreconditionError("measure must be positive");
  const double w = grid.weight();
  const double M = grid.size() * w;
  std::size_t above = 0;
  for (double v : pair.u)
    if (v > eps) ++above;
  LocalisationSplit g;
  g.eps = eps;
  g.lhs = discrete_localisation(pair, grid);
  g.rhs = 2.0 * eps * eps * M + 2.0 * above * w / M;
  return g;
}

}  // namespace effloc
