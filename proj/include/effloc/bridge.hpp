#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "effloc/error.hpp"
#include "effloc/geometry.hpp"
#include "json.hpp"

namespace effloc {

//---------------------------------------------------------------------------//
// Philox4x32-10 counter-based generator
//---------------------------------------------------------------------------//

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter c, Key k) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += W0;
        k[1] += W1;
      }
      const std::uint64_t p0 = std::uint64_t(M0) * c[0];
      const std::uint64_t p1 = std::uint64_t(M1) * c[2];
      c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
    }
    return c;
  }
};

// Stream of uniforms and normals for one path: key = seed, counter = (block, 0, path).
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, path_(path) {}

  // Uniform on (0, 1).
  double uniform() {
    if (pos_ == 4) refill();
    const std::uint64_t a = buf_[pos_++];
    if (pos_ == 4) refill();
    const std::uint64_t b = buf_[pos_++];
    return ((a >> 5) * 67108864.0 + (b >> 6) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller, both outputs used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  void refill() {
    buf_ = Philox4x32::block({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(path_),
                              std::uint32_t(path_ >> 32)},
                             key_);
    ++block_;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

//---------------------------------------------------------------------------//
// Bridge sampling
//---------------------------------------------------------------------------//

// Brownian motion with generator Delta: each coordinate has variance 2 tau at time tau.
struct BridgeConfig {
  double t = 1.0;
  int steps = 1024;  // S, a power of two
  long long samples = 100000;
  std::uint64_t seed = 1;
  int dim = 2;
};

inline void validate(const BridgeConfig& c) {
  if (!(c.t > 0.0)) throw PreconditionError("bridge time must be positive");
  if (c.steps < 64 || (c.steps & (c.steps - 1)) != 0)
    throw PreconditionError("steps must be a power of two and at least 64");
  if (c.samples < 1000) throw PreconditionError("at least 1000 samples are required");
  if (c.dim < 1) throw PreconditionError("dimension must be positive");
}

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double survival = 0.0;  // fraction of surviving paths
  long long samples = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  std::string note;
};

inline nlohmann::json to_json(const MCEstimate& e) {
  return {{"seed", e.seed}, {"N", e.samples}, {"S", e.steps},      {"mean", e.mean},
          {"stderr", e.stderr_}, {"t", e.t},  {"survival", e.survival}, {"note", e.note}};
}

namespace detail {

inline int worker_count() {
  if (const char* env = std::getenv("EFFLOC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(path) -> integer for paths [0, n) on the worker pool; the sum is exact
// and therefore independent of the partition.
template <class Body>
long long parallel_count(long long n, Body body) {
  const int workers = static_cast<int>(std::min<long long>(worker_count(), std::max(1LL, n / 1024)));
  std::vector<long long> partial(workers, 0);
  auto run = [&](int w) {
    const long long lo = n * w / workers, hi = n * (w + 1) / workers;
    long long acc = 0;
    for (long long p = lo; p < hi; ++p) acc += body(p);
    partial[w] = acc;
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  long long total = 0;
  for (long long v : partial) total += v;
  return total;
}

// Fills x[0..S] (x[0] = x[S] = 0) with one coordinate of a bridge on [0, t] by
// dyadic midpoint refinement. Calls visit(k) for each new index, coarse to fine, and
// stops early if visit returns false.
template <class Visit>
bool build_bridge(std::vector<double>& x, int S, double dt, PathStream& rng, Visit visit) {
  x[0] = 0.0;
  x[S] = 0.0;
  for (int len = S; len >= 2; len /= 2) {
    const double sd = std::sqrt(0.5 * len * dt);
    for (int a = 0; a < S; a += len) {
      const int mid = a + len / 2;
      x[mid] = 0.5 * (x[a] + x[a + len]) + sd * rng.normal();
      if (!visit(mid)) return false;
    }
  }
  return true;
}

}  // namespace detail

// One coordinate of the bridge x(0) = x(t) = 0 sampled at t k / S.
inline std::vector<double> sample_bridge_path(double t, int S, std::uint64_t seed, std::uint64_t path) {
  if (S < 2 || (S & (S - 1)) != 0) throw PreconditionError("steps must be a power of two");
  std::vector<double> x(S + 1);
  PathStream rng(seed, path);
  detail::build_bridge(x, S, t / S, rng, [](int) { return true; });
  return x;
}

// Continuous maximum of the pinned bridge between grid values a and b over a step of
// length dt: P(M <= y) = 1 - exp(-(y - a)(y - b)/dt).
inline double segment_maximum(double a, double b, double dt, double u) {
  return 0.5 * (a + b + std::sqrt((b - a) * (b - a) - 4.0 * dt * std::log(u)));
}

struct BridgeMaxSample {
  std::vector<double> maxima;  // in path order
  double ks_distance = 0.0;    // against 1 - exp(-xi^2/t)
};

inline double bridge_max_cdf(double xi, double t) { return xi <= 0.0 ? 0.0 : 1.0 - std::exp(-xi * xi / t); }

inline double ks_distance(std::vector<double> sample, double t) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = bridge_max_cdf(sample[i], t);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

// Maxima of N bridges x(0) = x(t) = 0: the S-point skeleton is exact and the maximum
// inside each step is drawn from its conditional law, so the result has the exact law.
inline BridgeMaxSample sample_bridge_max(double t, long long N, int S, std::uint64_t seed) {
  validate(BridgeConfig{t, S, N, seed, 1});
  BridgeMaxSample out;
  out.maxima.assign(static_cast<std::size_t>(N), 0.0);
  const double dt = t / S;
  detail::parallel_count(N, [&](long long p) {
    std::vector<double> x(S + 1);
    PathStream rng(seed, static_cast<std::uint64_t>(p));
    detail::build_bridge(x, S, dt, rng, [](int) { return true; });
    double m = 0.0;
    for (int k = 0; k < S; ++k) m = std::max(m, segment_maximum(x[k], x[k + 1], dt, rng.uniform()));
    out.maxima[static_cast<std::size_t>(p)] = m;
    return 0LL;
  });
  out.ks_distance = ks_distance(out.maxima, t);
  return out;
}

// Shift of the boundary that matches discrete monitoring at S steps to continuous
// monitoring to leading order: 0.5826 sqrt(2 t / S).
inline double discrete_monitoring_shift(double t, int S) {
  return 0.5825971579390106 * std::sqrt(2.0 * t / S);
}

// p(x, x; t) = (4 pi t)^{-m/2} P(bridge from x to x stays inside), with the inside
// test applied at the S + 1 dyadic times only (biased upwards).
template <class Inside>
  requires std::predicate<Inside&, Point>
MCEstimate mc_heat_diag(Inside inside, Point x, const BridgeConfig& cfg) {
  validate(cfg);
  if (cfg.dim != 2) throw PreconditionError("Monte Carlo heat kernel requires m = 2");
  if (!inside(x)) throw PreconditionError("starting point lies outside the domain");
  const int S = cfg.steps;
  const double dt = cfg.t / S;
  const long long alive = detail::parallel_count(cfg.samples, [&](long long p) -> long long {
    std::vector<double> bx(S + 1), by(S + 1);
    PathStream rng(cfg.seed, static_cast<std::uint64_t>(p));
    // Coordinates are refined together so the check can stop at the coarsest exit.
    bx[0] = bx[S] = by[0] = by[S] = 0.0;
    for (int len = S; len >= 2; len /= 2) {
      const double sd = std::sqrt(0.5 * len * dt);
      for (int a = 0; a < S; a += len) {
        const int mid = a + len / 2;
        bx[mid] = 0.5 * (bx[a] + bx[a + len]) + sd * rng.normal();
        by[mid] = 0.5 * (by[a] + by[a + len]) + sd * rng.normal();
        if (!inside(Point{x.x + bx[mid], x.y + by[mid]})) return 0;
      }
    }
    return 1;
  });
  const double n = static_cast<double>(cfg.samples);
  const double p = alive / n;
  const double scale = 1.0 / (4.0 * std::numbers::pi * cfg.t);
  MCEstimate e;
  e.survival = p;
  e.mean = scale * p;
  e.stderr_ = scale * std::sqrt(p * (1.0 - p) * n / (n - 1.0)) / std::sqrt(n);
  e.samples = cfg.samples;
  e.steps = S;
  e.seed = cfg.seed;
  e.t = cfg.t;
  e.note = "inside test at " + std::to_string(S + 1) +
           " dyadic times only; over-estimates continuous survival";
  return e;
}

inline MCEstimate mc_heat_diag(const Domain& d, Point x, const BridgeConfig& cfg) {
  validate(d);
  if (dimension(d) != 2) throw PreconditionError("Monte Carlo heat kernel requires m = 2");
  if (!contains(d, x)) throw PreconditionError("starting point lies outside the domain");
  return mc_heat_diag([&](Point p) { return contains(d, p); }, x, cfg);
}

}  // namespace effloc
