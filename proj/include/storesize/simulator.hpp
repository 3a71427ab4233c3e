#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "storesize/errors.hpp"
#include "storesize/model.hpp"
#include "storesize/parallel.hpp"
#include "storesize/spectral.hpp"

namespace storesize {

enum class SimMetric { backlog_exceedance, loss_fraction };

// Monte Carlo scenario. A replication simulates the occupancy jump chain
// for `horizon` normalized time units, discards [0, warmup) from the
// metric, and the across-replication spread gives the confidence interval.
struct SimConfig {
  SystemModel model;
  double b = 0.0;
  double horizon = 0.0;
  double warmup = 0.0;
  int replications = 0;
  std::uint64_t seed = 0;
  SimMetric metric = SimMetric::backlog_exceedance;

  void validate() const {
    if (!(warmup >= 0.0) || !(horizon > warmup))
      throw InvalidConfigError("require horizon > warmup >= 0");
    if (replications < 2)
      throw InvalidConfigError("replications must be >= 2");
    if (!(b >= 0.0)) throw InvalidConfigError("threshold b must be >= 0");
  }
};

struct SimEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int replications = 0;
  double total_sim_time = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream splitting rule: replication r of a run with master seed s uses an
// mt19937_64 engine seeded with splitmix64(s ^ splitmix64(r + 1)), giving
// independent, platform-stable per-replication streams.
inline std::mt19937_64 replication_rng(std::uint64_t seed, int rep) {
  return std::mt19937_64(
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(rep) + 1)));
}

// Uniform in (0,1) and unit-rate exponential built directly on the raw
// 64-bit stream, so results do not depend on a library's distribution
// implementation.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& rng) {
  return -std::log(uniform01(rng));
}

inline int sample_binomial(int n, double p, std::mt19937_64& rng) {
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (uniform01(rng) < p) ++k;
  return k;
}

// Length of [a,b) clipped to [lo,hi).
inline double overlap(double a, double b, double lo, double hi) {
  const double l = std::max(a, lo), r = std::min(b, hi);
  return r > l ? r - l : 0.0;
}

// One replication of the infinite-buffer backlog process; returns the
// time fraction with S > b inside the measurement window.
inline double run_backlog(const SimConfig& cfg, std::mt19937_64 rng) {
  const int n = cfg.model.n_users;
  const double chi = cfg.model.user.chi;
  const double cap = cfg.model.capacity;
  const double b = cfg.b;
  int state = sample_binomial(n, cfg.model.user.p, rng);
  double s = 0.0, t = 0.0, above = 0.0;
  while (t < cfg.horizon) {
    const double up = (n - state) * chi;
    const double rate = up + state;
    const double dt = exponential(rng) / rate;
    const double tnext = t + dt;
    const double d = state - cap;
    double ta = tnext, tb = tnext;  // empty by default
    if (d > 0.0) {
      if (s > b) {
        ta = t;
      } else if (s + d * dt > b) {
        ta = t + (b - s) / d;
      }
      s += d * dt;
    } else if (d < 0.0) {
      if (s > b) {
        ta = t;
        tb = std::min(tnext, t + (s - b) / (-d));
      }
      s = std::max(0.0, s + d * dt);
    } else if (s > b) {
      ta = t;
    }
    above += overlap(ta, tb, cfg.warmup, cfg.horizon);
    t = tnext;
    state += uniform01(rng) < up / rate ? 1 : -1;
  }
  return above / (cfg.horizon - cfg.warmup);
}

// One replication of the finite store E in [0, b], starting full; returns
// unserved energy / total demand inside the measurement window.
inline double run_loss(const SimConfig& cfg, std::mt19937_64 rng) {
  const int n = cfg.model.n_users;
  const double chi = cfg.model.user.chi;
  const double cap = cfg.model.capacity;
  const double b = cfg.b;
  int state = sample_binomial(n, cfg.model.user.p, rng);
  double e = b, t = 0.0, unserved = 0.0, demand = 0.0;
  while (t < cfg.horizon) {
    const double up = (n - state) * chi;
    const double rate = up + state;
    const double dt = exponential(rng) / rate;
    const double tnext = t + dt;
    const double d = state - cap;
    demand += state * overlap(t, tnext, cfg.warmup, cfg.horizon);
    if (d > 0.0) {
      const double t_empty = t + e / d;
      unserved += d * overlap(t_empty, tnext, cfg.warmup, cfg.horizon);
      e = std::max(0.0, e - d * dt);
    } else if (d < 0.0) {
      e = std::min(b, e + (-d) * dt);
    }
    t = tnext;
    state += uniform01(rng) < up / rate ? 1 : -1;
  }
  return demand > 0.0 ? unserved / demand : 0.0;
}

inline SimEstimate aggregate(const std::vector<double>& values,
                             const SimConfig& cfg) {
  SimEstimate est;
  est.replications = static_cast<int>(values.size());
  est.seed = cfg.seed;
  est.total_sim_time = cfg.horizon * est.replications;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / est.replications;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  est.stderr_ = std::sqrt(ss / (est.replications - 1.0) / est.replications);
  est.ci_lo = est.mean - 1.96 * est.stderr_;
  est.ci_hi = est.mean + 1.96 * est.stderr_;
  return est;
}

}  // namespace detail

inline SimEstimate simulate_outage(const SimConfig& cfg) {
  cfg.validate();
  cfg.model.require_stable();
  std::vector<double> vals(cfg.replications);
  parallel_for(cfg.replications, [&](int r) {
    vals[r] = detail::run_backlog(cfg, detail::replication_rng(cfg.seed, r));
  });
  return detail::aggregate(vals, cfg);
}

inline SimEstimate simulate_loss_fraction(const SimConfig& cfg) {
  cfg.validate();
  std::vector<double> vals(cfg.replications);
  parallel_for(cfg.replications, [&](int r) {
    vals[r] = detail::run_loss(cfg, detail::replication_rng(cfg.seed, r));
  });
  return detail::aggregate(vals, cfg);
}

inline SimEstimate simulate(const SimConfig& cfg) {
  return cfg.metric == SimMetric::backlog_exceedance
             ? simulate_outage(cfg)
             : simulate_loss_fraction(cfg);
}

// Time fraction spent in each occupancy state, one estimate per state;
// validates the jump chain against the Binomial stationary law.
inline std::vector<SimEstimate> simulate_occupancy(const SimConfig& cfg) {
  cfg.validate();
  const int n = cfg.model.n_users;
  const double chi = cfg.model.user.chi;
  const double span = cfg.horizon - cfg.warmup;
  std::vector<std::vector<double>> vals(n + 1,
                                        std::vector<double>(cfg.replications));
  parallel_for(cfg.replications, [&](int r) {
    std::mt19937_64 rng = detail::replication_rng(cfg.seed, r);
    int state = detail::sample_binomial(n, cfg.model.user.p, rng);
    std::vector<double> occ(n + 1, 0.0);
    double t = 0.0;
    while (t < cfg.horizon) {
      const double up = (n - state) * chi;
      const double rate = up + state;
      const double tnext = t + detail::exponential(rng) / rate;
      occ[state] += detail::overlap(t, tnext, cfg.warmup, cfg.horizon);
      t = tnext;
      state += detail::uniform01(rng) < up / rate ? 1 : -1;
    }
    for (int i = 0; i <= n; ++i) vals[i][r] = occ[i] / span;
  });
  std::vector<SimEstimate> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = detail::aggregate(vals[i], cfg);
  return out;
}

// Side-by-side exact vs simulated outage, used as the cross-validation
// harness. A row is flagged when the analytic value falls more than three
// standard errors from the simulated mean.
struct ComparisonRow {
  SystemModel model;
  double b = 0.0;
  double analytic = 0.0;
  double sim_mean = 0.0;
  double sim_stderr = 0.0;
  double zscore = 0.0;
  bool flagged = false;
};

inline std::vector<ComparisonRow> compare_exact_vs_sim(
    const std::vector<SimConfig>& cases) {
  std::vector<ComparisonRow> rows;
  rows.reserve(cases.size());
  for (const SimConfig& cfg : cases) {
    ComparisonRow row;
    row.model = cfg.model;
    row.b = cfg.b;
    row.analytic = outage_probability(solve_spectrum(cfg.model), cfg.b);
    const SimEstimate est = simulate_outage(cfg);
    row.sim_mean = est.mean;
    row.sim_stderr = est.stderr_;
    if (est.stderr_ > 0.0) {
      row.zscore = (est.mean - row.analytic) / est.stderr_;
    } else {
      row.zscore = est.mean == row.analytic
                       ? 0.0
                       : std::numeric_limits<double>::infinity();
    }
    row.flagged = std::abs(row.zscore) > 3.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace storesize
