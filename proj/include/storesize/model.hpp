#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "storesize/errors.hpp"

namespace storesize {

// One consumer alternating between Off and On. Time is measured in units of
// the mean On duration, power in units of the per-user On draw, so the
// Off->On rate chi is the only free parameter and the On->Off rate is 1.
struct UserModel {
  double chi;  // Off->On transition rate
  double p;    // stationary probability of being On, chi / (1 + chi)

  static UserModel from_chi(double chi) {
    if (!(chi > 0.0) || !std::isfinite(chi))
      throw InvalidConfigError("chi must be positive and finite, got " +
                               std::to_string(chi));
    return UserModel{chi, chi / (1.0 + chi)};
  }

  static UserModel from_on_probability(double p) {
    if (!(p > 0.0) || !(p < 1.0))
      throw InvalidConfigError("on-probability must lie in (0,1), got " +
                               std::to_string(p));
    return UserModel{p / (1.0 - p), p};
  }
};

// N statistically identical users sharing a grid connection of capacity C
// (in per-user peak-demand units). The occupancy process (number of users
// On) is a birth-death chain on {0,...,N}; demand above C is served from
// the shared store.
struct SystemModel {
  int n_users;
  UserModel user;
  double capacity;

  static SystemModel make(int n_users, UserModel user, double capacity) {
    if (n_users < 1)
      throw InvalidConfigError("n_users must be >= 1, got " +
                               std::to_string(n_users));
    if (!std::isfinite(capacity) || capacity <= 0.0)
      throw InvalidConfigError("capacity must be positive and finite, got " +
                               std::to_string(capacity));
    return SystemModel{n_users, user, capacity};
  }

  double mean_demand() const { return n_users * user.p; }
  bool stable() const { return mean_demand() < capacity; }

  void require_stable() const {
    if (!stable())
      throw UnstableError("mean demand " + std::to_string(mean_demand()) +
                          " is not below capacity " + std::to_string(capacity));
  }
};

// Conversion factors between normalized and physical quantities.
struct PhysicalUnits {
  double rp_kw;          // per-user On draw, kW
  double mean_on_hours;  // mean On duration, hours

  static PhysicalUnits make(double rp_kw, double mean_on_hours) {
    if (!(rp_kw > 0.0) || !std::isfinite(rp_kw))
      throw InvalidConfigError("rp_kw must be positive");
    if (!(mean_on_hours > 0.0) || !std::isfinite(mean_on_hours))
      throw InvalidConfigError("mean_on_hours must be positive");
    return PhysicalUnits{rp_kw, mean_on_hours};
  }
};

inline SystemModel to_normalized(const PhysicalUnits& units, int n_users,
                                 UserModel user, double grid_kw) {
  return SystemModel::make(n_users, user, grid_kw / units.rp_kw);
}

inline double from_normalized_storage(const PhysicalUnits& units,
                                      double b_norm) {
  return b_norm * units.rp_kw * units.mean_on_hours;
}

inline double to_normalized_storage(const PhysicalUnits& units,
                                    double b_kwh) {
  return b_kwh / (units.rp_kw * units.mean_on_hours);
}

// Generator of the occupancy birth-death chain: from state i, up-rate
// (N-i)*chi and down-rate i.
struct GeneratorMatrix {
  Eigen::MatrixXd entries;  // (N+1) x (N+1), rows sum to zero
};

inline GeneratorMatrix build_generator(const SystemModel& m) {
  const int n = m.n_users;
  const double chi = m.user.chi;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    const double up = (n - i) * chi;
    const double down = i;
    if (i < n) g(i, i + 1) = up;
    if (i > 0) g(i, i - 1) = down;
    g(i, i) = -(up + down);
  }
  return GeneratorMatrix{std::move(g)};
}

// log Binomial(n, p) pmf at i, computed in the log domain so that entries
// far in the tails keep meaningful relative accuracy.
inline double log_binomial_pmf(int n, double p, int i) {
  return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
         std::lgamma(n - i + 1.0) + i * std::log(p) +
         (n - i) * std::log1p(-p);
}

inline Eigen::VectorXd log_stationary_distribution(const SystemModel& m) {
  Eigen::VectorXd logpi(m.n_users + 1);
  for (int i = 0; i <= m.n_users; ++i)
    logpi[i] = log_binomial_pmf(m.n_users, m.user.p, i);
  return logpi;
}

// Stationary occupancy distribution, Binomial(N, p). Built by the
// multiplicative recurrence outward from the mode: every intermediate
// product stays <= 1 (no overflow for any N, chi) and entries keep a few
// ulps of relative accuracy, where exponentiated log-gamma sums level off
// near 1e-12 for large N.
inline Eigen::VectorXd stationary_distribution(const SystemModel& m) {
  const int n = m.n_users;
  const double chi = m.user.chi;
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n + 1);
  const int mode =
      std::min(n, static_cast<int>(static_cast<double>(n + 1) * m.user.p));
  pi[mode] = 1.0;
  for (int j = mode; j < n; ++j)
    pi[j + 1] = pi[j] * (static_cast<double>(n - j) * chi /
                         static_cast<double>(j + 1));
  for (int j = mode; j > 0; --j)
    pi[j - 1] = pi[j] * (static_cast<double>(j) /
                         (static_cast<double>(n - j + 1) * chi));
  pi /= pi.sum();
  return pi;
}

// Per-user capacity margin above the mean load, C/N - p.
inline double capacity_headroom(const SystemModel& m) {
  return m.capacity / m.n_users - m.user.p;
}

}  // namespace storesize
