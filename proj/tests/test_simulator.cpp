#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "storesize/simulator.hpp"
#include "storesize/spectral.hpp"

using namespace storesize;

namespace {
SystemModel model(int n, double chi, double c) {
  return SystemModel::make(n, UserModel::from_chi(chi), c);
}

SimConfig config(SystemModel m, double b, double horizon, int reps,
                 std::uint64_t seed) {
  return SimConfig{m, b, horizon, 1e3, reps, seed,
                   SimMetric::backlog_exceedance};
}
}  // namespace

TEST_CASE("config validation", "[simulator]") {
  const SystemModel m = model(2, 1.0, 1.5);
  CHECK_THROWS_AS(simulate_outage(config(m, 1.0, 1e3, 1, 1)),
                  InvalidConfigError);  // replications < 2
  CHECK_THROWS_AS(simulate_outage(config(m, 1.0, 10.0, 2, 1)),
                  InvalidConfigError);  // horizon <= warmup
  CHECK_THROWS_AS(simulate_outage(config(m, -1.0, 1e4, 2, 1)),
                  InvalidConfigError);
  CHECK_THROWS_AS(simulate_outage(config(model(2, 1.0, 0.9), 1.0, 1e4, 2, 1)),
                  UnstableError);
}

TEST_CASE("reproducible given the seed, sensitive to it", "[simulator]") {
  const SimConfig cfg = config(model(5, 0.5, 2.5), 0.5, 5e3, 6, 42);
  const SimEstimate a = simulate_outage(cfg);
  const SimEstimate b = simulate_outage(cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);

  SimConfig other = cfg;
  other.seed = 43;
  const SimEstimate c = simulate_outage(other);
  CHECK(c.mean != a.mean);
  // Different seeds agree within mutual 3 stderr.
  const double spread = 3.0 * std::sqrt(a.stderr_ * a.stderr_ +
                                        c.stderr_ * c.stderr_);
  CHECK(std::abs(a.mean - c.mean) <= spread);

  CHECK(a.replications == 6);
  CHECK(a.total_sim_time == Catch::Approx(6 * 5e3));
  CHECK(a.seed == 42);
  CHECK(a.ci_lo <= a.mean);
  CHECK(a.mean <= a.ci_hi);
  CHECK(a.stderr_ >= 0.0);
}

TEST_CASE("hand-derived anchor within three standard errors", "[simulator]") {
  // Exact: P(S > 1) = (4/9) exp(-8/3) at N=2, chi=1, C=1.5.
  const double exact = (4.0 / 9.0) * std::exp(-8.0 / 3.0);
  const SimEstimate est =
      simulate_outage(config(model(2, 1.0, 1.5), 1.0, 2e5, 20, 20260815));
  CHECK(std::abs(est.mean - exact) <= 3.0 * est.stderr_);
  CHECK(est.stderr_ < 0.1 * exact);  // tight enough to be meaningful
}

TEST_CASE("busy probability at b=0 matches the spectral solver",
          "[simulator]") {
  const SystemModel m = model(5, 0.5, 2.5);
  const double exact = outage_probability(solve_spectrum(m), 0.0);
  const SimEstimate est = simulate_outage(config(m, 0.0, 5e4, 12, 7));
  CHECK(std::abs(est.mean - exact) <= 3.0 * est.stderr_);
}

TEST_CASE("capacity at or above N gives exactly zero", "[simulator]") {
  const SimEstimate est =
      simulate_outage(config(model(4, 0.5, 4.0), 0.0, 5e3, 4, 3));
  CHECK(est.mean == 0.0);
  CHECK(est.stderr_ == 0.0);
  SimConfig cfg = config(model(4, 0.5, 4.0), 0.0, 5e3, 4, 3);
  cfg.metric = SimMetric::loss_fraction;
  CHECK(simulate_loss_fraction(cfg).mean == 0.0);
}

TEST_CASE("state occupancy follows the stationary binomial", "[simulator]") {
  const SystemModel m = model(5, 0.5, 2.5);
  const Eigen::VectorXd pi = stationary_distribution(m);
  const auto occ = simulate_occupancy(config(m, 0.0, 2e4, 10, 99));
  REQUIRE(occ.size() == 6);
  double total = 0.0;
  for (int i = 0; i <= 5; ++i) {
    total += occ[i].mean;
    CHECK(std::abs(occ[i].mean - pi[i]) <=
          3.0 * std::max(occ[i].stderr_, 1e-12));
  }
  CHECK(total == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss fraction shrinks with storage and vanishes for huge stores",
          "[simulator]") {
  SimConfig cfg = config(model(5, 0.5, 2.5), 0.0, 2e4, 8, 11);
  cfg.metric = SimMetric::loss_fraction;
  const double none = simulate_loss_fraction(cfg).mean;
  cfg.b = 2.0;
  const double some = simulate_loss_fraction(cfg).mean;
  cfg.b = 60.0;
  const double lots = simulate_loss_fraction(cfg).mean;
  CHECK(none > some);
  CHECK(some > lots);
  CHECK(lots == 0.0);  // a 60-unit store is never drained over this horizon
  CHECK(none < 1.0);
  CHECK(none > 0.0);
}

TEST_CASE("loss fraction runs on unstable models too", "[simulator]") {
  SimConfig cfg = config(model(5, 2.0, 2.8), 1.0, 5e3, 4, 5);
  cfg.metric = SimMetric::loss_fraction;
  const SimEstimate est = simulate_loss_fraction(cfg);
  CHECK(est.mean > 0.0);
  CHECK(est.mean < 1.0);
}

TEST_CASE("comparison table cross-validates and flags outliers",
          "[simulator]") {
  std::vector<SimConfig> cases;
  for (double b : {0.0, 1.0})
    cases.push_back(config(model(5, 0.5, 2.5), b, 2e4, 10, 17));
  const auto rows = compare_exact_vs_sim(cases);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(std::abs(row.zscore) <= 3.0);
    CHECK_FALSE(row.flagged);
    CHECK(row.analytic > 0.0);
    CHECK(row.sim_stderr > 0.0);
  }
  // Same seed, same table.
  const auto again = compare_exact_vs_sim(cases);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].sim_mean == again[i].sim_mean);
    CHECK(rows[i].zscore == again[i].zscore);
  }
}
