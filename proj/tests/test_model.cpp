#include <catch2/catch_amalgamated.hpp>

#include "storesize/model.hpp"
#include "support/oracles.hpp"

using namespace storesize;

TEST_CASE("user model from chi and from p are consistent", "[model]") {
  const UserModel u = UserModel::from_chi(0.5);
  CHECK(u.p == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
  const UserModel v = UserModel::from_on_probability(u.p);
  CHECK(v.chi == Catch::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(UserModel::from_chi(0.0), InvalidConfigError);
  CHECK_THROWS_AS(UserModel::from_chi(-1.0), InvalidConfigError);
  CHECK_THROWS_AS(UserModel::from_on_probability(0.0), InvalidConfigError);
  CHECK_THROWS_AS(UserModel::from_on_probability(1.0), InvalidConfigError);
}

TEST_CASE("system model validation and stability", "[model]") {
  const UserModel u = UserModel::from_chi(0.5);
  CHECK_THROWS_AS(SystemModel::make(0, u, 1.0), InvalidConfigError);
  CHECK_THROWS_AS(SystemModel::make(5, u, 0.0), InvalidConfigError);

  const SystemModel m = SystemModel::make(5, u, 2.5);
  CHECK(m.mean_demand() == Catch::Approx(5.0 / 3.0));
  CHECK(m.stable());
  CHECK_NOTHROW(m.require_stable());

  const SystemModel tight = SystemModel::make(5, u, m.mean_demand());
  CHECK_FALSE(tight.stable());
  CHECK_THROWS_AS(tight.require_stable(), UnstableError);

  const SystemModel overloaded = SystemModel::make(5, u, 1.2);
  CHECK_FALSE(overloaded.stable());

  CHECK(capacity_headroom(m) == Catch::Approx(0.5 - 1.0 / 3.0));
}

TEST_CASE("generator matrix has birth-death structure", "[model]") {
  const SystemModel m = SystemModel::make(4, UserModel::from_chi(0.7), 2.3);
  const Eigen::MatrixXd g = build_generator(m).entries;
  REQUIRE(g.rows() == 5);
  REQUIRE(g.cols() == 5);
  for (int i = 0; i <= 4; ++i) {
    CHECK(std::abs(g.row(i).sum()) < 1e-14);
    if (i < 4) CHECK(g(i, i + 1) == Catch::Approx((4 - i) * 0.7));
    if (i > 0) CHECK(g(i, i - 1) == Catch::Approx(double(i)));
    for (int j = 0; j <= 4; ++j)
      if (std::abs(i - j) > 1) CHECK(g(i, j) == 0.0);
  }
}

TEST_CASE("stationary distribution matches independent null-space solve",
          "[model]") {
  const SystemModel m = SystemModel::make(5, UserModel::from_chi(0.5), 2.5);
  const Eigen::VectorXd pi = stationary_distribution(m);
  const Eigen::VectorXd ref = oracles::stationary_nullspace(m);
  REQUIRE(pi.size() == ref.size());
  for (int i = 0; i < pi.size(); ++i)
    CHECK(pi[i] == Catch::Approx(ref[i]).margin(1e-10).epsilon(1e-10));
  CHECK(pi.sum() == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("stationary distribution solves pi*M = 0", "[model]") {
  for (int n : {2, 5, 20, 100, 800}) {
    const SystemModel m =
        SystemModel::make(n, UserModel::from_chi(0.5), 0.5 * n);
    const Eigen::VectorXd pi = stationary_distribution(m);
    const Eigen::MatrixXd g = build_generator(m).entries;
    const double resid = (pi.transpose() * g).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-12 * n);
    CHECK(pi.sum() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(pi.minCoeff() >= 0.0);
  }
}

TEST_CASE("log-domain tails keep relative accuracy", "[model]") {
  const SystemModel m =
      SystemModel::make(800, UserModel::from_chi(0.5), 300.0);
  const Eigen::VectorXd logpi = log_stationary_distribution(m);
  // Direct recursion pi_{i+1}/pi_i = (N-i) chi / (i+1) in log space.
  double acc = logpi[0];
  for (int i = 0; i < 800; ++i) {
    acc += std::log((800.0 - i) * 0.5 / (i + 1.0));
    CHECK(logpi[i + 1] == Catch::Approx(acc).margin(1e-8));
  }
  CHECK(logpi[800] < -700.0);  // far underflowed in linear space
}

TEST_CASE("physical unit conversions", "[model]") {
  const PhysicalUnits units = PhysicalUnits::make(10.0, 0.5);
  CHECK(from_normalized_storage(units, 9.0) == Catch::Approx(45.0));
  CHECK(to_normalized_storage(units, 45.0) == Catch::Approx(9.0));
  const SystemModel m =
      to_normalized(units, 400, UserModel::from_chi(0.5), 1473.2);
  CHECK(m.capacity == Catch::Approx(147.32));
  CHECK_THROWS_AS(PhysicalUnits::make(0.0, 1.0), InvalidConfigError);
  CHECK_THROWS_AS(PhysicalUnits::make(1.0, -2.0), InvalidConfigError);
}
