#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "storesize/asymptotic.hpp"

using namespace storesize;

namespace {
SystemModel model(int n, double chi, double c) {
  return SystemModel::make(n, UserModel::from_chi(chi), c);
}
}  // namespace

TEST_CASE("helper terms match high-precision references", "[asymptotic]") {
  // Frozen from a 40-digit arbitrary-precision evaluation of the same
  // expressions at lambda=0.5, sigma=0.3683. f loses ~3 leading digits to
  // cancellation between its log and ratio terms, and g divides by f, so
  // those two (and the outage values below) get tolerances sized for the
  // double-precision error that cancellation leaves behind.
  const AsymptoticParams p = morrison_params(model(400, 0.5, 0.3683 * 400));
  CHECK(p.sigma == Catch::Approx(0.3683).epsilon(1e-14));
  CHECK(p.lam == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(p.upsilon == Catch::Approx(0.3683 - 1.0 / 3.0).epsilon(1e-12));
  CHECK(p.f == Catch::Approx(0.00030145777626563939017).epsilon(1e-11));
  CHECK(p.u == Catch::Approx(0.28482215585120825414).epsilon(1e-13));
  CHECK(p.phi == Catch::Approx(0.11529959987151878358).epsilon(1e-13));
  CHECK(p.k == Catch::Approx(0.69250164437623328217).epsilon(1e-13));
  CHECK(p.psi == Catch::Approx(-0.0008075599671200644002).epsilon(1e-12));
  CHECK(p.g == Catch::Approx(0.11363236385999796936).epsilon(1e-10));
}

TEST_CASE("approximate outage matches high-precision references",
          "[asymptotic]") {
  const SystemModel m = model(400, 0.5, 0.3683 * 400);
  CHECK(asymptotic_outage(m, 0.0) ==
        Catch::Approx(4.8963341641447021e-21).epsilon(1e-10));
  CHECK(asymptotic_outage(m, 1.0) ==
        Catch::Approx(2.4606088952797997e-21).epsilon(1e-10));
  CHECK(asymptotic_outage(m, 5.0) ==
        Catch::Approx(7.6783960062344108e-22).epsilon(1e-10));
}

TEST_CASE("positive and strictly decreasing in x on the figure grid",
          "[asymptotic]") {
  for (int n = 400; n <= 800; n += 100) {
    const AsymptoticParams p = morrison_params(model(n, 0.5, 0.3683 * n));
    double prev = asymptotic_outage(p, 0.0);
    CHECK(prev > 0.0);
    for (double x = 0.5; x <= 15.0; x += 0.5) {
      const double cur = asymptotic_outage(p, x);
      CHECK(cur > 0.0);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("domain errors name the offending term", "[asymptotic]") {
  // lambda = 1 makes u's denominator sigma(1 - lambda) vanish.
  try {
    morrison_params(model(100, 1.0, 60.0));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("u") != std::string::npos);
  }
  // lambda > 1 makes u negative.
  try {
    morrison_params(model(100, 2.0, 70.6));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("u") != std::string::npos);
  }
  // sigma >= 1 is outside the approximation's domain.
  CHECK_THROWS_AS(morrison_params(model(100, 0.5, 120.0)), DomainError);
  // Margin upsilon <= 0 is an unstable configuration.
  CHECK_THROWS_AS(morrison_params(model(100, 0.5, 30.0)), UnstableError);
  CHECK_THROWS_AS(
      asymptotic_outage(morrison_params(model(400, 0.5, 147.32)), -1.0),
      InvalidConfigError);
}
