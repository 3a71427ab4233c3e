#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "storesize/closed_form.hpp"
#include "storesize/spectral.hpp"
#include "support/oracles.hpp"

using namespace storesize;

namespace {
SystemModel model(int n, double chi, double c) {
  return SystemModel::make(n, UserModel::from_chi(chi), c);
}
}  // namespace

TEST_CASE("drift matrix and integer-capacity degeneracy", "[spectral]") {
  const DriftMatrix d = drift_matrix(model(5, 0.5, 2.5));
  REQUIRE(d.diagonal.size() == 6);
  for (int i = 0; i <= 5; ++i)
    CHECK(d.diagonal[i] == Catch::Approx(i - 2.5));

  CHECK_THROWS_AS(drift_matrix(model(5, 0.5, 2.0)), DriftSingularError);
  CHECK_THROWS_AS(drift_matrix(model(5, 0.9, 3.0 + 1e-10)),
                  DriftSingularError);
  CHECK_NOTHROW(drift_matrix(model(5, 0.9, 3.0 + 1e-6)));
}

TEST_CASE("two-user system matches the hand-derived solution", "[spectral]") {
  // N=2, chi=1, C=1.5: single overload state, z = -8/3, and
  // P(S > b) = (4/9) exp(-8b/3).
  const SpectralSolution sol = solve_spectrum(model(2, 1.0, 1.5));
  REQUIRE(sol.num_modes() == 1);
  CHECK(sol.eigenvalues[0] == Catch::Approx(-8.0 / 3.0).epsilon(1e-12));
  for (double b : {0.0, 0.5, 1.0, 2.0, 7.5})
    CHECK(outage_probability(sol, b) ==
          Catch::Approx((4.0 / 9.0) * std::exp(-8.0 * b / 3.0))
              .epsilon(1e-12));
  CHECK(outage_probability(sol, 1.0) ==
        Catch::Approx(0.030881533876800682).epsilon(1e-12));
}

TEST_CASE("one-user spectral solve equals the closed form", "[spectral]") {
  for (double chi : {0.2, 0.5, 1.0, 2.0}) {
    const double p = chi / (1.0 + chi);
    for (double frac : {0.25, 0.55, 0.9}) {
      const double c = p + (1.0 - p) * frac;
      const SpectralSolution sol = solve_spectrum(model(1, chi, c));
      const SingleUserSpectrum ref = single_user_spectrum(chi, c);
      REQUIRE(sol.num_modes() == 1);
      CHECK(sol.eigenvalues[0] == Catch::Approx(ref.z1).epsilon(1e-9));
      for (double b : {0.0, 0.5, 2.0})
        CHECK(outage_probability(sol, b) ==
              Catch::Approx(single_user_outage(chi, c, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("eigenvalues match the independent quadratic-branch oracle",
          "[spectral]") {
  struct Case {
    int n;
    double chi, c;
  };
  for (const Case& t : {Case{5, 0.5, 2.5}, Case{20, 0.5, 8.3},
                        Case{100, 0.5, 36.83}, Case{37, 1.7, 25.4},
                        Case{400, 0.5, 147.32}}) {
    const SpectralSolution sol = solve_spectrum(model(t.n, t.chi, t.c));
    const std::vector<double> ref =
        oracles::negative_eigenvalues(t.n, t.chi, t.c);
    REQUIRE(sol.num_modes() == static_cast<int>(ref.size()));
    REQUIRE(sol.num_modes() ==
            t.n - static_cast<int>(std::ceil(t.c)) + 1);
    for (int k = 0; k < sol.num_modes(); ++k)
      CHECK(sol.eigenvalues[k] ==
            Catch::Approx(ref[k]).epsilon(1e-8));
  }
}

TEST_CASE("large populations stay real and well-conditioned", "[spectral]") {
  const SpectralSolution sol = solve_spectrum(model(800, 0.5, 0.3683 * 800));
  CHECK(sol.num_modes() == 800 - 295 + 1);
  const std::vector<double> ref =
      oracles::negative_eigenvalues(800, 0.5, 0.3683 * 800);
  REQUIRE(static_cast<int>(ref.size()) == sol.num_modes());
  for (int k = 0; k < sol.num_modes(); ++k)
    CHECK(sol.eigenvalues[k] == Catch::Approx(ref[k]).epsilon(1e-8));
  CHECK(sol.boundary_rcond > 1e-12);
  CHECK(std::isfinite(outage_probability(sol, 0.0)));
}

TEST_CASE("outage matches multiprecision reference values", "[spectral]") {
  // References computed independently with >=1000-digit arithmetic: exact
  // binomial stationary law, quadratic-branch eigenvalues, per-mode
  // recurrence eigenvectors, and an iteratively refined boundary solve
  // certified by the empty-store conditions.
  struct Ref {
    int n;
    double chi, c;
    double out0, out1, out5;
  };
  for (const Ref& t : {
           Ref{400, 0.5, 147.32, 0.12478406481340619, 0.056111542695567644,
               0.014306075824655980},
           Ref{400, 0.5, 140.000001, 0.44299743325902591, 0.31649441520846176,
               0.17249455524596619},
           Ref{800, 0.5, 294.64, 0.032966562888739616, 0.011786901538426966,
               0.0023209092989417612},
           Ref{100, 0.5, 35.000001, 0.68467520952077213, 0.53996698047539804,
               0.32505135038492299},
           Ref{200, 4.0, 164.000001, 0.44033861026837067, 0.15307343214102433,
               0.0094488855260629448},
       }) {
    const SpectralSolution sol = solve_spectrum(model(t.n, t.chi, t.c));
    CHECK(outage_probability(sol, 0.0) ==
          Catch::Approx(t.out0).epsilon(1e-9));
    CHECK(outage_probability(sol, 1.0) ==
          Catch::Approx(t.out1).epsilon(1e-9));
    CHECK(outage_probability(sol, 5.0) ==
          Catch::Approx(t.out5).epsilon(1e-9));
  }
}

TEST_CASE("cdf satisfies the boundary and limit conditions", "[spectral]") {
  const SystemModel m = model(20, 0.5, 8.3);
  const SpectralSolution sol = solve_spectrum(m);

  // Overload states are empty-store-impossible: F_j(0) = 0 for j > C.
  const CdfValue at0 = cdf(sol, 0.0);
  for (int j = 9; j <= 20; ++j)
    CHECK(std::abs(at0.by_state[j]) < 1e-12);
  CHECK(at0.total == Catch::Approx(1.0 - outage_probability(sol, 0.0))
                         .epsilon(1e-12));

  // Monotone in x, approaching the stationary law.
  double prev = at0.total;
  for (double x : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    const CdfValue v = cdf(sol, x);
    CHECK(v.total >= prev - 1e-14);
    prev = v.total;
  }
  const CdfValue far = cdf(sol, 200.0);
  CHECK(far.total == Catch::Approx(1.0).epsilon(1e-12));
  for (int j = 0; j <= 20; ++j)
    CHECK(far.by_state[j] == Catch::Approx(sol.pi[j]).margin(1e-12));

  CHECK_THROWS_AS(cdf(sol, -0.5), InvalidConfigError);
}

TEST_CASE("outage is strictly decreasing in b and nonincreasing in capacity",
          "[spectral]") {
  const SpectralSolution sol = solve_spectrum(model(20, 0.5, 8.3));
  double prev = outage_probability(sol, 0.0);
  for (double b = 0.25; b <= 4.0; b += 0.25) {
    const double cur = outage_probability(sol, b);
    CHECK(cur < prev);
    prev = cur;
  }

  double prev_c = 1.0;
  for (double c : {7.3, 8.3, 9.3, 11.3, 14.3}) {
    const double cur =
        outage_probability(solve_spectrum(model(20, 0.5, c)), 1.0);
    CHECK(cur <= prev_c + 1e-15);
    prev_c = cur;
  }
}

TEST_CASE("trivial regime capacity >= N", "[spectral]") {
  for (double c : {20.0, 25.0}) {
    const SpectralSolution sol = solve_spectrum(model(20, 0.5, c));
    CHECK(sol.num_modes() == 0);
    CHECK(outage_probability(sol, 0.0) == 0.0);
    CHECK(outage_probability(sol, 3.0) == 0.0);
    CHECK(cdf(sol, 0.0).total == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("spectral solve validates stability and capacity", "[spectral]") {
  CHECK_THROWS_AS(solve_spectrum(model(6, 1.0, 2.9)), UnstableError);
  CHECK_THROWS_AS(solve_spectrum(model(6, 1.0, 3.0)), UnstableError);
  CHECK_THROWS_AS(solve_spectrum(model(6, 1.0, 4.0)), DriftSingularError);
}

TEST_CASE("capacity mixture averages per-component outage", "[spectral]") {
  const UserModel u = UserModel::from_chi(0.5);
  const double b = 1.0;
  const double o1 = outage_probability(solve_spectrum(model(5, 0.5, 2.3)), b);
  const double o2 = outage_probability(solve_spectrum(model(5, 0.5, 3.7)), b);
  const CapacityMixture mix{{{2.3, 0.25}, {3.7, 0.75}}};
  CHECK(outage_probability_mixture(5, u, mix, b) ==
        Catch::Approx(0.25 * o1 + 0.75 * o2).epsilon(1e-13));

  CHECK_THROWS_AS(
      outage_probability_mixture(5, u, CapacityMixture{}, b),
      InvalidConfigError);
  CHECK_THROWS_AS(
      outage_probability_mixture(5, u, CapacityMixture{{{2.3, 0.5}, {3.7, 0.6}}},
                                 b),
      InvalidConfigError);
  CHECK_THROWS_AS(
      outage_probability_mixture(5, u, CapacityMixture{{{2.3, 0.5}, {-1.0, 0.5}}},
                                 b),
      InvalidConfigError);
  // Unstable component is named in the error.
  try {
    outage_probability_mixture(5, u,
                               CapacityMixture{{{2.3, 0.5}, {1.0, 0.5}}}, b);
    FAIL("expected UnstableError");
  } catch (const UnstableError& e) {
    CHECK(std::string(e.what()).find("component 1") != std::string::npos);
  }
}
