#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "storesize/errors.hpp"
#include "storesize/model.hpp"

namespace storesize {

// Large-population approximation of the outage probability. sigma is the
// grid power per user C/N, lam the per-user request rate, upsilon the
// capacity margin per user above mean demand. The remaining fields are the
// helper terms of the approximation, cached so repeated evaluations in x
// are cheap. The helper expressions are deliberately kept in this exact
// arrangement, including the canceling pair of sigma*log(sigma) terms in
// phi and the trailing (1 - sigma) factor in g; do not simplify or "fix"
// them, downstream results are pinned to this form.
struct AsymptoticParams {
  int n_users = 0;
  double sigma = 0.0;
  double lam = 0.0;
  double upsilon = 0.0;
  double f = 0.0;
  double u = 0.0;
  double phi = 0.0;
  double g = 0.0;
  double k = 0.0;
  double psi = 0.0;
};

inline AsymptoticParams morrison_params(const SystemModel& m) {
  AsymptoticParams p;
  p.n_users = m.n_users;
  p.lam = m.user.chi;
  p.sigma = m.capacity / m.n_users;
  p.upsilon = p.sigma - p.lam / (1.0 + p.lam);
  const double sigma = p.sigma, lam = p.lam;
  if (!(sigma > 0.0) || !(sigma < 1.0))
    throw DomainError("sigma = " + std::to_string(sigma) +
                      " outside (0,1); the large-N approximation needs a "
                      "fractional per-user capacity");
  if (!(p.upsilon > 0.0))
    throw UnstableError("per-user capacity margin upsilon = " +
                        std::to_string(p.upsilon) + " is not positive");

  const double mix = sigma + lam * (1.0 - sigma);  // recurring denominator
  p.f = std::log(sigma / (lam * (1.0 - sigma))) -
        2.0 * (sigma * (1.0 + lam) - lam) / mix;
  if (lam == 1.0 || !(sigma * (1.0 - lam) != 0.0))
    throw DomainError("u: denominator sigma*(1-lambda) vanishes at lambda=1");
  p.u = (sigma * (1.0 + lam) - lam) / (sigma * (1.0 - lam));
  if (!(p.u > 0.0) || !std::isfinite(p.u))
    throw DomainError("u = " + std::to_string(p.u) +
                      " is not positive; approximation undefined for "
                      "lambda > 1");
  if (!(p.f > 0.0) || !std::isfinite(p.f))
    throw DomainError("f = " + std::to_string(p.f) + " is not positive");
  p.phi = sigma * std::log(sigma) + (1.0 - sigma) * std::log(1.0 - sigma) -
          sigma * std::log(sigma) + std::log(1.0 + lam);
  p.k = (1.0 - lam) + lam * (1.0 - 2.0 * sigma) / mix;
  p.psi = (2.0 * sigma - 1.0) * std::pow(sigma * (1.0 + lam) - lam, 3) /
          (sigma * std::pow(1.0 - sigma, 2) * std::pow(mix, 3));
  p.g = p.k + 0.5 * mix * p.psi * (1.0 - sigma) / p.f;
  if (!std::isfinite(p.phi) || !std::isfinite(p.g))
    throw DomainError("g: helper terms are not finite");
  return p;
}

// Approximate P(S > x). Not clamped: for small N the approximation can
// exceed 1.
inline double asymptotic_outage(const AsymptoticParams& p, double x) {
  if (!(x >= 0.0)) throw InvalidConfigError("storage level x must be >= 0");
  const double mix = p.sigma + p.lam * (1.0 - p.sigma);
  const double pref_arg =
      p.u / (std::numbers::pi * p.f * mix * p.n_users);
  if (!(pref_arg >= 0.0))
    throw DomainError("prefactor: sqrt argument is negative");
  const double tail_arg = p.f * mix * p.n_users * x;
  if (!(tail_arg >= 0.0))
    throw DomainError("tail: sqrt argument is negative");
  return 0.5 * std::sqrt(pref_arg) *
         std::exp(-p.n_users * p.phi - p.g * x) *
         std::exp(-2.0 * std::sqrt(tail_arg));
}

inline double asymptotic_outage(const SystemModel& m, double x) {
  return asymptotic_outage(morrison_params(m), x);
}

}  // namespace storesize
