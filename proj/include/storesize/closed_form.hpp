#pragma once

#include <cmath>
#include <string>

#include "storesize/errors.hpp"
#include "storesize/model.hpp"

namespace storesize {

// Dedicated store for a single user behind a fractional grid connection
// c in (0,1). The backlog distribution has exactly one decaying mode, so
// everything is available in closed form.
struct SingleUserSpectrum {
  double z1;      // decay rate, negative
  double alpha1;  // mode coefficient, negative
};

inline void check_single_user(double chi, double c) {
  if (!(chi > 0.0) || !std::isfinite(chi))
    throw InvalidConfigError("chi must be positive and finite");
  if (!(c > 0.0) || !(c < 1.0))
    throw InvalidConfigError("single-user capacity must lie in (0,1), got " +
                             std::to_string(c));
  if (!(chi / (1.0 + chi) < c))
    throw UnstableError("single-user mean demand chi/(1+chi) is not below c");
}

inline SingleUserSpectrum single_user_spectrum(double chi, double c) {
  check_single_user(chi, c);
  const double z1 = chi / c - 1.0 / (1.0 - c);
  const double alpha1 = -chi / (c * (1.0 + chi));
  return SingleUserSpectrum{z1, alpha1};
}

// P(S > b) for the single-user system.
inline double single_user_outage(double chi, double c, double b) {
  if (!(b >= 0.0))
    throw InvalidConfigError("storage level b must be >= 0");
  const SingleUserSpectrum s = single_user_spectrum(chi, c);
  return -s.alpha1 * std::exp(s.z1 * b);
}

// Smallest store size meeting P(S > B) <= epsilon; zero when the target is
// already met with no store at all.
inline double single_user_size(double chi, double c, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw InvalidConfigError("epsilon must lie in (0,1)");
  const SingleUserSpectrum s = single_user_spectrum(chi, c);
  if (-s.alpha1 <= epsilon) return 0.0;
  const double b = c * (1.0 - c) / (chi - chi * c - c) *
                   std::log(epsilon * c * (1.0 + chi) / chi);
  return b > 0.0 ? b : 0.0;
}

}  // namespace storesize
