#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "storesize/errors.hpp"
#include "storesize/model.hpp"

namespace storesize {

// Net drift of the store backlog in occupancy state i is d_i = i - C.
// A capacity within tol of an integer level makes one drift vanish and the
// spectral representation degenerate.
struct DriftMatrix {
  Eigen::VectorXd diagonal;
};

inline constexpr double kDriftIntegerTol = 1e-9;

inline DriftMatrix drift_matrix(const SystemModel& m) {
  const double c = m.capacity;
  const double nearest = std::round(c);
  if (std::abs(c - nearest) <= kDriftIntegerTol && nearest >= 0.0 &&
      nearest <= m.n_users)
    throw DriftSingularError(
        "capacity " + std::to_string(c) +
        " is within 1e-9 of integer occupancy level " +
        std::to_string(static_cast<long long>(nearest)) +
        "; perturb the capacity");
  Eigen::VectorXd d(m.n_users + 1);
  for (int i = 0; i <= m.n_users; ++i) d[i] = i - c;
  return DriftMatrix{std::move(d)};
}

// Spectral representation of the stationary backlog S:
//   F_j(x) = P(S <= x, occupancy = j) = pi_j + sum_k alpha_k phi_k[j] e^{z_k x}
// with one term per strictly negative eigenvalue z_k of the drift pencil.
// phi rows are scaled to unit max-abs entry with positive leading sign.
struct SpectralSolution {
  int n_users = 0;
  double capacity = 0.0;
  Eigen::VectorXd pi;           // stationary occupancy distribution
  Eigen::VectorXd eigenvalues;  // z_k < 0, sorted descending (slowest first)
  Eigen::MatrixXd phi;          // K x (N+1), row k is mode phi_k
  Eigen::VectorXd alpha;        // boundary coefficients
  Eigen::VectorXd mode_mass;    // alpha_k * sum_j phi_k[j]
  double boundary_rcond = 1.0;  // reciprocal condition of the boundary system

  int num_modes() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

// Eigenvalue problem posed on the balanced form A = J |D|^{-1/2} S |D|^{-1/2},
// where S = P^{1/2} M P^{-1/2} is the symmetrized generator (tridiagonal,
// entries O(N)) and J = sign(D). A has the same spectrum as the pencil
// z phi D = phi M, and its entries stay O(N) regardless of how unbalanced
// pi is, which keeps dgeev's backward error from being amplified through
// the similarity. Only the eigenvalues are taken from A: mapping its
// eigenvectors back to phi loses all relative accuracy once the modes are
// strongly graded, so the vectors are recomputed by inverse iteration in
// the phi coordinates instead.
inline Eigen::MatrixXd balanced_matrix(const SystemModel& m,
                                       const Eigen::VectorXd& drift) {
  const int n = m.n_users;
  const double chi = m.user.chi;
  Eigen::VectorXd inv_sqrt_d(n + 1), sign_d(n + 1);
  for (int i = 0; i <= n; ++i) {
    inv_sqrt_d[i] = 1.0 / std::sqrt(std::abs(drift[i]));
    sign_d[i] = drift[i] > 0.0 ? 1.0 : -1.0;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    const double up = (n - i) * chi;
    const double down = i;
    a(i, i) = sign_d[i] * -(up + down) * inv_sqrt_d[i] * inv_sqrt_d[i];
    if (i < n) {
      const double s_off = std::sqrt((n - i) * chi * (i + 1.0));
      a(i, i + 1) = sign_d[i] * s_off * inv_sqrt_d[i] * inv_sqrt_d[i + 1];
      a(i + 1, i) = sign_d[i + 1] * s_off * inv_sqrt_d[i + 1] * inv_sqrt_d[i];
    }
  }
  return a;
}

// Infinity norm of z*phi*D - phi*M for one mode, plus the norm of phi*M,
// using the tridiagonal structure of M.
inline std::pair<double, double> mode_residual(const SystemModel& m,
                                               const Eigen::VectorXd& drift,
                                               double z,
                                               const Eigen::VectorXd& phi) {
  const int n = m.n_users;
  const double chi = m.user.chi;
  double rmax = 0.0, mmax = 0.0;
  for (int j = 0; j <= n; ++j) {
    double phim = -phi[j] * ((n - j) * chi + j);
    if (j > 0) phim += phi[j - 1] * (n - (j - 1)) * chi;
    if (j < n) phim += phi[j + 1] * (j + 1);
    rmax = std::max(rmax, std::abs(z * phi[j] * drift[j] - phim));
    mmax = std::max(mmax, std::abs(phim));
  }
  return {rmax, mmax};
}

// Infinity norm of (S - z D) w for one mode of the symmetrized pencil,
// plus the norm of S w, where S = P^{1/2} M^T P^{-1/2} is the symmetric
// tridiagonal form of the generator.
inline std::pair<double, double> sym_mode_residual(const SystemModel& m,
                                                   const Eigen::VectorXd& drift,
                                                   double z,
                                                   const Eigen::VectorXd& w) {
  const int n = m.n_users;
  const double chi = m.user.chi;
  double rmax = 0.0, smax = 0.0;
  for (int j = 0; j <= n; ++j) {
    double sw = -w[j] * ((n - j) * chi + j);
    if (j > 0) sw += w[j - 1] * std::sqrt((n - (j - 1)) * chi * j);
    if (j < n) sw += w[j + 1] * std::sqrt((n - j) * chi * (j + 1.0));
    rmax = std::max(rmax, std::abs(sw - z * drift[j] * w[j]));
    smax = std::max(smax, std::abs(sw));
  }
  return {rmax, smax};
}

// Inverse iteration on a shifted tridiagonal pencil (T - z D), where T is
// either M^T (phi coordinates) or its symmetrized form S (w coordinates).
// Each coordinate system resolves the exponentially graded components of
// its own representation at full relative accuracy; no similarity mapping
// between them survives the grading, so both are computed directly and the
// caller reconciles the scales. Returns the vector scaled to unit max-abs
// entry of positive sign.
enum class PencilCoords { kPhi, kSym };

inline Eigen::VectorXd inverse_iteration_mode(const SystemModel& m,
                                              const Eigen::VectorXd& drift,
                                              double z, int mode_index,
                                              PencilCoords coords) {
  const int n = m.n_users;
  const lapack_int dim = n + 1;
  const double chi = m.user.chi;
  double shift = z;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::VectorXd dl(dim - 1), dd(dim), du(dim - 1);
    Eigen::VectorXd du2(std::max<lapack_int>(dim - 2, 0));
    std::vector<lapack_int> ipiv(dim);
    for (int j = 0; j < dim; ++j) {
      dd[j] = -((n - j) * chi + j) - shift * drift[j];
      if (j < n) {
        if (coords == PencilCoords::kPhi) {
          dl[j] = (n - j) * chi;  // (M^T)(j+1, j)
          du[j] = j + 1.0;        // (M^T)(j, j+1)
        } else {
          const double off = std::sqrt((n - j) * chi * (j + 1.0));
          dl[j] = off;
          du[j] = off;
        }
      }
    }
    const lapack_int finfo = LAPACKE_dgttrf(dim, dl.data(), dd.data(),
                                            du.data(), du2.data(),
                                            ipiv.data());
    if (finfo != 0) {
      // Exactly singular pivot: nudge the shift off the eigenvalue.
      shift = z * (1.0 + 1e-13 * (attempt + 1.0));
      continue;
    }
    Eigen::VectorXd v = Eigen::VectorXd::Ones(dim);
    for (int it = 0; it < 4; ++it) {
      const lapack_int sinfo = LAPACKE_dgttrs(
          LAPACK_COL_MAJOR, 'N', dim, 1, dl.data(), dd.data(), du.data(),
          du2.data(), ipiv.data(), v.data(), dim);
      if (sinfo != 0)
        throw NumericalInstabilityError("dgttrs failed with info=" +
                                        std::to_string(sinfo));
      const double vmax = v.cwiseAbs().maxCoeff();
      if (!(vmax > 0.0) || !v.allFinite())
        throw NumericalInstabilityError("inverse iteration collapsed for "
                                        "mode " + std::to_string(mode_index));
      v /= vmax;
      if (it >= 1) {
        const auto [rmax, mmax] =
            coords == PencilCoords::kPhi
                ? mode_residual(m, drift, z, v)
                : sym_mode_residual(m, drift, z, v);
        if (rmax <= 1e-10 * std::max(mmax, 1e-300)) break;
      }
    }
    int imax = 0;
    for (int i = 1; i < dim; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] == 0.0)
      throw NumericalInstabilityError("mode " + std::to_string(mode_index) +
                                      " has vanishing eigenvector");
    return v / v[imax];
  }
  throw NumericalInstabilityError(
      "inverse iteration could not factor the shifted pencil for mode " +
      std::to_string(mode_index));
}

}  // namespace detail

inline SpectralSolution solve_spectrum(const SystemModel& m) {
  SpectralSolution sol;
  sol.n_users = m.n_users;
  sol.capacity = m.capacity;
  sol.pi = stationary_distribution(m);

  const int n = m.n_users;
  if (m.capacity >= n) {
    // Demand can never exceed capacity: the store stays empty and the
    // backlog distribution is the point mass at zero.
    sol.eigenvalues.resize(0);
    sol.phi.resize(0, n + 1);
    sol.alpha.resize(0);
    sol.mode_mass.resize(0);
    return sol;
  }

  m.require_stable();
  const DriftMatrix dm = drift_matrix(m);
  const Eigen::VectorXd& drift = dm.diagonal;

  const int dim = n + 1;
  int n_over = 0;  // states with positive drift, i > C
  for (int i = 0; i < dim; ++i)
    if (drift[i] > 0.0) ++n_over;

  Eigen::MatrixXd a = detail::balanced_matrix(m, drift);
  Eigen::VectorXd wr(dim), wi(dim);
  const lapack_int info = LAPACKE_dgeev(
      LAPACK_COL_MAJOR, 'N', 'N', dim, a.data(), dim, wr.data(), wi.data(),
      nullptr, 1, nullptr, 1);
  if (info != 0)
    throw NumericalInstabilityError("dgeev failed with info=" +
                                    std::to_string(info));

  for (int j = 0; j < dim; ++j)
    if (std::abs(wi[j]) > 1e-8 * std::max(1.0, std::abs(wr[j])))
      throw NumericalInstabilityError(
          "complex eigenvalue " + std::to_string(wr[j]) + " + " +
          std::to_string(wi[j]) + "i exceeds the imaginary tolerance");

  // The pencil carries exactly one zero eigenvalue (the stationary mode);
  // classify the rest by sign rather than against a magnitude cutoff, which
  // a near-singular drift would inflate past the slowest genuine mode.
  int jz = 0;
  for (int j = 1; j < dim; ++j)
    if (std::abs(wr[j]) < std::abs(wr[jz])) jz = j;
  std::vector<int> kept;
  int n_pos = 0;
  for (int j = 0; j < dim; ++j) {
    if (j == jz) continue;
    if (wr[j] < 0.0)
      kept.push_back(j);
    else
      ++n_pos;
  }
  if (static_cast<int>(kept.size()) != n_over)
    throw NumericalInstabilityError(
        "expected " + std::to_string(n_over) +
        " decaying modes but found " + std::to_string(kept.size()) + " (" +
        std::to_string(n_pos) + " growing)");
  std::sort(kept.begin(), kept.end(),
            [&](int a_, int b_) { return wr[a_] > wr[b_]; });
  if (!kept.empty() && std::abs(wr[jz]) > 1e-3 * std::abs(wr[kept.front()]))
    throw NumericalInstabilityError(
        "stationary eigenvalue " + std::to_string(wr[jz]) +
        " is not separated from the slowest decaying mode " +
        std::to_string(wr[kept.front()]));

  const int k = n_over;
  sol.eigenvalues.resize(k);
  sol.phi.resize(k, dim);
  Eigen::MatrixXd w(k, dim);  // the same modes in symmetrized coordinates
  for (int r = 0; r < k; ++r) {
    sol.eigenvalues[r] = wr[kept[r]];
    sol.phi.row(r) = detail::inverse_iteration_mode(
        m, drift, sol.eigenvalues[r], r, detail::PencilCoords::kPhi);
    w.row(r) = detail::inverse_iteration_mode(
        m, drift, sol.eigenvalues[r], r, detail::PencilCoords::kSym);
  }

  // Emptiness conditions F_j(0) = 0 for every overload state j, posed in
  // the symmetrized coordinates w_k = phi_k / sqrt(pi) where the system is
  // well conditioned: the raw phi columns grade exponentially across the
  // overload rows and their Gram matrix is numerically singular.
  const Eigen::VectorXd logpi = log_stationary_distribution(m);
  Eigen::MatrixXd bmat(n_over, k);
  Eigen::VectorXd rhs(n_over);
  {
    int row = 0;
    for (int j = 0; j < dim; ++j) {
      if (drift[j] <= 0.0) continue;
      for (int c = 0; c < k; ++c) bmat(row, c) = w(c, j);
      const double lsq = 0.5 * logpi[j];
      rhs[row] = -(lsq < -745.0 ? 0.0 : std::exp(lsq));
      ++row;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
  Eigen::VectorXd beta = lu.solve(rhs);
  beta += lu.solve(rhs - bmat * beta);
  if (!beta.allFinite())
    throw NumericalInstabilityError("boundary solve produced non-finite "
                                    "coefficients");
  sol.boundary_rcond = lu.rcond();

  // Reconcile the per-mode scales of the two representations. In exact
  // arithmetic log t(j) = log|w_j| + log sqrt(pi_j) - log|phi_j| is the same
  // for every j; in floating point it is flat (jitter ~1e-13 per step) only
  // across the window of states where both vectors are above their noise
  // floors, and jumps by O(1) per step outside it. Pick the state whose
  // two-sided jitter is smallest and reject modes with no flat window.
  constexpr double kTieJitterTol = 1e-6;
  sol.alpha.resize(k);
  Eigen::VectorXd logt(dim);
  for (int r = 0; r < k; ++r) {
    for (int j = 0; j < dim; ++j) {
      const double wv = std::abs(w(r, j));
      const double pv = std::abs(sol.phi(r, j));
      logt[j] = (wv == 0.0 || pv == 0.0)
                    ? std::numeric_limits<double>::quiet_NaN()
                    : std::log(wv) + 0.5 * logpi[j] - std::log(pv);
    }
    int jb = -1;
    double best = std::numeric_limits<double>::infinity();
    if (dim == 2 && std::isfinite(logt[0]) && std::isfinite(logt[1]) &&
        w(r, 0) * sol.phi(r, 0) * w(r, 1) * sol.phi(r, 1) > 0.0) {
      best = std::abs(logt[1] - logt[0]);
      jb = 0;
    }
    for (int j = 1; j + 1 < dim; ++j) {
      const double jitter = std::max(std::abs(logt[j] - logt[j - 1]),
                                     std::abs(logt[j + 1] - logt[j]));
      const bool signs_match =
          w(r, j - 1) * sol.phi(r, j - 1) * w(r, j) * sol.phi(r, j) > 0.0 &&
          w(r, j + 1) * sol.phi(r, j + 1) * w(r, j) * sol.phi(r, j) > 0.0;
      if (std::isfinite(jitter) && signs_match && jitter < best) {
        best = jitter;
        jb = j;
      }
    }
    if (jb < 0 || best > kTieJitterTol)
      throw NumericalInstabilityError(
          "mode " + std::to_string(r) +
          " has no entry shared accurately by both coordinate systems");
    double t = logt[jb] < -745.0 ? 0.0 : std::exp(logt[jb]);
    if (w(r, jb) * sol.phi(r, jb) < 0.0) t = -t;
    sol.alpha[r] = beta[r] * t;
  }

  for (int r = 0; r < k; ++r) {
    const Eigen::VectorXd phi_r = sol.phi.row(r);
    const auto [rmax, mmax] =
        detail::mode_residual(m, drift, sol.eigenvalues[r], phi_r);
    if (rmax > 1e-8 * std::max(mmax, 1e-300))
      throw NumericalInstabilityError(
          "eigenpair residual " + std::to_string(rmax) + " exceeds 1e-8 of " +
          std::to_string(mmax) + " for mode " + std::to_string(r));
  }

  sol.mode_mass.resize(k);
  for (int r = 0; r < k; ++r)
    sol.mode_mass[r] = sol.alpha[r] * sol.phi.row(r).sum();
  return sol;
}

// Joint CDF values F_j(x) and their total F(x) = P(S <= x).
struct CdfValue {
  Eigen::VectorXd by_state;
  double total = 0.0;
};

inline CdfValue cdf(const SpectralSolution& sol, double x) {
  if (!(x >= 0.0)) throw InvalidConfigError("cdf argument x must be >= 0");
  CdfValue v;
  v.by_state = sol.pi;
  for (int r = 0; r < sol.num_modes(); ++r)
    v.by_state += sol.alpha[r] * std::exp(sol.eigenvalues[r] * x) *
                  sol.phi.row(r).transpose();
  v.total = v.by_state.sum();
  if (v.total < 0.0 && v.total >= -1e-12) v.total = 0.0;
  if (v.total > 1.0 && v.total <= 1.0 + 1e-12) v.total = 1.0;
  return v;
}

// P(S > b), the stationary probability that demand overflows a store of
// size b.
inline double outage_probability(const SpectralSolution& sol, double b) {
  if (!(b >= 0.0)) throw InvalidConfigError("storage level b must be >= 0");
  double val = 0.0;
  for (int r = 0; r < sol.num_modes(); ++r)
    val -= sol.mode_mass[r] * std::exp(sol.eigenvalues[r] * b);
  if (val < 0.0) {
    if (val < -1e-12)
      throw NumericalInstabilityError("outage probability " +
                                      std::to_string(val) + " out of range");
    val = 0.0;
  } else if (val > 1.0) {
    if (val > 1.0 + 1e-12)
      throw NumericalInstabilityError("outage probability " +
                                      std::to_string(val) + " out of range");
    val = 1.0;
  }
  return val;
}

// Weighted average of outage probabilities over a finite set of capacity
// scenarios (e.g. uncertain or time-varying grid limits).
struct CapacityMixture {
  struct Component {
    double capacity;
    double weight;
  };
  std::vector<Component> components;
};

inline double outage_probability_mixture(int n_users, const UserModel& user,
                                         const CapacityMixture& mix,
                                         double b) {
  if (mix.components.empty())
    throw InvalidConfigError("capacity mixture must have >= 1 component");
  double wsum = 0.0;
  for (const auto& c : mix.components) {
    if (!(c.weight > 0.0))
      throw InvalidConfigError("mixture weights must be positive");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidConfigError("mixture weights must sum to 1 within 1e-12");
  double val = 0.0;
  for (std::size_t j = 0; j < mix.components.size(); ++j) {
    const auto& comp = mix.components[j];
    try {
      const SystemModel mm = SystemModel::make(n_users, user, comp.capacity);
      mm.require_stable();
      val += comp.weight * outage_probability(solve_spectrum(mm), b);
    } catch (const UnstableError& e) {
      throw UnstableError("mixture component " + std::to_string(j) + ": " +
                          e.what());
    } catch (const DriftSingularError& e) {
      throw DriftSingularError("mixture component " + std::to_string(j) +
                               ": " + e.what());
    }
  }
  return val;
}

}  // namespace storesize
