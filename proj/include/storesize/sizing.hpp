#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "storesize/asymptotic.hpp"
#include "storesize/closed_form.hpp"
#include "storesize/errors.hpp"
#include "storesize/model.hpp"
#include "storesize/parallel.hpp"
#include "storesize/spectral.hpp"

namespace storesize {

enum class SizingMethod { exact, closed_form, asymptotic };

inline std::string to_string(SizingMethod m) {
  switch (m) {
    case SizingMethod::exact: return "exact";
    case SizingMethod::closed_form: return "closed_form";
    case SizingMethod::asymptotic: return "asymptotic";
  }
  return "exact";
}

inline SizingMethod parse_method(const std::string& s) {
  if (s == "exact") return SizingMethod::exact;
  if (s == "closed_form") return SizingMethod::closed_form;
  if (s == "asymptotic") return SizingMethod::asymptotic;
  throw InvalidConfigError("unknown method '" + s +
                           "'; expected exact|closed_form|asymptotic");
}

struct SizingResult {
  double b_eps = 0.0;
  double achieved_outage = 0.0;
  int iterations = 0;
  std::optional<double> perturbed_capacity;
};

namespace detail {

// Inverts a strictly decreasing survival function: smallest x with
// fn(x) <= epsilon. Bracket grows from [0,1] by doubling until
// fn(hi) < epsilon, then bisection until |fn(x) - epsilon| <= 1e-9*epsilon
// or the bracket is narrower than 1e-12.
struct Inversion {
  double x = 0.0;
  double achieved = 0.0;
  int iterations = 0;
};

inline Inversion invert_survival(const std::function<double(double)>& fn,
                                 double epsilon) {
  constexpr int kMaxIter = 200;
  Inversion r;
  const double f0 = fn(0.0);
  if (f0 <= epsilon) {
    r.achieved = f0;
    return r;
  }
  double lo = 0.0, hi = 1.0;
  double fhi = fn(hi);
  while (fhi >= epsilon) {
    if (++r.iterations > kMaxIter)
      throw NoConvergenceError("bracket growth exceeded " +
                               std::to_string(kMaxIter) + " iterations");
    lo = hi;
    hi *= 2.0;
    fhi = fn(hi);
  }
  while (true) {
    if (++r.iterations > kMaxIter)
      throw NoConvergenceError("bisection exceeded " +
                               std::to_string(kMaxIter) + " iterations");
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (std::abs(fm - epsilon) <= 1e-9 * epsilon) {
      r.x = mid;
      r.achieved = fm;
      return r;
    }
    if (fm > epsilon)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-12) {
      r.x = hi;
      r.achieved = fn(hi);
      return r;
    }
  }
}

}  // namespace detail

// Exact outage evaluator that retries once with capacity + 1e-6 when the
// requested capacity sits on an integer occupancy level.
struct ExactOutage {
  SpectralSolution solution;
  std::optional<double> perturbed_capacity;

  explicit ExactOutage(const SystemModel& m) {
    try {
      solution = solve_spectrum(m);
    } catch (const DriftSingularError&) {
      SystemModel nudged =
          SystemModel::make(m.n_users, m.user, m.capacity + 1e-6);
      solution = solve_spectrum(nudged);
      perturbed_capacity = nudged.capacity;
    }
  }
  double operator()(double b) const {
    return outage_probability(solution, b);
  }
};

// Smallest storage size with outage at most epsilon, by bisection on the
// chosen method's outage function.
inline SizingResult size_storage(const SystemModel& m, double epsilon,
                                 SizingMethod method = SizingMethod::exact) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw InvalidConfigError("epsilon must lie in (0,1)");
  m.require_stable();

  SizingResult res;
  std::function<double(double)> fn;
  std::optional<ExactOutage> exact;
  std::optional<AsymptoticParams> asy;
  switch (method) {
    case SizingMethod::exact:
      exact.emplace(m);
      res.perturbed_capacity = exact->perturbed_capacity;
      fn = [&](double b) { return (*exact)(b); };
      break;
    case SizingMethod::closed_form:
      if (m.n_users != 1)
        throw InvalidConfigError(
            "method closed_form requires n_users == 1");
      fn = [&](double b) {
        return single_user_outage(m.user.chi, m.capacity, b);
      };
      break;
    case SizingMethod::asymptotic:
      asy = morrison_params(m);
      fn = [&](double b) { return asymptotic_outage(*asy, b); };
      break;
  }
  const detail::Inversion inv = detail::invert_survival(fn, epsilon);
  res.b_eps = inv.x;
  res.achieved_outage = inv.achieved;
  res.iterations = inv.iterations;
  return res;
}

struct CapacityResult {
  double capacity = 0.0;
  double achieved_outage = 0.0;
  int iterations = 0;
  bool perturbed = false;  // an integer test point was nudged by +1e-6
};

// Smallest grid capacity in (N*p, N] with P(S > b) <= epsilon.
inline CapacityResult size_capacity(int n, const UserModel& user, double b,
                                    double epsilon) {
  if (n < 1) throw InvalidConfigError("n_users must be >= 1");
  if (!(b >= 0.0)) throw InvalidConfigError("storage level b must be >= 0");
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw InvalidConfigError("epsilon must lie in (0,1)");

  CapacityResult res;
  const auto outage_at = [&](double c) -> double {
    double cc = c;
    if (cc < n && std::abs(cc - std::round(cc)) <= kDriftIntegerTol) {
      cc += 1e-6;
      res.perturbed = true;
    }
    const SystemModel m = SystemModel::make(n, user, cc);
    return outage_probability(solve_spectrum(m), b);
  };

  constexpr int kMaxIter = 200;
  double lo = n * user.p;  // infeasible boundary (unstable limit)
  double hi = n;           // always feasible: outage is exactly 0
  const double tol = 1e-9 * std::max(1.0, static_cast<double>(n));
  while (hi - lo > tol) {
    if (++res.iterations > kMaxIter)
      throw NoConvergenceError("capacity bisection exceeded " +
                               std::to_string(kMaxIter) + " iterations");
    const double mid = 0.5 * (lo + hi);
    if (outage_at(mid) <= epsilon)
      hi = mid;
    else
      lo = mid;
  }
  res.capacity = hi;
  res.achieved_outage = outage_at(hi);
  if (res.achieved_outage > epsilon)
    throw InfeasibleTargetError(
        "no capacity at or below n meets the outage target");
  return res;
}

struct ContourPoint {
  double capacity = 0.0;
  double b_eps = std::numeric_limits<double>::quiet_NaN();
  double achieved_outage = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> perturbed_capacity;
  std::string error;  // empty on success
};

// (C, B(epsilon)) trade-off along a capacity grid; per-point failures are
// recorded in the row rather than aborting the whole contour.
inline std::vector<ContourPoint> contour(int n, const UserModel& user,
                                         double epsilon,
                                         const std::vector<double>& grid) {
  std::vector<ContourPoint> pts(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    ContourPoint& pt = pts[i];
    pt.capacity = grid[i];
    try {
      const SystemModel m = SystemModel::make(n, user, grid[i]);
      const SizingResult r = size_storage(m, epsilon);
      pt.b_eps = r.b_eps;
      pt.achieved_outage = r.achieved_outage;
      pt.perturbed_capacity = r.perturbed_capacity;
    } catch (const Error& e) {
      pt.error = e.what();
    }
  });
  return pts;
}

struct SavingsResult {
  double percent = 0.0;
  double capacity_needed = 0.0;
  bool perturbed = false;
};

// Grid power reduction relative to peak provisioning N (one unit per user).
inline SavingsResult grid_savings(int n, const UserModel& user, double b,
                                  double epsilon) {
  const CapacityResult cr = size_capacity(n, user, b, epsilon);
  return SavingsResult{100.0 * (n - cr.capacity) / n, cr.capacity,
                       cr.perturbed};
}

struct EssSavingsPoint {
  int n = 0;
  double b_eps = 0.0;
  double per_user_b = 0.0;
  double percent = 0.0;  // relative to the 10-user per-user baseline
};

// Per-user storage reduction relative to a 10-user system at the same
// per-user capacity and target.
inline std::vector<EssSavingsPoint> ess_savings_vs_baseline(
    const std::vector<int>& n_list, const UserModel& user,
    double capacity_per_user, double epsilon) {
  const SystemModel baseline =
      SystemModel::make(10, user, 10.0 * capacity_per_user);
  const double b10 = size_storage(baseline, epsilon).b_eps;
  if (!(b10 > 0.0))
    throw InvalidConfigError(
        "10-user baseline storage size is zero; savings are undefined");
  std::vector<EssSavingsPoint> out(n_list.size());
  parallel_for(static_cast<int>(n_list.size()), [&](int i) {
    const int n = n_list[i];
    const SystemModel m =
        SystemModel::make(n, user, n * capacity_per_user);
    const double bn = size_storage(m, epsilon).b_eps;
    out[i] = EssSavingsPoint{n, bn, bn / n,
                             100.0 * (1.0 - (bn / n) / (b10 / 10.0))};
  });
  return out;
}

// Generic sweep driver: cartesian product of linearly spaced axes over a
// target quantity. Axis/fixed parameter names: n, chi, capacity, sigma
// (= capacity/n), b, epsilon.
struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int points = 0;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::map<std::string, double> fixed;
  std::string target;  // outage | size | capacity | savings
  SizingMethod method = SizingMethod::exact;
};

struct SweepRow {
  std::vector<std::pair<std::string, double>> inputs;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string method;
  std::string note;   // e.g. recorded capacity perturbations
  std::string error;  // empty on success
};

namespace detail {

inline const std::vector<std::string>& sweep_param_names() {
  static const std::vector<std::string> names = {"n",     "chi", "capacity",
                                                 "sigma", "b",   "epsilon"};
  return names;
}

inline void validate_sweep(const SweepSpec& spec) {
  if (spec.axes.empty())
    throw InvalidConfigError("sweep needs at least one axis");
  std::map<std::string, int> seen;
  for (const auto& ax : spec.axes) {
    const auto& names = sweep_param_names();
    if (std::find(names.begin(), names.end(), ax.name) == names.end())
      throw InvalidConfigError("unknown sweep parameter '" + ax.name + "'");
    if (!(ax.min <= ax.max))
      throw InvalidConfigError("axis '" + ax.name + "' bounds are not ordered");
    if (ax.points < 1)
      throw InvalidConfigError("axis '" + ax.name + "' needs >= 1 points");
    ++seen[ax.name];
  }
  for (const auto& [k, v] : spec.fixed) {
    const auto& names = sweep_param_names();
    if (std::find(names.begin(), names.end(), k) == names.end())
      throw InvalidConfigError("unknown sweep parameter '" + k + "'");
    (void)v;
    ++seen[k];
  }
  for (const auto& [k, c] : seen)
    if (c > 1)
      throw InvalidConfigError("sweep parameter '" + k +
                               "' specified more than once");
  if (seen.count("capacity") && seen.count("sigma"))
    throw InvalidConfigError("specify capacity or sigma, not both");
  const std::vector<std::string> targets = {"outage", "size", "capacity",
                                            "savings"};
  if (std::find(targets.begin(), targets.end(), spec.target) == targets.end())
    throw InvalidConfigError("unknown sweep target '" + spec.target +
                             "'; expected outage|size|capacity|savings");
  const bool has_cap = seen.count("capacity") || seen.count("sigma");
  const auto require = [&](const char* name, bool present) {
    if (!present)
      throw InvalidConfigError("sweep target '" + spec.target +
                               "' requires parameter '" + name + "'");
  };
  require("n", seen.count("n") > 0);
  require("chi", seen.count("chi") > 0);
  if (spec.target == "outage") {
    require("capacity (or sigma)", has_cap);
    require("b", seen.count("b") > 0);
  } else if (spec.target == "size") {
    require("capacity (or sigma)", has_cap);
    require("epsilon", seen.count("epsilon") > 0);
  } else {
    require("b", seen.count("b") > 0);
    require("epsilon", seen.count("epsilon") > 0);
    if (has_cap)
      throw InvalidConfigError("sweep target '" + spec.target +
                               "' searches capacity; do not fix it");
  }
}

inline double axis_value(const SweepAxis& ax, int i) {
  if (ax.points == 1) return ax.min;
  return ax.min + (ax.max - ax.min) * i / (ax.points - 1);
}

}  // namespace detail

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  detail::validate_sweep(spec);
  long long total = 1;
  for (const auto& ax : spec.axes) total *= ax.points;
  if (total > 2'000'000)
    throw InvalidConfigError("sweep would generate " + std::to_string(total) +
                             " rows; refusing");
  const int n_rows = static_cast<int>(total);
  std::vector<SweepRow> rows(n_rows);

  // Deterministic lexicographic enumeration: first axis slowest.
  for (int r = 0; r < n_rows; ++r) {
    int rem = r;
    std::vector<int> idx(spec.axes.size());
    for (int a = static_cast<int>(spec.axes.size()) - 1; a >= 0; --a) {
      idx[a] = rem % spec.axes[a].points;
      rem /= spec.axes[a].points;
    }
    SweepRow& row = rows[r];
    for (std::size_t a = 0; a < spec.axes.size(); ++a)
      row.inputs.emplace_back(spec.axes[a].name,
                              detail::axis_value(spec.axes[a], idx[a]));
    for (const auto& [k, v] : spec.fixed) row.inputs.emplace_back(k, v);
    row.method =
        spec.target == "size" ? to_string(spec.method) : "exact";
  }

  parallel_for(n_rows, [&](int r) {
    SweepRow& row = rows[r];
    try {
      std::map<std::string, double> p(row.inputs.begin(), row.inputs.end());
      const int n = static_cast<int>(std::llround(p.at("n")));
      if (n < 1) throw InvalidConfigError("n must be >= 1");
      const UserModel user = UserModel::from_chi(p.at("chi"));
      const double cap =
          p.count("capacity") ? p.at("capacity")
                              : (p.count("sigma") ? p.at("sigma") * n : -1.0);
      const auto note_perturbed = [&](std::optional<double> pc) {
        if (pc)
          row.note = "capacity perturbed to " + std::to_string(*pc);
      };
      if (spec.target == "outage") {
        const SystemModel m = SystemModel::make(n, user, cap);
        m.require_stable();
        const ExactOutage fn(m);
        note_perturbed(fn.perturbed_capacity);
        row.value = fn(p.at("b"));
      } else if (spec.target == "size") {
        const SystemModel m = SystemModel::make(n, user, cap);
        const SizingResult res =
            size_storage(m, p.at("epsilon"), spec.method);
        note_perturbed(res.perturbed_capacity);
        row.value = res.b_eps;
      } else if (spec.target == "capacity") {
        const CapacityResult res =
            size_capacity(n, user, p.at("b"), p.at("epsilon"));
        if (res.perturbed) row.note = "integer capacity test points nudged";
        row.value = res.capacity;
      } else {  // savings
        const SavingsResult res =
            grid_savings(n, user, p.at("b"), p.at("epsilon"));
        if (res.perturbed) row.note = "integer capacity test points nudged";
        row.value = res.percent;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace storesize
