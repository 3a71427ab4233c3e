#pragma once

#include <string>
#include <vector>

#include "storesize/errors.hpp"
#include "storesize/model.hpp"
#include "storesize/sizing.hpp"
#include "storesize/table.hpp"
#include "storesize/version.hpp"

namespace storesize {

// Canned parameter studies behind the figure-style datasets: outage vs
// storage size (fig2), outage vs per-user capacity (fig3), storage/capacity
// trade-off contours (fig4), grid-power savings (fig5) and per-user storage
// savings versus a 10-user baseline (fig6). Shared defaults: chi = 0.5
// (p = 1/3) and per-user capacity sigma = 0.3683, except fig5 which uses
// chi = 4. Each choice is recorded in the notes column of every row.
inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "fig4",
                                                 "fig5", "fig6"};
  return names;
}

namespace detail {

inline std::string join_notes(const std::string& base,
                              const std::string& extra) {
  if (extra.empty()) return base;
  if (base.empty()) return extra;
  return base + "; " + extra;
}

inline std::string perturbation_note(const std::optional<double>& pc) {
  return pc ? "capacity perturbed to " + format_double(*pc) : "";
}

inline Table preset_fig2() {
  Table t;
  t.meta = {"preset: fig2",
            "description: exact outage probability vs storage size"};
  t.columns = {"N",       "chi",    "C",     "B",      "epsilon",
               "p_outage", "method", "notes", "version"};
  const UserModel user = UserModel::from_chi(0.5);
  const std::string base_note = "p=1/3 (chi=0.5); sigma=0.3683";
  for (int n = 400; n <= 800; n += 100) {
    const SystemModel m = SystemModel::make(n, user, 0.3683 * n);
    const ExactOutage fn(m);
    const std::string note =
        join_notes(base_note, perturbation_note(fn.perturbed_capacity));
    for (int i = 0; i <= 30; ++i) {
      const double b = 0.5 * i;
      t.rows.push_back({format_double(n), format_double(user.chi),
                        format_double(m.capacity), format_double(b), "",
                        format_double(fn(b)), "exact", note, kVersion});
    }
  }
  return t;
}

inline Table preset_fig3() {
  Table t;
  t.meta = {"preset: fig3",
            "description: exact outage probability vs per-user capacity at "
            "fixed storage B=5"};
  t.columns = {"N",       "chi",    "sigma", "C",      "B",
               "epsilon", "p_outage", "method", "notes", "version"};
  const UserModel user = UserModel::from_chi(0.5);
  const double b = 5.0;
  for (int n : {100, 200, 300, 400}) {
    for (int i = 0; i <= 20; ++i) {
      const double sigma = 0.35 + (0.60 - 0.35) * i / 20.0;
      const SystemModel m = SystemModel::make(n, user, sigma * n);
      const ExactOutage fn(m);
      const std::string note = join_notes(
          "p=1/3 (chi=0.5)", perturbation_note(fn.perturbed_capacity));
      t.rows.push_back({format_double(n), format_double(user.chi),
                        format_double(sigma), format_double(m.capacity),
                        format_double(b), "", format_double(fn(b)), "exact",
                        note, kVersion});
    }
  }
  return t;
}

inline Table preset_fig4() {
  Table t;
  t.meta = {"preset: fig4",
            "description: storage size vs grid capacity contours at N=500"};
  t.columns = {"N",       "chi",    "C",     "B",      "epsilon",
               "p_outage", "method", "notes", "version"};
  const UserModel user = UserModel::from_chi(0.5);
  const int n = 500;
  std::vector<double> grid(20);
  for (int i = 0; i < 20; ++i) grid[i] = 170.0 + (260.0 - 170.0) * i / 19.0;
  for (double eps : {0.01, 0.05, 0.1}) {
    const auto pts = contour(n, user, eps, grid);
    for (const auto& pt : pts) {
      std::string note = join_notes("p=1/3 (chi=0.5)",
                                    perturbation_note(pt.perturbed_capacity));
      note = join_notes(note, pt.error);
      t.rows.push_back({format_double(n), format_double(user.chi),
                        format_double(pt.capacity), format_double(pt.b_eps),
                        format_double(eps), format_double(pt.achieved_outage),
                        "exact", note, kVersion});
    }
  }
  return t;
}

inline Table preset_fig5() {
  Table t;
  t.meta = {"preset: fig5",
            "description: grid power savings vs population at fixed "
            "storage B=5"};
  t.columns = {"N",        "chi",              "b",      "epsilon",
               "capacity", "grid_savings_pct", "method", "notes",
               "version"};
  const UserModel user = UserModel::from_chi(4.0);
  const double b = 5.0;
  for (double eps : {0.01, 0.05, 0.1}) {
    for (int n : {10, 25, 50, 100, 200, 400}) {
      const SavingsResult res = grid_savings(n, user, b, eps);
      const std::string note = join_notes(
          "chi=4 (p=0.8)",
          res.perturbed ? "integer capacity test points nudged" : "");
      t.rows.push_back({format_double(n), format_double(user.chi),
                        format_double(b), format_double(eps),
                        format_double(res.capacity_needed),
                        format_double(res.percent), "exact", note, kVersion});
    }
  }
  return t;
}

inline Table preset_fig6() {
  Table t;
  t.meta = {"preset: fig6",
            "description: per-user storage savings vs a 10-user baseline"};
  t.columns = {"N",     "chi",        "sigma",           "C",
               "epsilon", "b_eps",    "per_user_b",      "ess_savings_pct",
               "method", "notes",     "version"};
  const UserModel user = UserModel::from_chi(0.5);
  const double sigma = 0.3683;
  const double eps = 0.01;
  const std::vector<int> n_list = {10, 25, 50, 100, 200, 400};
  const auto pts = ess_savings_vs_baseline(n_list, user, sigma, eps);
  for (const auto& pt : pts) {
    t.rows.push_back({format_double(pt.n), format_double(user.chi),
                      format_double(sigma), format_double(sigma * pt.n),
                      format_double(eps), format_double(pt.b_eps),
                      format_double(pt.per_user_b), format_double(pt.percent),
                      "exact", "p=1/3 (chi=0.5); baseline N=10", kVersion});
  }
  return t;
}

}  // namespace detail

inline Table preset_table(const std::string& name) {
  if (name == "fig2") return detail::preset_fig2();
  if (name == "fig3") return detail::preset_fig3();
  if (name == "fig4") return detail::preset_fig4();
  if (name == "fig5") return detail::preset_fig5();
  if (name == "fig6") return detail::preset_fig6();
  throw InvalidConfigError("unknown preset '" + name +
                           "'; expected fig2|fig3|fig4|fig5|fig6");
}

}  // namespace storesize
