// Command line front end: resolves a scenario from flags plus an optional
// JSON config file (flags win), dispatches to the solvers or simulator, and
// writes a deterministic CSV or JSON table.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>
#include <nlohmann/json.hpp>

#include "storesize/storesize.hpp"

namespace po = boost::program_options;
using namespace storesize;

namespace {

const char* kUsage =
    "usage: storesize <command> [options]\n"
    "\n"
    "commands:\n"
    "  size        smallest storage B with outage P(S > B) <= epsilon\n"
    "  outage      outage probability P(S > B) for a given storage size\n"
    "  capacity    smallest grid capacity meeting an outage target\n"
    "  contour     (C, B(epsilon)) trade-off along a capacity grid\n"
    "  sweep       parameter sweeps; presets fig2..fig6 or custom axes\n"
    "  simulate    Monte Carlo estimate of outage or loss fraction\n"
    "  asymptotic  large-N approximation with exact-solver diagnostic\n"
    "  compare     exact vs simulated outage side by side\n"
    "  units       convert between normalized storage and kWh\n"
    "\n"
    "common options:\n"
    "  --config FILE   JSON file supplying any long option; flags override\n"
    "  --output PATH   output table path (default <command>.csv|.json)\n"
    "  --format FMT    csv (default) or json\n"
    "\n"
    "run `storesize <command> --help` for per-command options.\n";

// Option resolution: command line flag if explicitly set, else config file
// value, else built-in default. Tracks which config values were overridden
// and echoes every resolved value into the output metadata.
class Resolver {
 public:
  Resolver(const po::variables_map& vm, nlohmann::json cfg)
      : vm_(vm), cfg_(std::move(cfg)) {}

  bool flag_set(const std::string& key) const {
    return vm_.count(key) != 0 && !vm_[key].defaulted();
  }

  template <typename T>
  std::optional<T> find(const std::string& key) {
    if (flag_set(key)) {
      if (cfg_.contains(key)) overrides_.insert(key);
      T v = vm_[key].as<T>();
      resolved_[key] = v;
      return v;
    }
    if (cfg_.contains(key)) {
      T v;
      try {
        v = cfg_.at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw InvalidConfigError("config field '" + key +
                                 "' has the wrong type");
      }
      resolved_[key] = v;
      return v;
    }
    return std::nullopt;
  }

  template <typename T>
  T require(const std::string& key) {
    auto v = find<T>(key);
    if (!v) throw InvalidConfigError("missing required option --" + key);
    return *v;
  }

  template <typename T>
  T get_or(const std::string& key, T dflt) {
    auto v = find<T>(key);
    if (!v) {
      resolved_[key] = dflt;
      return dflt;
    }
    return *v;
  }

  std::vector<std::string> find_list(const std::string& key) {
    if (flag_set(key)) {
      if (cfg_.contains(key)) overrides_.insert(key);
      auto v = vm_[key].as<std::vector<std::string>>();
      resolved_[key] = v;
      return v;
    }
    if (cfg_.contains(key)) {
      std::vector<std::string> v;
      try {
        v = cfg_.at(key).get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw InvalidConfigError("config field '" + key +
                                 "' must be an array of strings");
      }
      resolved_[key] = v;
      return v;
    }
    return {};
  }

  std::vector<std::string> meta(const std::string& command) const {
    std::vector<std::string> m;
    m.push_back(std::string("tool: ") + kToolName + " " + kVersion);
    m.push_back("command: " + command);
    m.push_back("config: " + resolved_.dump());
    if (!overrides_.empty()) {
      std::string keys;
      for (const auto& k : overrides_) keys += (keys.empty() ? "" : ",") + k;
      m.push_back("overrides: " + keys);
    }
    return m;
  }

 private:
  const po::variables_map& vm_;
  nlohmann::json cfg_;
  std::set<std::string> overrides_;
  nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
};

nlohmann::json load_config_file(const po::variables_map& vm) {
  if (!vm.count("config")) return nlohmann::json::object();
  const std::string path = vm["config"].as<std::string>();
  std::ifstream is(path);
  if (!is) throw InvalidConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    return nlohmann::json::object();
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfigError("config file " + path +
                             " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object())
    throw InvalidConfigError("config file " + path +
                             " must contain a JSON object");
  return cfg;
}

// Common model options shared by most commands.
void add_model_options(po::options_description& od) {
  od.add_options()
      ("n", po::value<int>(), "number of users N")
      ("chi", po::value<double>(), "per-user request rate chi")
      ("p", po::value<double>(), "per-user On probability (alternative to chi)")
      ("capacity", po::value<double>(), "grid capacity C, per-user-peak units")
      ("sigma", po::value<double>(), "per-user capacity C/N (alternative to capacity)");
}

void add_io_options(po::options_description& od) {
  od.add_options()
      ("config", po::value<std::string>(), "JSON config file")
      ("output", po::value<std::string>(), "output file path")
      ("format", po::value<std::string>(), "csv|json (default csv)")
      ("help,h", "show this help");
}

UserModel resolve_user(Resolver& r) {
  const auto chi = r.find<double>("chi");
  const auto p = r.find<double>("p");
  if (chi && p)
    throw InvalidConfigError("options chi and p are mutually exclusive");
  if (chi) return UserModel::from_chi(*chi);
  if (p) return UserModel::from_on_probability(*p);
  throw InvalidConfigError("missing required option --chi (or --p)");
}

SystemModel resolve_model(Resolver& r) {
  const int n = r.require<int>("n");
  const UserModel user = resolve_user(r);
  const auto cap = r.find<double>("capacity");
  const auto sigma = r.find<double>("sigma");
  if (cap && sigma)
    throw InvalidConfigError("options capacity and sigma are mutually "
                             "exclusive");
  if (!cap && !sigma)
    throw InvalidConfigError("missing required option --capacity (or "
                             "--sigma)");
  return SystemModel::make(n, user, cap ? *cap : *sigma * n);
}

struct Output {
  std::string path;
  std::string format;  // csv | json
};

Output resolve_output(Resolver& r, const std::string& command) {
  Output out;
  out.format = r.get_or<std::string>("format", "csv");
  if (out.format != "csv" && out.format != "json")
    throw InvalidConfigError("format must be csv or json, got '" +
                             out.format + "'");
  out.path = r.get_or<std::string>(
      "output", command + (out.format == "csv" ? ".csv" : ".json"));
  return out;
}

void write_table(const Table& t, const Output& out) {
  write_file_atomic(out.path,
                    out.format == "csv" ? to_csv(t) : to_json(t));
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- size --

int run_size(const std::vector<std::string>& args) {
  po::options_description od("storesize size");
  add_model_options(od);
  od.add_options()
      ("epsilon", po::value<double>(), "outage target in (0,1)")
      ("method", po::value<std::string>(),
       "exact|closed_form|asymptotic (default exact)")
      ("rp-kw", po::value<double>(), "per-user peak demand, kW (optional)")
      ("mean-on-hours", po::value<double>(),
       "mean On duration, hours (optional)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const SystemModel m = resolve_model(r);
  const double eps = r.require<double>("epsilon");
  const SizingMethod method =
      parse_method(r.get_or<std::string>("method", "exact"));
  const auto rp_kw = r.find<double>("rp-kw");
  const auto on_hours = r.find<double>("mean-on-hours");
  const Output out = resolve_output(r, "size");

  const SizingResult res = size_storage(m, eps, method);
  std::string note;
  if (res.perturbed_capacity)
    note = "capacity perturbed to " + fmt(*res.perturbed_capacity);

  Table t;
  t.meta = r.meta("size");
  t.columns = {"N", "chi", "C", "B", "epsilon", "p_outage", "method",
               "notes", "version"};
  std::vector<std::string> row = {
      fmt(m.n_users), fmt(m.user.chi), fmt(m.capacity), fmt(res.b_eps),
      fmt(eps),       fmt(res.achieved_outage), to_string(method), note,
      kVersion};
  std::string unit_summary;
  if (rp_kw && on_hours) {
    const PhysicalUnits units = PhysicalUnits::make(*rp_kw, *on_hours);
    const double kwh = from_normalized_storage(units, res.b_eps);
    t.columns.insert(t.columns.end() - 2, "b_kwh");
    row.insert(row.end() - 2, fmt(kwh));
    unit_summary = " = " + fmt(kwh) + " kWh";
  }
  t.rows.push_back(std::move(row));
  write_table(t, out);
  std::cout << "B(epsilon=" << fmt(eps) << ") = " << fmt(res.b_eps)
            << unit_summary << " at outage " << fmt(res.achieved_outage)
            << " [" << to_string(method) << "] -> " << out.path << "\n";
  return 0;
}

// -------------------------------------------------------------- outage --

CapacityMixture parse_mixture(const std::string& caps,
                              const std::string& weights) {
  const auto split = [](const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InvalidConfigError("cannot parse number '" + tok + "'");
      }
    }
    return v;
  };
  const std::vector<double> c = split(caps), w = split(weights);
  if (c.size() != w.size() || c.empty())
    throw InvalidConfigError(
        "capacities and weights must be nonempty lists of equal length");
  CapacityMixture mix;
  for (std::size_t i = 0; i < c.size(); ++i)
    mix.components.push_back({c[i], w[i]});
  return mix;
}

int run_outage(const std::vector<std::string>& args) {
  po::options_description od("storesize outage");
  add_model_options(od);
  od.add_options()
      ("b", po::value<double>(), "storage size B >= 0")
      ("capacities", po::value<std::string>(),
       "comma list of mixture capacities (with --weights; replaces "
       "--capacity)")
      ("weights", po::value<std::string>(),
       "comma list of mixture weights summing to 1");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const Output out = resolve_output(r, "outage");
  const double b = r.require<double>("b");
  const auto caps = r.find<std::string>("capacities");
  const auto weights = r.find<std::string>("weights");
  if (caps.has_value() != weights.has_value())
    throw InvalidConfigError("capacities and weights must be given together");

  Table t;
  t.meta = r.meta("outage");
  t.columns = {"N", "chi", "C", "B", "epsilon", "p_outage", "method",
               "notes", "version"};
  double value = 0.0;
  if (caps) {
    const int n = r.require<int>("n");
    const UserModel user = resolve_user(r);
    const CapacityMixture mix = parse_mixture(*caps, *weights);
    value = outage_probability_mixture(n, user, mix, b);
    double mean_c = 0.0;
    for (const auto& comp : mix.components)
      mean_c += comp.weight * comp.capacity;
    t.rows.push_back({fmt(n), fmt(user.chi), fmt(mean_c), fmt(b), "",
                      fmt(value), "exact",
                      "capacity mixture of " +
                          std::to_string(mix.components.size()) +
                          " components; C column is the mean",
                      kVersion});
  } else {
    const SystemModel m = resolve_model(r);
    m.require_stable();
    value = outage_probability(solve_spectrum(m), b);
    t.rows.push_back({fmt(m.n_users), fmt(m.user.chi), fmt(m.capacity),
                      fmt(b), "", fmt(value), "exact", "", kVersion});
  }
  write_table(t, out);
  std::cout << "P(S > " << fmt(b) << ") = " << fmt(value) << " [exact] -> "
            << out.path << "\n";
  return 0;
}

// ------------------------------------------------------------ capacity --

int run_capacity(const std::vector<std::string>& args) {
  po::options_description od("storesize capacity");
  od.add_options()
      ("n", po::value<int>(), "number of users N")
      ("chi", po::value<double>(), "per-user request rate chi")
      ("p", po::value<double>(), "per-user On probability")
      ("b", po::value<double>(), "storage size B >= 0")
      ("epsilon", po::value<double>(), "outage target in (0,1)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const int n = r.require<int>("n");
  const UserModel user = resolve_user(r);
  const double b = r.require<double>("b");
  const double eps = r.require<double>("epsilon");
  const Output out = resolve_output(r, "capacity");

  const CapacityResult res = size_capacity(n, user, b, eps);
  Table t;
  t.meta = r.meta("capacity");
  t.columns = {"N", "chi", "b", "epsilon", "capacity", "p_outage", "method",
               "notes", "version"};
  t.rows.push_back({fmt(n), fmt(user.chi), fmt(b), fmt(eps),
                    fmt(res.capacity), fmt(res.achieved_outage), "exact",
                    res.perturbed ? "integer capacity test points nudged"
                                  : "",
                    kVersion});
  write_table(t, out);
  std::cout << "C(b=" << fmt(b) << ", epsilon=" << fmt(eps) << ") = "
            << fmt(res.capacity) << " at outage "
            << fmt(res.achieved_outage) << " [exact] -> " << out.path
            << "\n";
  return 0;
}

// ------------------------------------------------------------- contour --

int run_contour(const std::vector<std::string>& args) {
  po::options_description od("storesize contour");
  od.add_options()
      ("n", po::value<int>(), "number of users N")
      ("chi", po::value<double>(), "per-user request rate chi")
      ("p", po::value<double>(), "per-user On probability")
      ("epsilon", po::value<double>(), "outage target in (0,1)")
      ("c-min", po::value<double>(), "capacity grid start")
      ("c-max", po::value<double>(), "capacity grid end")
      ("points", po::value<int>(), "grid points (default 20)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const int n = r.require<int>("n");
  const UserModel user = resolve_user(r);
  const double eps = r.require<double>("epsilon");
  const double c_min = r.require<double>("c-min");
  const double c_max = r.require<double>("c-max");
  const int points = r.get_or<int>("points", 20);
  if (points < 1) throw InvalidConfigError("points must be >= 1");
  if (!(c_min <= c_max))
    throw InvalidConfigError("require c-min <= c-max");
  const Output out = resolve_output(r, "contour");

  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = points == 1
                  ? c_min
                  : c_min + (c_max - c_min) * i / (points - 1.0);
  const auto pts = contour(n, user, eps, grid);

  Table t;
  t.meta = r.meta("contour");
  t.columns = {"N", "chi", "C", "B", "epsilon", "p_outage", "method",
               "notes", "version"};
  int failed = 0;
  for (const auto& pt : pts) {
    std::string note;
    if (pt.perturbed_capacity)
      note = "capacity perturbed to " + fmt(*pt.perturbed_capacity);
    if (!pt.error.empty()) {
      note = note.empty() ? "error: " + pt.error
                          : note + "; error: " + pt.error;
      ++failed;
    }
    t.rows.push_back({fmt(n), fmt(user.chi), fmt(pt.capacity),
                      pt.error.empty() ? fmt(pt.b_eps) : "", fmt(eps),
                      pt.error.empty() ? fmt(pt.achieved_outage) : "",
                      "exact", note, kVersion});
  }
  write_table(t, out);
  std::cout << "contour: " << pts.size() << " points (" << failed
            << " failed) -> " << out.path << "\n";
  return failed == static_cast<int>(pts.size()) && !pts.empty() ? 3 : 0;
}

// --------------------------------------------------------------- sweep --

SweepAxis parse_axis(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() != 4)
    throw InvalidConfigError("axis '" + s +
                             "' must have the form name:min:max:points");
  try {
    return SweepAxis{parts[0], std::stod(parts[1]), std::stod(parts[2]),
                     std::stoi(parts[3])};
  } catch (const std::exception&) {
    throw InvalidConfigError("cannot parse axis '" + s + "'");
  }
}

std::pair<std::string, double> parse_fixed(const std::string& s) {
  const auto pos = s.find('=');
  if (pos == std::string::npos)
    throw InvalidConfigError("fixed parameter '" + s +
                             "' must have the form name=value");
  try {
    return {s.substr(0, pos), std::stod(s.substr(pos + 1))};
  } catch (const std::exception&) {
    throw InvalidConfigError("cannot parse fixed parameter '" + s + "'");
  }
}

int run_sweep(const std::vector<std::string>& args) {
  po::options_description od("storesize sweep");
  od.add_options()
      ("preset", po::value<std::string>(),
       "named preset: fig2|fig3|fig4|fig5|fig6")
      ("target", po::value<std::string>(),
       "custom sweep target: outage|size|capacity|savings")
      ("axis", po::value<std::vector<std::string>>(),
       "axis as name:min:max:points (repeatable; names: "
       "n,chi,capacity,sigma,b,epsilon)")
      ("fixed", po::value<std::vector<std::string>>(),
       "fixed parameter as name=value (repeatable)")
      ("method", po::value<std::string>(),
       "sizing method for target=size (default exact)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const auto preset = r.find<std::string>("preset");
  const Output out = resolve_output(r, "sweep");

  if (preset) {
    Table t = preset_table(*preset);
    auto meta = r.meta("sweep");
    meta.insert(meta.end(), t.meta.begin(), t.meta.end());
    t.meta = std::move(meta);
    write_table(t, out);
    std::cout << "sweep " << *preset << ": " << t.rows.size() << " rows -> "
              << out.path << "\n";
    return 0;
  }

  SweepSpec spec;
  spec.target = r.require<std::string>("target");
  for (const auto& s : r.find_list("axis")) spec.axes.push_back(parse_axis(s));
  for (const auto& s : r.find_list("fixed"))
    spec.fixed.insert(parse_fixed(s));
  spec.method = parse_method(r.get_or<std::string>("method", "exact"));

  const std::vector<SweepRow> rows = sweep(spec);
  Table t;
  t.meta = r.meta("sweep");
  for (const auto& [name, value] : rows.front().inputs) {
    (void)value;
    t.columns.push_back(name);
  }
  const std::string value_col =
      spec.target == "outage"
          ? "p_outage"
          : spec.target == "size"
                ? "b_eps"
                : spec.target == "capacity" ? "capacity" : "savings_pct";
  t.columns.insert(t.columns.end(),
                   {value_col, "method", "notes", "error", "version"});
  int failed = 0;
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& [name, value] : row.inputs) {
      (void)name;
      cells.push_back(fmt(value));
    }
    cells.push_back(row.error.empty() ? fmt(row.value) : "");
    cells.push_back(row.method);
    cells.push_back(row.note);
    cells.push_back(row.error);
    cells.push_back(kVersion);
    t.rows.push_back(std::move(cells));
    if (!row.error.empty()) ++failed;
  }
  write_table(t, out);
  std::cout << "sweep " << spec.target << ": " << rows.size() << " rows ("
            << failed << " errors) -> " << out.path << "\n";
  return failed == static_cast<int>(rows.size()) ? 3 : 0;
}

// ------------------------------------------------------------ simulate --

int run_simulate(const std::vector<std::string>& args) {
  po::options_description od("storesize simulate");
  add_model_options(od);
  od.add_options()
      ("b", po::value<double>(), "storage size B >= 0")
      ("metric", po::value<std::string>(),
       "backlog_exceedance (default) | loss_fraction")
      ("horizon", po::value<double>(), "time per replication (default 1e5)")
      ("warmup", po::value<double>(), "discarded prefix (default 1e3)")
      ("replications", po::value<int>(), "replications >= 2 (default 20)")
      ("seed", po::value<unsigned long long>(), "RNG seed (default 12345)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  SimConfig cfg{resolve_model(r),
                r.require<double>("b"),
                r.get_or<double>("horizon", 1e5),
                r.get_or<double>("warmup", 1e3),
                r.get_or<int>("replications", 20),
                r.get_or<unsigned long long>("seed", 12345ULL),
                SimMetric::backlog_exceedance};
  const std::string metric =
      r.get_or<std::string>("metric", "backlog_exceedance");
  if (metric == "loss_fraction")
    cfg.metric = SimMetric::loss_fraction;
  else if (metric != "backlog_exceedance")
    throw InvalidConfigError(
        "metric must be backlog_exceedance or loss_fraction, got '" +
        metric + "'");
  const Output out = resolve_output(r, "simulate");

  const SimEstimate est = simulate(cfg);
  Table t;
  t.meta = r.meta("simulate");
  t.columns = {"N",      "chi",    "C",            "B",
               "metric", "mean",   "stderr",       "ci_lo",
               "ci_hi",  "replications", "horizon", "warmup",
               "total_sim_time", "seed", "method", "notes", "version"};
  t.rows.push_back({fmt(cfg.model.n_users), fmt(cfg.model.user.chi),
                    fmt(cfg.model.capacity), fmt(cfg.b), metric,
                    fmt(est.mean), fmt(est.stderr_), fmt(est.ci_lo),
                    fmt(est.ci_hi), fmt(est.replications), fmt(cfg.horizon),
                    fmt(cfg.warmup), fmt(est.total_sim_time),
                    std::to_string(est.seed), "simulation", "", kVersion});
  write_table(t, out);
  std::cout << metric << " = " << fmt(est.mean) << " +/- "
            << fmt(1.96 * est.stderr_) << " (95% CI, " << est.replications
            << " reps) [simulation] -> " << out.path << "\n";
  return 0;
}

// ---------------------------------------------------------- asymptotic --

int run_asymptotic(const std::vector<std::string>& args) {
  po::options_description od("storesize asymptotic");
  add_model_options(od);
  od.add_options()
      ("x-max", po::value<double>(), "largest storage size (default 12)")
      ("points", po::value<int>(), "grid points (default 25)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const SystemModel m = resolve_model(r);
  const double x_max = r.get_or<double>("x-max", 12.0);
  const int points = r.get_or<int>("points", 25);
  if (points < 1) throw InvalidConfigError("points must be >= 1");
  if (!(x_max >= 0.0)) throw InvalidConfigError("x-max must be >= 0");
  const Output out = resolve_output(r, "asymptotic");

  const AsymptoticParams params = morrison_params(m);
  std::string exact_note;
  std::optional<ExactOutage> exact;
  try {
    exact.emplace(m);
    if (exact->perturbed_capacity)
      exact_note =
          "exact capacity perturbed to " + fmt(*exact->perturbed_capacity);
  } catch (const Error& e) {
    exact_note = std::string("exact solver unavailable: ") + e.what();
  }

  Table t;
  t.meta = r.meta("asymptotic");
  t.meta.push_back("diagnostic: exact column from the spectral solver; "
                   "agreement is reported, not asserted");
  t.columns = {"N",       "chi",      "C",      "x",     "asymptotic_outage",
               "exact_outage", "ratio", "method", "notes", "version"};
  for (int i = 0; i < points; ++i) {
    const double x =
        points == 1 ? 0.0 : x_max * i / (points - 1.0);
    const double approx = asymptotic_outage(params, x);
    std::string exact_s, ratio_s;
    if (exact) {
      const double ex = (*exact)(x);
      exact_s = fmt(ex);
      ratio_s = ex > 0.0 ? fmt(approx / ex) : "";
    }
    t.rows.push_back({fmt(m.n_users), fmt(m.user.chi), fmt(m.capacity),
                      fmt(x), fmt(approx), exact_s, ratio_s, "asymptotic",
                      exact_note, kVersion});
  }
  write_table(t, out);
  std::cout << "asymptotic outage at x=0: "
            << fmt(asymptotic_outage(params, 0.0)) << ", " << points
            << " grid points -> " << out.path << "\n";
  return 0;
}

// ------------------------------------------------------------- compare --

int run_compare(const std::vector<std::string>& args) {
  po::options_description od("storesize compare");
  od.add_options()
      ("case", po::value<std::vector<std::string>>(),
       "scenario as n,chi,capacity,b (repeatable; default: built-in "
       "cross-validation set)")
      ("horizon", po::value<double>(), "time per replication (default 1e5)")
      ("warmup", po::value<double>(), "discarded prefix (default 1e3)")
      ("replications", po::value<int>(), "replications >= 2 (default 20)")
      ("seed", po::value<unsigned long long>(), "RNG seed (default 12345)");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const double horizon = r.get_or<double>("horizon", 1e5);
  const double warmup = r.get_or<double>("warmup", 1e3);
  const int reps = r.get_or<int>("replications", 20);
  const auto seed = r.get_or<unsigned long long>("seed", 12345ULL);
  std::vector<std::string> case_specs = r.find_list("case");
  if (case_specs.empty())
    case_specs = {"2,1,1.5,0",    "2,1,1.5,1",    "2,1,1.5,5",
                  "5,0.5,2.5,0",  "5,0.5,2.5,1",  "5,0.5,2.5,5",
                  "20,0.5,8.3,0", "20,0.5,8.3,1", "20,0.5,8.3,5"};
  const Output out = resolve_output(r, "compare");

  std::vector<SimConfig> cases;
  for (const auto& s : case_specs) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InvalidConfigError("cannot parse case '" + s + "'");
      }
    }
    if (v.size() != 4)
      throw InvalidConfigError("case '" + s +
                               "' must have the form n,chi,capacity,b");
    cases.push_back(SimConfig{
        SystemModel::make(static_cast<int>(std::llround(v[0])),
                          UserModel::from_chi(v[1]), v[2]),
        v[3], horizon, warmup, reps, seed,
        SimMetric::backlog_exceedance});
  }

  const auto rows = compare_exact_vs_sim(cases);
  Table t;
  t.meta = r.meta("compare");
  t.columns = {"N",        "chi",        "C",      "B",     "analytic",
               "sim_mean", "sim_stderr", "zscore", "flagged", "replications",
               "horizon",  "warmup",     "seed",   "method", "notes",
               "version"};
  int flagged = 0;
  for (const auto& row : rows) {
    if (row.flagged) ++flagged;
    t.rows.push_back({fmt(row.model.n_users), fmt(row.model.user.chi),
                      fmt(row.model.capacity), fmt(row.b), fmt(row.analytic),
                      fmt(row.sim_mean), fmt(row.sim_stderr),
                      fmt(row.zscore), row.flagged ? "true" : "false",
                      fmt(reps), fmt(horizon), fmt(warmup),
                      std::to_string(seed), "exact_vs_simulation", "",
                      kVersion});
  }
  write_table(t, out);
  std::cout << "compare: " << rows.size() << " cases, " << flagged
            << " flagged (|z| > 3) -> " << out.path << "\n";
  return 0;
}

// --------------------------------------------------------------- units --

int run_units(const std::vector<std::string>& args) {
  po::options_description od("storesize units");
  od.add_options()
      ("b-norm", po::value<double>(), "storage size in normalized units")
      ("b-kwh", po::value<double>(), "storage size in kWh")
      ("rp-kw", po::value<double>(), "per-user peak demand, kW")
      ("mean-on-hours", po::value<double>(), "mean On duration, hours");
  add_io_options(od);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(od).run(), vm);
  if (vm.count("help")) {
    std::cout << od;
    return 0;
  }
  Resolver r(vm, load_config_file(vm));
  const PhysicalUnits units = PhysicalUnits::make(
      r.require<double>("rp-kw"), r.require<double>("mean-on-hours"));
  const auto b_norm = r.find<double>("b-norm");
  const auto b_kwh = r.find<double>("b-kwh");
  if (b_norm.has_value() == b_kwh.has_value())
    throw InvalidConfigError("give exactly one of --b-norm or --b-kwh");
  const Output out = resolve_output(r, "units");

  const double norm =
      b_norm ? *b_norm : to_normalized_storage(units, *b_kwh);
  const double kwh =
      b_kwh ? *b_kwh : from_normalized_storage(units, *b_norm);
  Table t;
  t.meta = r.meta("units");
  t.columns = {"b_norm", "rp_kw", "mean_on_hours", "b_kwh", "method",
               "notes", "version"};
  t.rows.push_back({fmt(norm), fmt(units.rp_kw), fmt(units.mean_on_hours),
                    fmt(kwh), "units", "", kVersion});
  write_table(t, out);
  std::cout << "B = " << fmt(norm) << " normalized = " << fmt(kwh)
            << " kWh (rp_kw=" << fmt(units.rp_kw) << ", mean_on_hours="
            << fmt(units.mean_on_hours) << ") -> " << out.path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  const std::string cmd = argv[1];
  if (cmd == "-h" || cmd == "--help" || cmd == "help") {
    std::cout << kUsage;
    return 0;
  }
  if (cmd == "--version" || cmd == "version") {
    std::cout << kToolName << " " << kVersion << "\n";
    return 0;
  }
  const std::vector<std::string> args(argv + 2, argv + argc);
  try {
    if (cmd == "size") return run_size(args);
    if (cmd == "outage") return run_outage(args);
    if (cmd == "capacity") return run_capacity(args);
    if (cmd == "contour") return run_contour(args);
    if (cmd == "sweep") return run_sweep(args);
    if (cmd == "simulate") return run_simulate(args);
    if (cmd == "asymptotic") return run_asymptotic(args);
    if (cmd == "compare") return run_compare(args);
    if (cmd == "units") return run_units(args);
    std::cerr << "unknown command '" << cmd << "'\n\n" << kUsage;
    return 2;
  } catch (const po::error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical_error(e) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
