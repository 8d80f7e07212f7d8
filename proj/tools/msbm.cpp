// Command-line front end: simulate, estimate, bench, calibrate, ingest.

#include "msbm/error.hpp"
#include "msbm/experiment.hpp"
#include "msbm/io.hpp"
#include "msbm/pipeline.hpp"
#include "msbm/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace msbm;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kExhausted = 4 };

struct Options {
  std::vector<std::string> scenarios;
  std::vector<std::string> policies;
  int n = 0;
  int t_max = 0;
  int layers = 0;
  int reps = 20;
  std::uint64_t seed = 1;
  int burn_in = 15;
  std::optional<double> c_tau;
  std::string ranks;
  std::string out = "out";
  std::string input;
  std::string node_map;
  int bootstrap = 50;
  double alpha = 0.05;
  bool edges = false;
};

RefineConfig parse_ranks(const std::string& text) {
  RefineConfig cfg;
  cfg.k_rank = cfg.r1 = cfg.r2 = 0;
  if (text.empty()) return cfg;
  std::vector<int> v;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("--ranks expects K,r1,r2 (got '" + text + "')");
    }
  }
  if (v.size() != 3 || std::any_of(v.begin(), v.end(), [](int x) { return x < 1; })) {
    throw UsageError("--ranks expects three positive integers K,r1,r2");
  }
  cfg.k_rank = v[0];
  cfg.r1 = v[1];
  cfg.r2 = v[2];
  return cfg;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string edge_list_text(const std::vector<Snapshot>& snaps) {
  std::ostringstream os;
  os << "# t i j l\n";
  for (std::size_t t = 0; t < snaps.size(); ++t) {
    const Snapshot& s = snaps[t];
    for (int l = 0; l < s.layers(); ++l)
      for (int i = 0; i < s.nodes(); ++i)
        for (int j = i + 1; j < s.nodes(); ++j)
          if (s.get(i, j, l)) os << t << ' ' << i + 1 << ' ' << j + 1 << ' ' << l + 1 << '\n';
  }
  return os.str();
}

std::string density_summary(const std::vector<Snapshot>& snaps) {
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (const auto& s : snaps) {
    const double d = s.density();
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += d;
  }
  std::ostringstream os;
  os << "density mean=" << format_number(sum / static_cast<double>(snaps.size())) << " min=" << format_number(lo)
     << " max=" << format_number(hi);
  return os.str();
}

int cmd_simulate(const Options& o) {
  if (o.scenarios.size() != 1) throw UsageError("simulate needs exactly one --scenario");
  const Scenario sc = make_scenario(parse_scenario(o.scenarios.front()), o.n, o.t_max);
  const auto snaps = simulate(sc.membership, sc.schedule, sc.horizon, o.seed);
  const fs::path dir = prepare_out(o.out);
  write_dmts(dir / "snapshots.dmts", snaps);
  if (o.edges) write_text(dir / "edges.txt", edge_list_text(snaps));
  std::cout << "scenario=" << scenario_name(sc.id) << " n=" << sc.membership.n << " L=" << sc.schedule.layers()
            << " T=" << sc.horizon << " snapshots=" << snaps.size() << '\n'
            << density_summary(snaps) << '\n';
  return kOk;
}

struct Workload {
  std::vector<Snapshot> snaps;
  std::optional<Scenario> scenario;
};

Workload load_workload(const Options& o) {
  Workload w;
  if (o.scenarios.size() > 1) throw UsageError("at most one --scenario here");
  if (!o.scenarios.empty()) {
    w.scenario = make_scenario(parse_scenario(o.scenarios.front()), o.n, o.t_max);
  }
  if (!o.input.empty()) {
    w.snaps = read_dmts(o.input);
    if (w.scenario) {
      if (w.snaps.front().nodes() != w.scenario->membership.n ||
          w.snaps.front().layers() != w.scenario->schedule.layers()) {
        throw UsageError("input dimensions do not match the scenario used as ground truth");
      }
      w.scenario->horizon = static_cast<int>(w.snaps.size()) - 1;
    }
  } else if (w.scenario) {
    w.snaps = simulate(w.scenario->membership, w.scenario->schedule, w.scenario->horizon, o.seed);
  } else {
    throw UsageError("need --input FILE or --scenario NAME");
  }
  if (w.snaps.size() < 2) throw UsageError("need at least one transition (two snapshots)");
  return w;
}

CalibrationConfig calibration_config(const Options& o) {
  CalibrationConfig cal;
  cal.grid = default_ctau_grid();
  cal.burn_in = o.burn_in;
  cal.alpha = o.alpha;
  cal.bootstrap = o.bootstrap;
  cal.seed = derive_seed(o.seed, 0xCA11);
  cal.threads = resolve_threads(0);
  return cal;
}

int cmd_estimate(const Options& o) {
  const Workload w = load_workload(o);
  const int n = w.snaps.front().nodes();
  const int layers = w.snaps.front().layers();
  const int t_max = static_cast<int>(w.snaps.size()) - 1;
  const std::vector<std::string> policies = o.policies.empty() ? std::vector<std::string>{"adaptive"} : o.policies;
  const int k = w.scenario ? w.scenario->membership.k : 2;
  const RefineConfig refine = resolve_ranks(parse_ranks(o.ranks), k, layers);

  std::optional<double> c_tau = o.c_tau;
  const bool needs_ctau = std::any_of(policies.begin(), policies.end(), [](const std::string& p) {
    return EstimatorPolicy::parse(p).variant == Variant::Adaptive;
  });
  if (needs_ctau && !c_tau) {
    const CalibrationConfig cal = calibration_config(o);
    c_tau = w.scenario ? calibrate_for_size(n, t_max, cal, derive_seed(o.seed, 0xDA7A)).c_tau
                       : calibrate_ctau(std::span<const Snapshot>(w.snaps).subspan(1), cal).c_tau;
  }

  const fs::path dir = prepare_out(o.out);
  std::optional<Truth> truth;
  if (w.scenario) truth = Truth{w.scenario->membership, w.scenario->schedule};
  for (const auto& name : policies) {
    EstimatorPolicy policy = EstimatorPolicy::parse(name);
    policy.refine = refine;
    if (c_tau) policy.tolerance = ToleranceRule::inverse_sqrt_drift(*c_tau);
    policy.t_max = t_max;
    policy.seed = o.seed;
    EstimateBundle last;
    const auto traj = run(w.snaps, policy, truth ? &*truth : nullptr,
                          [&last](const EstimateBundle& b, const StepMetrics&) {
                            if (b.t > 0) last = b;
                          });
    write_text(dir / ("estimate_" + policy.name() + ".csv"), format_trajectory_csv(traj, truth.has_value()));

    std::ostringstream sum;
    sum << "policy=" << policy.name() << "\nn=" << n << "\nL=" << layers << "\nT=" << t_max << "\n";
    sum << "ranks=" << refine.k_rank << ',' << refine.r1 << ',' << refine.r2 << "\n";
    if (policy.variant == Variant::Adaptive) sum << "c_tau=" << format_number(*c_tau) << "\n";
    sum << "final_k_hat=" << last.k_hat << "\nsubspaces_refreshed_at=" << last.subspaces.refreshed_at << "\n";
    sum << "degenerate_theta=" << last.degenerate_theta << "\ndegenerate_delta=" << last.degenerate_delta << "\n";
    if (truth) {
      sum << "mean_err_theta=" << format_number(post_burn_in_mean(traj, o.burn_in, &StepMetrics::err_theta)) << "\n";
      sum << "mean_err_delta=" << format_number(post_burn_in_mean(traj, o.burn_in, &StepMetrics::err_delta)) << "\n";
      sum << "mean_err_z=" << format_number(post_burn_in_mean(traj, o.burn_in, &StepMetrics::err_z)) << "\n";
    }
    sum << "final_labels=";
    for (std::size_t i = 0; i < last.z_hat.labels.size(); ++i) sum << (i ? "," : "") << last.z_hat.labels[i] + 1;
    sum << "\n";
    write_text(dir / ("summary_" + policy.name() + ".txt"), sum.str());
    std::cout << sum.str();
  }
  return kOk;
}

int cmd_bench(const Options& o) {
  ExperimentConfig cfg;
  const std::vector<std::string> scen =
      o.scenarios.empty() ? std::vector<std::string>{"nonstat-1", "nonstat-2", "nonstat-3", "nonstat-4"} : o.scenarios;
  for (const auto& s : scen) cfg.scenarios.push_back(parse_scenario(s));
  cfg.policies = o.policies.empty() ? std::vector<std::string>{"adaptive", "full-history", "fixed-30", "fixed-20"}
                                    : o.policies;
  for (const auto& p : cfg.policies) EstimatorPolicy::parse(p);
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  cfg.n = o.n;
  cfg.t_max = o.t_max;
  cfg.burn_in = o.burn_in;
  cfg.c_tau = o.c_tau;
  cfg.refine = parse_ranks(o.ranks);
  cfg.calibration_bootstrap = o.bootstrap;
  cfg.calibration_alpha = o.alpha;
  const BenchResult result = run_bench(cfg);
  write_bench(result, cfg, o.out);
  std::cout << "scenario,policy,metric,mean,sd,reps\n";
  for (const auto& r : result.table)
    std::cout << r.scenario << ',' << r.policy << ',' << r.metric << ',' << format_number(r.mean) << ','
              << format_number(r.sd) << ',' << r.reps << '\n';
  return kOk;
}

int cmd_calibrate(const Options& o) {
  const CalibrationConfig cal = calibration_config(o);
  CalibrationResult res;
  if (!o.input.empty()) {
    const auto snaps = read_dmts(o.input);
    res = calibration_curve(std::span<const Snapshot>(snaps).subspan(1), cal);
  } else {
    const int n = o.n > 0 ? o.n : 100;
    const int t = o.t_max > 0 ? o.t_max : 175;
    const Scenario sc = calibration_scenario(n, t);
    const auto sims = simulate(sc.membership, sc.schedule, t, derive_seed(o.seed, 0xDA7A), InitRule::Zero);
    res = calibration_curve(std::span<const Snapshot>(sims).subspan(1), cal);
  }
  const fs::path dir = prepare_out(o.out);
  std::ostringstream curve;
  curve << "c_tau,acceptance\n";
  for (std::size_t i = 0; i < res.grid.size(); ++i)
    curve << format_number(res.grid[i]) << ',' << format_number(res.acceptance[i]) << '\n';
  write_text(dir / "calibration_curve.csv", curve.str());
  std::ostringstream crit;
  crit << "bootstrap,critical_c_tau\n";
  for (std::size_t b = 0; b < res.critical_values.size(); ++b)
    crit << b + 1 << ',' << format_number(res.critical_values[b]) << '\n';
  write_text(dir / "calibration_bootstrap.csv", crit.str());
  std::ostringstream rep;
  rep << "found=" << (res.found ? "true" : "false") << "\nc_tau=" << format_number(res.c_tau)
      << "\nt_train=" << res.t_train << "\nbootstrap=" << cal.bootstrap << "\nalpha=" << format_number(cal.alpha)
      << "\nburn_in=" << cal.burn_in << "\n";
  write_text(dir / "calibration.txt", rep.str());
  std::cout << rep.str();
  if (!res.found) {
    std::cerr << "error: no grid value reached acceptance " << format_number(1.0 - cal.alpha)
              << "; enlarge the c_tau grid\n";
    return kExhausted;
  }
  return kOk;
}

int cmd_ingest(const Options& o) {
  if (o.input.empty()) throw UsageError("ingest needs --input EDGE_LIST");
  if (o.n < 2 || o.layers < 1 || o.t_max < 0) throw UsageError("ingest needs --n >= 2, --layers >= 1, --t-max >= 0");
  std::ifstream in(o.input);
  if (!in) throw IoError("cannot open '" + o.input + "'");
  std::vector<Snapshot> snaps;
  if (!o.node_map.empty()) {
    std::ifstream mf(o.node_map);
    if (!mf) throw IoError("cannot open '" + o.node_map + "'");
    snaps = ingest_edge_list(in, o.n, o.layers, o.t_max, read_node_map(mf));
  } else {
    snaps = ingest_edge_list(in, o.n, o.layers, o.t_max);
  }
  const fs::path dir = prepare_out(o.out);
  write_dmts(dir / "snapshots.dmts", snaps);
  std::cout << "n=" << o.n << " L=" << o.layers << " T=" << o.t_max << " snapshots=" << snaps.size() << '\n'
            << density_summary(snaps) << '\n';
  return kOk;
}

/// Turns "key = value" lines of a config file into flags placed ahead of the
/// command-line flags, skipping keys the command line already sets.
std::vector<std::string> config_args(const std::string& path, const std::vector<std::string>& cli) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file '" + path + "'");
  std::set<std::string> given;
  for (const auto& a : cli)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  std::vector<std::string> out;
  std::string line;
  std::uint64_t no = 0;
  while (std::getline(f, line)) {
    ++no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';' || line[first] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path + ":" + std::to_string(no) + ": expected key=value", no);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\"");
      const auto b = s.find_last_not_of(" \t\r\"");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (given.count(flag) != 0 || flag == "--config") continue;
    out.push_back(flag);
    const std::string value = trim(line.substr(eq + 1));
    if (flag != "--edges") out.push_back(value);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Expand --config before parsing so explicit flags take precedence.
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        args.erase(args.begin() + static_cast<long>(i));
      } else {
        continue;
      }
      const auto extra = config_args(path, args);
      const auto at = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
      const auto pos = at == args.end() ? args.end() : at + 1;
      args.insert(pos, extra.begin(), extra.end());
      break;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }

  CLI::App app{"Streaming estimation and benchmarking for AR(1) multilayer block models"};
  app.require_subcommand(1);
  Options o;
  std::string dummy_config;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "random seed")->capture_default_str();
    s->add_option("--out", o.out, "output directory")->capture_default_str();
    s->add_option("--config", dummy_config, "key=value configuration file");
  };
  auto add_model = [&](CLI::App* s) {
    s->add_option("--n", o.n, "node count override")->check(CLI::NonNegativeNumber);
    s->add_option("--t-max", o.t_max, "horizon T override")->check(CLI::NonNegativeNumber);
  };
  auto add_estimation = [&](CLI::App* s) {
    s->add_option("--policy", o.policies, "estimator policy (repeatable)");
    s->add_option("--burn-in", o.burn_in, "burn-in t0")->capture_default_str()->check(CLI::NonNegativeNumber);
    s->add_option("--c-tau", o.c_tau, "tolerance constant (calibrated when absent)")->check(CLI::PositiveNumber);
    s->add_option("--ranks", o.ranks, "ranks K,r1,r2 (default K,L,L)");
    s->add_option("--bootstrap", o.bootstrap, "calibration bootstrap size")->capture_default_str()
        ->check(CLI::PositiveNumber);
    s->add_option("--alpha", o.alpha, "calibration level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  };

  auto* sim = app.add_subcommand("simulate", "simulate a scenario to a DMTS file");
  sim->add_option("--scenario", o.scenarios, "scenario name")->required();
  sim->add_flag("--edges", o.edges, "also write an edge list");
  add_model(sim);
  add_common(sim);

  auto* est = app.add_subcommand("estimate", "run estimators over a DMTS file or a simulated scenario");
  est->add_option("--scenario", o.scenarios, "scenario (ground truth; simulated when no --input)");
  est->add_option("--input", o.input, "DMTS input file");
  add_model(est);
  add_estimation(est);
  add_common(est);

  auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark");
  bench->add_option("--scenario", o.scenarios, "scenario (repeatable)");
  bench->add_option("--reps", o.reps, "replications per scenario")->capture_default_str()->check(CLI::PositiveNumber);
  add_model(bench);
  add_estimation(bench);
  add_common(bench);

  auto* cal = app.add_subcommand("calibrate", "bootstrap calibration of the tolerance constant");
  cal->add_option("--input", o.input, "DMTS training data (first snapshot is skipped)");
  add_model(cal);
  cal->add_option("--burn-in", o.burn_in, "burn-in t0")->capture_default_str()->check(CLI::NonNegativeNumber);
  cal->add_option("--bootstrap", o.bootstrap, "bootstrap size B")->capture_default_str()->check(CLI::PositiveNumber);
  cal->add_option("--alpha", o.alpha, "level alpha")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  add_common(cal);

  auto* ing = app.add_subcommand("ingest", "build a DMTS file from a 't i j l' edge list");
  ing->add_option("--input", o.input, "edge list file")->required();
  ing->add_option("--n", o.n, "node count")->required();
  ing->add_option("--layers", o.layers, "layer count")->required();
  ing->add_option("--t-max", o.t_max, "last time index T")->required();
  ing->add_option("--node-map", o.node_map, "optional 'label index' file");
  add_common(ing);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*est) return cmd_estimate(o);
    if (*bench) return cmd_bench(o);
    if (*cal) return cmd_calibrate(o);
    if (*ing) return cmd_ingest(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << " (at " << e.location() << ")\n";
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const CalibrationExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExhausted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
